#ifndef GPSCALE_HMC_HPP
#define GPSCALE_HMC_HPP

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

namespace gpscale {

inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{seed, stream, static_cast<std::uint64_t>(0x9e3779b97f4a7c15ull)};
  return std::mt19937_64(seq);
}

inline Eigen::VectorXd standard_normal_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Log density with gradient: fills `grad` and returns log p(x).
using LogDensityGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct HmcConfig {
  int warmup = 500;
  int draws = 500;
  // Upper bound on leapfrog steps; each trajectory draws its length uniformly
  // from [max(1, L/2), L]. A deterministic length resonates with the
  // near-harmonic oscillation of Gaussian targets (the trajectory rotates by
  // ~2 pi and returns to its start), which collapses the effective sample
  // size on exactly the easiest posteriors.
  int leapfrog_steps = 16;
  double target_accept = 0.8;
  double init_step_size = 0.0;  // 0 = pick automatically
  double divergence_threshold = 50.0;
  // Wall-clock cap over warmup plus sampling; on expiry the sampler stops
  // and returns the draws completed so far.
  double budget_seconds = std::numeric_limits<double>::infinity();
};

struct HmcResult {
  Eigen::MatrixXd draws;  // one row per retained draw
  double accept_rate = 0.0;
  double divergence_rate = 0.0;
  double step_size = 0.0;
  bool truncated = false;
};

namespace hmc_detail {

// Nesterov dual averaging on log step size (gamma = 0.05, t0 = 10,
// kappa = 0.75), aimed at the configured acceptance statistic.
struct DualAveraging {
  double mu = 0.0;
  double log_eps = 0.0;
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  double target = 0.8;
  int t = 0;

  explicit DualAveraging(double eps0, double target_accept)
      : mu(std::log(10.0 * eps0)), log_eps(std::log(eps0)), log_eps_bar(std::log(eps0)),
        target(target_accept) {}

  void update(double accept_stat) {
    ++t;
    const double eta = 1.0 / (t + 10.0);
    h_bar = (1.0 - eta) * h_bar + eta * (target - accept_stat);
    log_eps = mu - std::sqrt(static_cast<double>(t)) / 0.05 * h_bar;
    const double w = std::pow(static_cast<double>(t), -0.75);
    log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
  }

  double current() const { return std::exp(log_eps); }
  double averaged() const { return std::exp(log_eps_bar); }
};

struct Trajectory {
  Eigen::VectorXd position;
  double accept_stat = 0.0;
  bool divergent = false;
  bool accepted = false;
};

template <class LogP>
Trajectory leapfrog_trajectory(LogP&& logp, const Eigen::VectorXd& x0, double step, int steps,
                               double divergence_threshold, std::mt19937_64& rng) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd grad(n);
  double lp = logp(x, grad);
  Eigen::VectorXd p = standard_normal_vector(rng, n);
  const double h0 = -lp + 0.5 * p.squaredNorm();

  p += 0.5 * step * grad;
  for (int s = 0; s < steps; ++s) {
    x += step * p;
    lp = logp(x, grad);
    if (!std::isfinite(lp)) break;
    if (s + 1 < steps) p += step * grad;
  }
  p += 0.5 * step * grad;

  Trajectory out;
  out.position = x0;
  const double h1 = -lp + 0.5 * p.squaredNorm();
  const double delta = h0 - h1;  // log acceptance ratio
  if (!std::isfinite(delta) || -delta > divergence_threshold) {
    out.divergent = true;
    out.accept_stat = 0.0;
    return out;
  }
  out.accept_stat = std::min(1.0, std::exp(delta));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < out.accept_stat) {
    out.position = x;
    out.accepted = true;
  }
  return out;
}

// Doubles or halves the step size until the acceptance probability of a
// single trajectory crosses 1/2.
template <class LogP>
double find_reasonable_step_size(LogP&& logp, const Eigen::VectorXd& x0, std::mt19937_64& rng) {
  const Eigen::Index n = x0.size();
  double eps = 0.1 / std::pow(static_cast<double>(std::max<Eigen::Index>(n, 1)), 0.25);
  Eigen::VectorXd grad(n);
  double lp = logp(x0, grad);
  Eigen::VectorXd p = standard_normal_vector(rng, n);
  const double h0 = -lp + 0.5 * p.squaredNorm();
  const auto one_step_delta = [&](double step) {
    Eigen::VectorXd xx = x0;
    Eigen::VectorXd pp = p;
    Eigen::VectorXd gg = grad;
    pp += 0.5 * step * gg;
    xx += step * pp;
    Eigen::VectorXd g2(n);
    const double lp2 = logp(xx, g2);
    if (!std::isfinite(lp2)) return -std::numeric_limits<double>::infinity();
    pp += 0.5 * step * g2;
    return h0 - (-lp2 + 0.5 * pp.squaredNorm());
  };
  double delta = one_step_delta(eps);
  const double dir = (delta > std::log(0.5)) ? 1.0 : -1.0;
  for (int iter = 0; iter < 50; ++iter) {
    eps *= std::pow(2.0, dir);
    delta = one_step_delta(eps);
    if (dir > 0 ? delta <= std::log(0.5) : delta >= std::log(0.5)) break;
    if (!std::isfinite(delta) && dir < 0) continue;
  }
  return std::max(eps, 1e-10);
}

}  // namespace hmc_detail

// Plain Hamiltonian Monte Carlo: fixed-length leapfrog trajectories with
// dual-averaged step size adaptation during warmup.
template <class LogP>
HmcResult hmc_sample(LogP&& logp, Eigen::VectorXd init, const HmcConfig& config,
                     std::mt19937_64& rng) {
  if (config.draws < 1) throw std::invalid_argument("hmc_sample: need at least one draw");
  if (config.leapfrog_steps < 1) throw std::invalid_argument("hmc_sample: need >= 1 leapfrog step");
  const Eigen::Index n = init.size();
  const auto t0 = std::chrono::steady_clock::now();
  const auto over_budget = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
           config.budget_seconds;
  };
  double eps0 = config.init_step_size > 0.0
                    ? config.init_step_size
                    : hmc_detail::find_reasonable_step_size(logp, init, rng);
  hmc_detail::DualAveraging adapt(eps0, config.target_accept);
  std::uniform_int_distribution<int> step_count(std::max(1, config.leapfrog_steps / 2),
                                                config.leapfrog_steps);

  HmcResult out;
  Eigen::VectorXd x = std::move(init);
  for (int it = 0; it < config.warmup && !out.truncated; ++it) {
    auto traj = hmc_detail::leapfrog_trajectory(logp, x, adapt.current(), step_count(rng),
                                                config.divergence_threshold, rng);
    x = traj.position;
    adapt.update(traj.accept_stat);
    out.truncated = over_budget();
  }
  const double eps = config.warmup > 0 ? adapt.averaged() : eps0;

  out.step_size = eps;
  out.draws.resize(config.draws, n);
  double accept_sum = 0.0;
  int divergences = 0;
  int completed = 0;
  for (int it = 0; it < config.draws && !out.truncated; ++it) {
    auto traj = hmc_detail::leapfrog_trajectory(logp, x, eps, step_count(rng),
                                                config.divergence_threshold, rng);
    x = traj.position;
    accept_sum += traj.accept_stat;
    divergences += traj.divergent ? 1 : 0;
    out.draws.row(it) = x.transpose();
    ++completed;
    out.truncated = over_budget();
  }
  // Budget expiry during warmup leaves nothing; keep one draw at the current
  // state so downstream summaries stay well defined.
  if (completed == 0) {
    out.draws.row(0) = x.transpose();
    completed = 1;
  }
  out.draws.conservativeResize(completed, n);
  out.accept_rate = completed > 0 ? accept_sum / completed : 0.0;
  out.divergence_rate = static_cast<double>(divergences) / static_cast<double>(completed);
  return out;
}

// Effective sample size by batch means with ceil(sqrt(draws)) batches.
inline double ess_batch_means(const Eigen::VectorXd& chain) {
  const Eigen::Index m = chain.size();
  if (m < 4) return static_cast<double>(m);
  const auto batches =
      static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(m))));
  const Eigen::Index batch_size = m / batches;
  if (batch_size < 1) return static_cast<double>(m);
  const Eigen::Index used = batches * batch_size;
  const double mean = chain.head(used).mean();
  double var = 0.0;
  for (Eigen::Index i = 0; i < used; ++i) {
    const double d = chain[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(used - 1);
  if (!(var > 0.0)) return static_cast<double>(m);
  double bm_var = 0.0;
  for (Eigen::Index b = 0; b < batches; ++b) {
    const double bmean = chain.segment(b * batch_size, batch_size).mean();
    const double d = bmean - mean;
    bm_var += d * d;
  }
  bm_var *= static_cast<double>(batch_size) / static_cast<double>(batches - 1);
  const double ess = static_cast<double>(used) * var / bm_var;
  return std::clamp(ess, 1e-12, static_cast<double>(m));
}

inline Eigen::VectorXd ess_batch_means(const Eigen::MatrixXd& draws) {
  Eigen::VectorXd out(draws.cols());
  for (Eigen::Index j = 0; j < draws.cols(); ++j) out[j] = ess_batch_means(draws.col(j).eval());
  return out;
}

// Batch-means Monte Carlo standard error of the chain mean.
inline double batch_means_se(const Eigen::VectorXd& chain) {
  const Eigen::Index m = chain.size();
  if (m < 4) return std::numeric_limits<double>::infinity();
  const auto batches =
      static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(m))));
  const Eigen::Index batch_size = m / batches;
  const Eigen::Index used = batches * batch_size;
  const double mean = chain.head(used).mean();
  double bm_var = 0.0;
  for (Eigen::Index b = 0; b < batches; ++b) {
    const double d = chain.segment(b * batch_size, batch_size).mean() - mean;
    bm_var += d * d;
  }
  bm_var *= static_cast<double>(batch_size) / static_cast<double>(batches - 1);
  return std::sqrt(bm_var / static_cast<double>(used));
}

}  // namespace gpscale

#endif  // GPSCALE_HMC_HPP
