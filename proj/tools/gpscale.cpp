// Command-line harness for the gpscale library: synthetic benchmark
// generation, desk-scale MCMC, runtime-scaling measurement, masked-grid
// count fits, and plot-data dumps. Everything emits CSV or JSON to stdout or
// --out. Exit codes: 0 success, 2 validation error, 3 budget truncation.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gpscale/fourier.hpp"
#include "gpscale/harness.hpp"
#include "gpscale/io.hpp"
#include "gpscale/kernels.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitTruncated = 3;

void emit(const std::string& out_path, const std::string& body) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output path " + out_path);
  out << body;
}

std::string fmt(double v) { return gpscale::format_double(v); }

json summarize_chain(const gpscale::ChainResult& chain) {
  const Eigen::VectorXd mean = chain.f_draws.colwise().mean();
  Eigen::VectorXd sd(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    sd[j] = std::sqrt((chain.f_draws.col(j).array() - mean[j]).square().sum() /
                      (chain.f_draws.rows() - 1.0));
  }
  json out;
  out["posterior_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  out["posterior_sd"] = std::vector<double>(sd.data(), sd.data() + sd.size());
  out["ess"] = std::vector<double>(chain.ess.data(), chain.ess.data() + chain.ess.size());
  out["min_ess"] = chain.ess.minCoeff();
  out["draws_completed"] = chain.f_draws.rows();
  out["truncated"] = chain.truncated;
  out["accept_rate"] = chain.accept_rate;
  out["divergence_rate"] = chain.divergence_rate;
  out["divergence_flagged"] = chain.divergence_flagged;
  out["step_size"] = chain.step_size;
  out["wall_seconds"] = chain.wall_seconds;
  return out;
}

int run_simulate(const gpscale::BenchmarkConfig& config, const std::string& out_path) {
  auto sim = gpscale::simulate_benchmark(config);
  std::ostringstream body;
  body << "x,f_true,y\n";
  for (Eigen::Index i = 0; i < config.n; ++i) {
    body << i << ',' << fmt(sim.f_true[i]) << ',' << fmt(sim.y[i]) << '\n';
  }
  emit(out_path, body.str());
  return 0;
}

int run_bench_scaling(const gpscale::ScalingConfig& config, const std::string& out_path) {
  auto rows = gpscale::scaling_benchmark(config);
  std::ostringstream body;
  body << "backend,n,parameterization,mean_seconds,sd_seconds,truncated\n";
  bool truncated = false;
  for (const auto& row : rows) {
    body << gpscale::to_string(row.backend) << ',' << row.n << ','
         << gpscale::to_string(row.parameterization) << ',' << fmt(row.mean_seconds) << ','
         << fmt(row.sd_seconds) << ',' << (row.truncated ? "true" : "false") << '\n';
    truncated = truncated || row.truncated;
  }
  emit(out_path, body.str());
  // Informational least-squares slopes per backend (centered rows).
  for (gpscale::Backend backend : config.backends) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows) {
      if (row.backend == backend && row.parameterization == gpscale::Parameterization::Centered) {
        pts.emplace_back(static_cast<double>(row.n), row.mean_seconds);
      }
    }
    if (pts.size() >= 2) {
      std::cerr << "# " << gpscale::to_string(backend)
                << " log-log slope: " << gpscale::fit_loglog_slope(pts) << '\n';
    }
  }
  return truncated ? kExitTruncated : 0;
}

int run_mcmc_command(const gpscale::BenchmarkConfig& config, const gpscale::McmcSettings& settings,
                     int chains, const std::string& out_path) {
  auto sim = gpscale::simulate_benchmark(config);
  auto results = gpscale::run_chains(sim.y, config, settings, chains);
  json out;
  out["config"] = {{"backend", gpscale::to_string(config.backend)},
                   {"parameterization", gpscale::to_string(config.parameterization)},
                   {"n", config.n},
                   {"kappa", config.kappa},
                   {"sigma", config.sigma},
                   {"ell", config.ell},
                   {"q", config.q},
                   {"seed", config.seed},
                   {"warmup", settings.warmup},
                   {"draws", settings.draws}};
  if (config.backend == gpscale::Backend::Fourier) {
    out["packed_layout_version"] = gpscale::packed_layout_version;
  }
  out["chains"] = json::array();
  bool truncated = false;
  for (const auto& chain : results) {
    out["chains"].push_back(summarize_chain(chain));
    truncated = truncated || chain.truncated;
  }
  emit(out_path, out.dump(2) + "\n");
  return truncated ? kExitTruncated : 0;
}

int run_fit_grid(const std::string& grid_path, const gpscale::FitGridConfig& config,
                 const std::string& out_path, const std::string& median_path) {
  const gpscale::MaskedGrid grid = gpscale::read_count_grid(grid_path);
  auto fit = gpscale::masked_count_fit(grid, config);
  const auto quantiles = [](Eigen::VectorXd v) {
    std::sort(v.data(), v.data() + v.size());
    const auto at = [&](double p) {
      return v[std::min<Eigen::Index>(v.size() - 1, static_cast<Eigen::Index>(p * v.size()))];
    };
    return json{{"q05", at(0.05)}, {"q50", at(0.50)}, {"q95", at(0.95)}};
  };
  json out;
  out["packed_layout_version"] = gpscale::packed_layout_version;
  out["hyperparameters"] = {{"loc", quantiles(fit.loc_draws)},
                            {"sigma", quantiles(fit.sigma_draws)},
                            {"ell", quantiles(fit.ell_draws)},
                            {"kappa", quantiles(fit.kappa_draws)}};
  out["hyper_accept_rate"] = fit.hyper_accept_rate;
  out["latent_accept_rate"] = fit.latent_accept_rate;
  out["divergence_rate"] = fit.divergence_rate;
  out["wall_seconds"] = fit.wall_seconds;
  out["median_f"] = json::array();
  for (Eigen::Index i = 0; i < fit.median_f.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(fit.median_f.cols()));
    for (Eigen::Index j = 0; j < fit.median_f.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = fit.median_f(i, j);
    }
    out["median_f"].push_back(row);
  }
  emit(out_path, out.dump(2) + "\n");
  if (!median_path.empty()) {
    gpscale::write_real_grid(median_path, fit.median_f, grid.cell_size);
  }
  return 0;
}

// `latent` predictions are exponentiated (log-mean fields from fit-grid);
// `estimate` predictions are used as-is (count-scale fields like the
// Gaussian filter output).
int run_smse(const std::string& counts_path, const std::string& pred_path, bool is_latent,
             const std::string& out_path) {
  const gpscale::MaskedGrid counts = gpscale::read_count_grid(counts_path);
  const Eigen::MatrixXd pred = gpscale::read_real_grid(pred_path);
  if (pred.rows() != counts.values.rows() || pred.cols() != counts.values.cols()) {
    throw std::invalid_argument("smse: prediction grid shape does not match counts grid");
  }
  double total = 0.0;
  long cells = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      if (!counts.mask(i, j)) continue;
      if (std::isnan(pred(i, j))) {
        throw std::invalid_argument("smse: prediction undefined (nan) at an evaluation cell");
      }
      const double y = counts.values(i, j);
      const double yhat = is_latent ? std::exp(pred(i, j)) : pred(i, j);
      total += (y - yhat) * (y - yhat) / std::max(y, 1.0);
      ++cells;
    }
  }
  if (cells == 0) throw std::invalid_argument("smse: no evaluation cells in counts grid");
  json out{{"smse", total / static_cast<double>(cells)}, {"cells", cells}};
  emit(out_path, out.dump(2) + "\n");
  return 0;
}

int run_filter(const std::string& grid_path, double lambda, const std::string& out_path) {
  const gpscale::MaskedGrid grid = gpscale::read_count_grid(grid_path);
  const Eigen::MatrixXd estimate = gpscale::gaussian_filter_estimate(grid, lambda);
  if (!out_path.empty()) {
    gpscale::write_real_grid(out_path, estimate, grid.cell_size);
    return 0;
  }
  std::ostringstream body;
  for (Eigen::Index i = 0; i < estimate.rows(); ++i) {
    for (Eigen::Index j = 0; j < estimate.cols(); ++j) {
      if (j > 0) body << ',';
      body << fmt(estimate(i, j));
    }
    body << '\n';
  }
  emit(out_path, body.str());
  return 0;
}

int run_spectra(const std::string& kernel, Eigen::Index n, double sigma, double ell, double nu,
                double period, const std::string& domain, const std::string& out_path) {
  if (kernel != "se" && kernel != "matern") {
    throw std::invalid_argument("spectra: kernel must be 'se' or 'matern'");
  }
  gpscale::Spectrum1D spec = kernel == "se"
                                 ? gpscale::se_spectrum_1d(n, sigma, ell, period)
                                 : gpscale::matern_spectrum_1d(n, nu, sigma, ell, period);
  std::ostringstream body;
  if (domain == "fourier") {
    body << "xi,power\n";
    for (Eigen::Index xi = 0; xi < spec.values.size(); ++xi) {
      body << xi << ',' << fmt(spec.values[xi]) << '\n';
    }
  } else if (domain == "real") {
    // Periodic kernel row next to the non-periodic closed form, for
    // kernel-fidelity plots.
    const Eigen::VectorXd row = gpscale::periodic_kernel_row(spec);
    body << "lag,distance,periodic,nonperiodic\n";
    for (Eigen::Index d = 0; d < row.size(); ++d) {
      const double x = static_cast<double>(d) * period / static_cast<double>(n);
      const double direct = kernel == "se" ? gpscale::se_cov(x, sigma, ell)
                                           : gpscale::matern_cov(x, sigma, ell, nu);
      body << d << ',' << fmt(x) << ',' << fmt(row[d]) << ',' << fmt(direct) << '\n';
    }
  } else {
    throw std::invalid_argument("spectra: domain must be 'fourier' or 'real'");
  }
  emit(out_path, body.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable Gaussian process benchmark harness"};
  app.require_subcommand(1);
  app.fallthrough();  // lets subcommands accept the global --out

  std::string out_path;
  app.add_option("--out", out_path, "write output here instead of stdout");

  gpscale::BenchmarkConfig bench;
  std::string backend_name = "fourier";
  std::string param_name = "non-centered";

  auto add_model_options = [&](CLI::App* cmd) {
    cmd->add_option("--n", bench.n, "grid size");
    cmd->add_option("--kappa", bench.kappa, "observation noise sd");
    cmd->add_option("--sigma", bench.sigma, "kernel marginal scale");
    cmd->add_option("--ell", bench.ell, "kernel correlation length");
    cmd->add_option("--backend", backend_name, "dense|graph|fourier");
    cmd->add_option("--parameterization", param_name, "centered|non-centered");
    cmd->add_option("--q", bench.q, "nearest predecessors (graph backend)");
    cmd->add_option("--seed", bench.seed, "RNG seed");
  };

  auto* simulate = app.add_subcommand("simulate", "draw (f, y) from the benchmark model");
  add_model_options(simulate);

  auto* bench_scaling =
      app.add_subcommand("bench-scaling", "time lpdf+gradient evaluations across sizes");
  std::string backends_csv = "fourier,graph,dense";
  std::string sizes_csv = "512,1024,2048";
  gpscale::ScalingConfig scaling;
  bench_scaling->add_option("--backends", backends_csv, "comma-separated backends");
  bench_scaling->add_option("--sizes", sizes_csv, "comma-separated ascending sizes");
  bench_scaling->add_option("--reps", scaling.repetitions, "repetitions per cell");
  bench_scaling->add_option("--q", scaling.q, "nearest predecessors (graph)");
  bench_scaling->add_option("--sigma", scaling.sigma, "kernel marginal scale");
  bench_scaling->add_option("--ell", scaling.ell, "kernel correlation length");
  bench_scaling->add_option("--seed", scaling.seed, "RNG seed");
  bench_scaling->add_option("--budget-seconds", scaling.budget_seconds,
                            "wall-clock cap per (backend, n) cell");

  auto* mcmc = app.add_subcommand("mcmc", "posterior sampling on the benchmark model");
  add_model_options(mcmc);
  gpscale::McmcSettings settings;
  int chains = 1;
  mcmc->add_option("--warmup", settings.warmup, "warmup iterations");
  mcmc->add_option("--draws", settings.draws, "posterior draws");
  mcmc->add_option("--leapfrog", settings.leapfrog_steps, "max leapfrog steps per trajectory");
  mcmc->add_option("--target-accept", settings.target_accept, "dual-averaging target");
  mcmc->add_option("--chains", chains, "independent chains (parallel, GPSCALE_THREADS caps)");
  mcmc->add_option("--budget-seconds", bench.budget_seconds,
                   "wall-clock cap per chain (partial results on expiry)");

  auto* fit_grid = app.add_subcommand("fit-grid", "fit the count model to a masked grid CSV");
  std::string grid_path;
  std::string median_path;
  gpscale::FitGridConfig fit_config;
  std::string family_name = "matern";
  fit_grid->add_option("--grid", grid_path, "count grid CSV (-1 = missing)")->required();
  fit_grid->add_option("--pad-rows", fit_config.pad_rows, "padding rows");
  fit_grid->add_option("--pad-cols", fit_config.pad_cols, "padding columns");
  fit_grid->add_option("--ell-lower", fit_config.ell_lower,
                       "log-uniform prior lower bound (cells)");
  fit_grid->add_option("--ell-upper", fit_config.ell_upper,
                       "log-uniform prior upper bound (cells)");
  fit_grid->add_option("--kernel", family_name, "se|matern");
  fit_grid->add_option("--nu", fit_config.nu, "Matern smoothness");
  fit_grid->add_option("--warmup", fit_config.warmup, "warmup iterations");
  fit_grid->add_option("--draws", fit_config.draws, "posterior draws");
  fit_grid->add_option("--seed", fit_config.seed, "RNG seed");
  fit_grid->add_option("--median-out", median_path, "also write the median latent field CSV here");

  auto* smse_cmd = app.add_subcommand("smse", "scaled mean-squared error of a prediction");
  std::string counts_path, latent_path, estimate_path;
  smse_cmd->add_option("--counts", counts_path, "held-out counts CSV (-1 = excluded)")->required();
  auto* latent_opt =
      smse_cmd->add_option("--latent", latent_path, "latent estimate CSV (log scale)");
  smse_cmd->add_option("--estimate", estimate_path, "count-scale estimate CSV")
      ->excludes(latent_opt);

  auto* filter = app.add_subcommand("filter", "mask-aware Gaussian filter estimate");
  std::string filter_grid_path;
  double lambda = 1.0;
  filter->add_option("--grid", filter_grid_path, "count grid CSV (-1 = missing)")->required();
  filter->add_option("--lambda", lambda, "smoothing scale in cells")->required();

  auto* spectra = app.add_subcommand("spectra", "dump kernel spectra or kernel rows for plotting");
  std::string kernel_name = "se";
  std::string domain = "fourier";
  Eigen::Index spec_n = 128;
  double spec_sigma = 1.0, spec_ell = 0.2, spec_nu = 1.5, spec_period = 1.0;
  spectra->add_option("--kernel", kernel_name, "se|matern");
  spectra->add_option("--n", spec_n, "grid size");
  spectra->add_option("--sigma", spec_sigma, "marginal scale");
  spectra->add_option("--ell", spec_ell, "correlation length");
  spectra->add_option("--nu", spec_nu, "Matern smoothness");
  spectra->add_option("--period", spec_period, "domain period");
  spectra->add_option("--domain", domain, "fourier|real");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate || *mcmc) {
      bench.backend = gpscale::backend_from_string(backend_name);
      bench.parameterization = gpscale::parameterization_from_string(param_name);
    }
    if (*simulate) return run_simulate(bench, out_path);
    if (*bench_scaling) {
      scaling.backends.clear();
      std::stringstream bs(backends_csv);
      std::string token;
      while (std::getline(bs, token, ',')) {
        scaling.backends.push_back(gpscale::backend_from_string(token));
      }
      scaling.sizes.clear();
      std::stringstream ss(sizes_csv);
      while (std::getline(ss, token, ',')) scaling.sizes.push_back(std::stoll(token));
      return run_bench_scaling(scaling, out_path);
    }
    if (*mcmc) return run_mcmc_command(bench, settings, chains, out_path);
    if (*fit_grid) {
      fit_config.family = family_name == "se" ? gpscale::KernelFamily::SquaredExponential
                                              : gpscale::KernelFamily::Matern;
      return run_fit_grid(grid_path, fit_config, out_path, median_path);
    }
    if (*smse_cmd) {
      if (latent_path.empty() == estimate_path.empty()) {
        throw std::invalid_argument("smse: provide exactly one of --latent or --estimate");
      }
      const bool is_latent = !latent_path.empty();
      return run_smse(counts_path, is_latent ? latent_path : estimate_path, is_latent, out_path);
    }
    if (*filter) return run_filter(filter_grid_path, lambda, out_path);
    if (*spectra) {
      return run_spectra(kernel_name, spec_n, spec_sigma, spec_ell, spec_nu, spec_period, domain,
                         out_path);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const gpscale::FactorizationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
