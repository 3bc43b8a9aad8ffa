#ifndef GPSCALE_GRAPH_HPP
#define GPSCALE_GRAPH_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpscale/dense.hpp"
#include "gpscale/kernels.hpp"

namespace gpscale {

// Edge list in the serialized convention: 1-based node labels, one
// predecessor->successor pair per position.
struct EdgeList {
  std::vector<int> predecessors;
  std::vector<int> successors;
};

// Groups edges into per-node predecessor lists (0-based). Node ordering is
// the input order and every predecessor label must be strictly smaller than
// its successor.
inline std::vector<std::vector<int>> parse_edge_list(const EdgeList& edges, int n) {
  if (n < 1) throw std::invalid_argument("parse_edge_list: n must be >= 1");
  if (edges.predecessors.size() != edges.successors.size()) {
    throw std::invalid_argument("parse_edge_list: predecessor and successor rows differ in length");
  }
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < edges.predecessors.size(); ++e) {
    const int p = edges.predecessors[e];
    const int s = edges.successors[e];
    const std::string where =
        "edge " + std::to_string(e + 1) + " (" + std::to_string(p) + " -> " + std::to_string(s) + ")";
    if (p < 1 || p > n || s < 1 || s > n) {
      throw std::invalid_argument("parse_edge_list: node label out of range at " + where);
    }
    if (p == s) throw std::invalid_argument("parse_edge_list: self edge at " + where);
    if (p > s) {
      throw std::invalid_argument("parse_edge_list: predecessor label exceeds successor at " + where);
    }
    if (!seen.insert({p, s}).second) {
      throw std::invalid_argument("parse_edge_list: duplicate edge at " + where);
    }
    preds[static_cast<std::size_t>(s - 1)].push_back(p - 1);
  }
  return preds;
}

// Connects each node to at most q of its nearest predecessors (Euclidean
// distance, ties broken by lower index). Node order is the row order of
// `locations`; predecessors of each node are emitted in ascending index.
inline EdgeList nearest_neighbor_graph(const Eigen::MatrixXd& locations, int q) {
  if (locations.rows() < 1) throw std::invalid_argument("nearest_neighbor_graph: need >= 1 point");
  if (q < 0) throw std::invalid_argument("nearest_neighbor_graph: q must be >= 0");
  if (!locations.allFinite()) {
    throw std::invalid_argument("nearest_neighbor_graph: locations must be finite");
  }
  const Eigen::Index n = locations.rows();
  EdgeList out;
  std::vector<std::pair<double, int>> cand;
  for (Eigen::Index j = 1; j < n; ++j) {
    const int keep = std::min<int>(q, static_cast<int>(j));
    if (keep == 0) continue;
    cand.clear();
    cand.reserve(static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < j; ++i) {
      cand.emplace_back((locations.row(j) - locations.row(i)).squaredNorm(), static_cast<int>(i));
    }
    std::nth_element(cand.begin(), cand.begin() + keep - 1, cand.end());
    std::sort(cand.begin(), cand.begin() + keep,
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (int k = 0; k < keep; ++k) {
      out.predecessors.push_back(cand[static_cast<std::size_t>(k)].second + 1);
      out.successors.push_back(static_cast<int>(j) + 1);
    }
  }
  return out;
}

// Stable permutation that orders locations lexicographically by coordinate.
// Provided for callers that want a spatially coherent ordering before
// building a graph; never applied implicitly.
inline std::vector<int> lexicographic_order(const Eigen::MatrixXd& locations) {
  std::vector<int> order(static_cast<std::size_t>(locations.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index d = 0; d < locations.cols(); ++d) {
      if (locations(a, d) != locations(b, d)) return locations(a, d) < locations(b, d);
    }
    return false;
  });
  return order;
}

// GP with structured dependencies on a DAG: the joint density factorizes into
// per-node Gaussian conditionals given each node's predecessors. Kernels are
// limited to the families with closed real-domain forms used here: squared
// exponential and Matern 3/2, 5/2.
class DagGp {
 public:
  DagGp(Eigen::MatrixXd locations, std::vector<std::vector<int>> predecessors, Kernel kernel)
      : locations_(std::move(locations)),
        predecessors_(std::move(predecessors)),
        kernel_(std::move(kernel)) {
    kernel_.validate();
    const bool supported =
        kernel_.family == KernelFamily::SquaredExponential ||
        (kernel_.family == KernelFamily::Matern && (kernel_.nu == 1.5 || kernel_.nu == 2.5));
    if (!supported) {
      throw UnsupportedParameter(
          "DagGp: kernel must be squared exponential or Matern 3/2 / 5/2");
    }
    const auto n = static_cast<std::size_t>(locations_.rows());
    if (predecessors_.size() != n) {
      throw std::invalid_argument("DagGp: predecessor lists must cover every node");
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::set<int> unique;
      for (int p : predecessors_[j]) {
        if (p < 0 || p >= static_cast<int>(j)) {
          throw std::invalid_argument("DagGp: predecessor index must be < node index (node " +
                                      std::to_string(j + 1) + ")");
        }
        if (!unique.insert(p).second) {
          throw std::invalid_argument("DagGp: duplicate predecessor (node " +
                                      std::to_string(j + 1) + ")");
        }
      }
    }
  }

  static DagGp from_edge_list(Eigen::MatrixXd locations, const EdgeList& edges, Kernel kernel) {
    auto preds = parse_edge_list(edges, static_cast<int>(locations.rows()));
    return DagGp(std::move(locations), std::move(preds), std::move(kernel));
  }

  const Eigen::MatrixXd& locations() const { return locations_; }
  const std::vector<std::vector<int>>& predecessors() const { return predecessors_; }
  const Kernel& kernel() const { return kernel_; }
  Eigen::Index size() const { return locations_.rows(); }

  int max_predecessors() const {
    std::size_t q = 0;
    for (const auto& p : predecessors_) q = std::max(q, p.size());
    return static_cast<int>(q);
  }

 private:
  Eigen::MatrixXd locations_;
  std::vector<std::vector<int>> predecessors_;
  Kernel kernel_;
};

namespace graph_detail {

// Conditional of node j given its predecessors: weights w = Kpp^-1 kpj and
// variance v = kjj - kpj^T w, all evaluated under K + jitter I so that
// complete predecessor sets reproduce the dense density exactly.
struct NodeConditional {
  Eigen::VectorXd weights;
  double variance = 0.0;
};

inline NodeConditional node_conditional(const DagGp& dag, std::size_t j) {
  const auto& preds = dag.predecessors()[j];
  const auto m = static_cast<Eigen::Index>(preds.size());
  const Kernel& kernel = dag.kernel();
  const double s2 = kernel.sigma * kernel.sigma;
  NodeConditional out;
  if (m == 0) {
    out.variance = s2 + dense_detail::kInitialJitterRel * s2;
    return out;
  }
  Eigen::MatrixXd kpp(m, m);
  Eigen::VectorXd kpj(m);
  const Eigen::VectorXd xj = dag.locations().row(static_cast<Eigen::Index>(j)).transpose();
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::VectorXd xa = dag.locations().row(preds[static_cast<std::size_t>(a)]).transpose();
    kpj[a] = kernel(xa, xj);
    kpp(a, a) = s2;
    for (Eigen::Index b = 0; b < a; ++b) {
      const Eigen::VectorXd xb =
          dag.locations().row(preds[static_cast<std::size_t>(b)]).transpose();
      const double k = kernel(xa, xb);
      kpp(a, b) = k;
      kpp(b, a) = k;
    }
  }
  double rel = dense_detail::kInitialJitterRel;
  while (rel <= dense_detail::kMaxJitterRel * (1.0 + 1e-12)) {
    const double jitter = rel * s2;
    Eigen::MatrixXd work = kpp;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
    if (llt.info() == Eigen::Success) {
      out.weights = llt.solve(kpj);
      out.variance = s2 + jitter - kpj.dot(out.weights);
      if (out.variance > 0.0) return out;
    }
    rel *= dense_detail::kJitterGrowth;
  }
  throw FactorizationError("graph: predecessor covariance not positive definite at node " +
                           std::to_string(j + 1) + " after jitter escalation");
}

inline void check_lengths(const Eigen::VectorXd& f, const Eigen::VectorXd& loc, const DagGp& dag,
                          const char* who) {
  if (f.size() != dag.size() || loc.size() != dag.size()) {
    throw std::invalid_argument(std::string(who) + ": vector length does not match graph size");
  }
}

}  // namespace graph_detail

// Sum over nodes of log N(f_j; m_j, v_j) with conditional means
// m_j = loc_j + w^T (f_P - loc_P).
inline double graph_lpdf(const Eigen::VectorXd& f, const Eigen::VectorXd& loc, const DagGp& dag) {
  graph_detail::check_lengths(f, loc, dag, "graph_lpdf");
  const auto n = static_cast<std::size_t>(dag.size());
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto cond = graph_detail::node_conditional(dag, j);
    const auto& preds = dag.predecessors()[j];
    double mean = loc[static_cast<Eigen::Index>(j)];
    for (std::size_t a = 0; a < preds.size(); ++a) {
      mean += cond.weights[static_cast<Eigen::Index>(a)] * (f[preds[a]] - loc[preds[a]]);
    }
    const double r = f[static_cast<Eigen::Index>(j)] - mean;
    total += -0.5 * std::log(2.0 * std::numbers::pi * cond.variance) -
             0.5 * r * r / cond.variance;
  }
  return total;
}

inline Eigen::VectorXd graph_lpdf_grad_f(const Eigen::VectorXd& f, const Eigen::VectorXd& loc,
                                         const DagGp& dag) {
  graph_detail::check_lengths(f, loc, dag, "graph_lpdf_grad_f");
  const auto n = static_cast<std::size_t>(dag.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dag.size());
  for (std::size_t j = 0; j < n; ++j) {
    const auto cond = graph_detail::node_conditional(dag, j);
    const auto& preds = dag.predecessors()[j];
    double mean = loc[static_cast<Eigen::Index>(j)];
    for (std::size_t a = 0; a < preds.size(); ++a) {
      mean += cond.weights[static_cast<Eigen::Index>(a)] * (f[preds[a]] - loc[preds[a]]);
    }
    const double r = (f[static_cast<Eigen::Index>(j)] - mean) / cond.variance;
    grad[static_cast<Eigen::Index>(j)] -= r;
    for (std::size_t a = 0; a < preds.size(); ++a) {
      grad[preds[a]] += r * cond.weights[static_cast<Eigen::Index>(a)];
    }
  }
  return grad;
}

// Sequential non-centered map f_j = m_j(f_P) + sqrt(v_j) z_j along the
// topological order.
inline Eigen::VectorXd graph_inv_transform(const Eigen::VectorXd& z, const Eigen::VectorXd& loc,
                                           const DagGp& dag) {
  graph_detail::check_lengths(z, loc, dag, "graph_inv_transform");
  const auto n = static_cast<std::size_t>(dag.size());
  Eigen::VectorXd f(dag.size());
  for (std::size_t j = 0; j < n; ++j) {
    const auto cond = graph_detail::node_conditional(dag, j);
    const auto& preds = dag.predecessors()[j];
    double mean = loc[static_cast<Eigen::Index>(j)];
    for (std::size_t a = 0; a < preds.size(); ++a) {
      mean += cond.weights[static_cast<Eigen::Index>(a)] * (f[preds[a]] - loc[preds[a]]);
    }
    f[static_cast<Eigen::Index>(j)] =
        mean + std::sqrt(cond.variance) * z[static_cast<Eigen::Index>(j)];
  }
  return f;
}

inline Eigen::VectorXd graph_whiten(const Eigen::VectorXd& f, const Eigen::VectorXd& loc,
                                    const DagGp& dag) {
  graph_detail::check_lengths(f, loc, dag, "graph_whiten");
  const auto n = static_cast<std::size_t>(dag.size());
  Eigen::VectorXd z(dag.size());
  for (std::size_t j = 0; j < n; ++j) {
    const auto cond = graph_detail::node_conditional(dag, j);
    const auto& preds = dag.predecessors()[j];
    double mean = loc[static_cast<Eigen::Index>(j)];
    for (std::size_t a = 0; a < preds.size(); ++a) {
      mean += cond.weights[static_cast<Eigen::Index>(a)] * (f[preds[a]] - loc[preds[a]]);
    }
    z[static_cast<Eigen::Index>(j)] =
        (f[static_cast<Eigen::Index>(j)] - mean) / std::sqrt(cond.variance);
  }
  return z;
}

// Adjoint of graph_inv_transform: gradient with respect to z of g . f(z).
// The forward map is lower triangular, so the adjoint runs the recursion in
// reverse with accumulated cotangents.
inline Eigen::VectorXd graph_adjoint_inv_transform(const Eigen::VectorXd& g,
                                                   const Eigen::VectorXd& loc, const DagGp& dag) {
  graph_detail::check_lengths(g, loc, dag, "graph_adjoint_inv_transform");
  const auto n = static_cast<std::size_t>(dag.size());
  Eigen::VectorXd bar = g;  // cotangent of f
  Eigen::VectorXd out(dag.size());
  for (std::size_t jj = n; jj-- > 0;) {
    const auto cond = graph_detail::node_conditional(dag, jj);
    const auto& preds = dag.predecessors()[jj];
    const double bj = bar[static_cast<Eigen::Index>(jj)];
    out[static_cast<Eigen::Index>(jj)] = std::sqrt(cond.variance) * bj;
    for (std::size_t a = 0; a < preds.size(); ++a) {
      bar[preds[a]] += cond.weights[static_cast<Eigen::Index>(a)] * bj;
    }
  }
  return out;
}

// Sum of the per-node conditional log standard deviations; the change of
// variables satisfies graph_lpdf(f) = std_normal_lpdf(z) - log_det.
inline double graph_log_det(const DagGp& dag) {
  double total = 0.0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(dag.size()); ++j) {
    total += 0.5 * std::log(graph_detail::node_conditional(dag, j).variance);
  }
  return total;
}

}  // namespace gpscale

#endif  // GPSCALE_GRAPH_HPP
