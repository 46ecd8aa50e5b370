#pragma once

// Variational Bayesian fit of a 1-D Gaussian mixture to one pixel's history.
//
// Model: Dirichlet(lambda0) over the mixing weights, Gaussian-Gamma over each
// (mean, precision) pair. The posterior is mean-field:
//   q(Z) q(w) prod_k q(mu_k | tau_k) q(tau_k)
// with q(w) = Dir(lambda), q(mu_k|tau_k) = N(m_k, (beta_k tau_k)^-1) and
// q(tau_k) = Gam(a_k, b_k). EM alternates responsibilities (e_step) and the
// closed-form factor updates (m_step), starting from a k-means++ partition.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "thermobg/mixture.hpp"
#include "thermobg/rng.hpp"
#include "thermobg/special.hpp"

namespace thermobg {

struct Priors {
  double lambda0 = 1.0;
  double m0 = 0.0;
  double beta0 = 1.0;
  double a0 = 1e-3;
  double b0 = 1e-3;
  /// Set when the data had zero variance and the floor was substituted.
  bool degenerate = false;
};

/// lambda0 = 1, a0 = b0 = 1e-3, m0 = mean(data), beta0 = b0 / (a0 v0) with v0
/// the population variance of the data (floored at kVarianceFloor).
inline Priors default_priors(std::span<const double> data) {
  if (data.empty()) throw std::invalid_argument("default_priors: empty data");
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var /= n;

  Priors p;
  p.m0 = mean;
  if (!(var > kVarianceFloor)) {
    p.degenerate = !(var > 0.0);
    var = std::max(var, kVarianceFloor);
  }
  p.beta0 = p.b0 / (p.a0 * var);
  return p;
}

/// Row-major N x K matrix of responsibilities r_nk.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t n, std::size_t k) { return data_[n * cols_ + k]; }
  double operator()(std::size_t n, std::size_t k) const { return data_[n * cols_ + k]; }
  std::span<const double> row(std::size_t n) const { return {data_.data() + n * cols_, cols_}; }

  double column_sum(std::size_t k) const {
    double s = 0.0;
    for (std::size_t n = 0; n < rows_; ++n) s += (*this)(n, k);
    return s;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct VariationalPosterior {
  std::vector<double> lambda, m, beta, a, b;
  /// Statistics the hyperparameters were computed from: N_k, weighted
  /// centroid xbar_k and weighted scatter sigma_k (a variance, not N_k sigma_k).
  std::vector<double> nk, xbar, sigma;
  Responsibilities resp;

  std::size_t components() const { return lambda.size(); }

  double lambda_sum() const {
    double s = 0.0;
    for (double l : lambda) s += l;
    return s;
  }
  double expected_weight(std::size_t k) const { return lambda[k] / lambda_sum(); }
  double expected_precision(std::size_t k) const { return a[k] / b[k]; }
};

namespace detail {

inline constexpr double kEmptyComponent = 1e-12;

struct FactorParams {
  double lambda, beta, m, a, b;
};

/// Closed-form factor update from one component's statistics.
inline FactorParams factor_params(double nk, double xbar, double sigma, const Priors& p) {
  if (nk < kEmptyComponent) return {p.lambda0 + nk, p.beta0, p.m0, p.a0, p.b0};
  FactorParams f{};
  f.lambda = nk + p.lambda0;
  f.beta = p.beta0 + nk;
  f.m = (p.beta0 * p.m0 + nk * xbar) / f.beta;
  f.a = p.a0 + 0.5 * nk;
  const double dev = xbar - p.m0;
  f.b = p.b0 + 0.5 * (nk * sigma + p.beta0 * nk * dev * dev / (p.beta0 + nk));
  return f;
}

}  // namespace detail

/// M-step: N_k, xbar_k, sigma_k from the responsibilities, then the Dirichlet,
/// Gaussian and Gamma factor updates. Components with N_k < 1e-12 keep the
/// prior values.
inline VariationalPosterior m_step(const Responsibilities& resp, std::span<const double> data,
                                   const Priors& priors) {
  if (resp.rows() != data.size()) throw std::invalid_argument("m_step: responsibilities/data size mismatch");
  const std::size_t n_rows = resp.rows();
  const std::size_t k_cols = resp.cols();
  VariationalPosterior post;
  post.resp = resp;
  post.nk.assign(k_cols, 0.0);
  post.xbar.assign(k_cols, priors.m0);
  post.sigma.assign(k_cols, 0.0);
  for (auto* v : {&post.lambda, &post.m, &post.beta, &post.a, &post.b}) v->resize(k_cols);

  for (std::size_t k = 0; k < k_cols; ++k) {
    double nk = 0.0;
    double s1 = 0.0;
    for (std::size_t n = 0; n < n_rows; ++n) {
      nk += resp(n, k);
      s1 += resp(n, k) * data[n];
    }
    post.nk[k] = nk;
    if (nk >= detail::kEmptyComponent) {
      const double xbar = s1 / nk;
      double s2 = 0.0;
      for (std::size_t n = 0; n < n_rows; ++n) {
        const double d = data[n] - xbar;
        s2 += resp(n, k) * d * d;
      }
      post.xbar[k] = xbar;
      post.sigma[k] = s2 / nk;
    }
    const auto f = detail::factor_params(nk, post.xbar[k], post.sigma[k], priors);
    post.lambda[k] = f.lambda;
    post.beta[k] = f.beta;
    post.m[k] = f.m;
    post.a[k] = f.a;
    post.b[k] = f.b;
  }
  return post;
}

/// E-step: r_nk proportional to w~_k tau~_k^(1/2) exp(-a_k/(2 b_k) (x_n - m_k)^2 - 1/(2 beta_k)),
/// with ln w~_k = Psi(lambda_k) - Psi(sum lambda) and ln tau~_k = Psi(a_k) - ln b_k.
/// Evaluated in the log domain with per-row max subtraction.
inline Responsibilities e_step(const VariationalPosterior& post, std::span<const double> data) {
  const std::size_t k_cols = post.components();
  if (k_cols == 0) throw std::invalid_argument("e_step: no components");
  std::vector<double> log_w(k_cols), half_log_tau(k_cols), half_tau(k_cols), offset(k_cols);
  const double psi_sum = digamma(post.lambda_sum());
  for (std::size_t k = 0; k < k_cols; ++k) {
    log_w[k] = digamma(post.lambda[k]) - psi_sum;
    half_log_tau[k] = 0.5 * (digamma(post.a[k]) - std::log(post.b[k]));
    half_tau[k] = 0.5 * post.a[k] / post.b[k];
    offset[k] = log_w[k] + half_log_tau[k] - 0.5 / post.beta[k];
  }

  Responsibilities r(data.size(), k_cols);
  std::vector<double> row(k_cols);
  for (std::size_t n = 0; n < data.size(); ++n) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_cols; ++k) {
      const double d = data[n] - post.m[k];
      row[k] = offset[k] - half_tau[k] * d * d;
      best = std::max(best, row[k]);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < k_cols; ++k) {
      row[k] = std::exp(row[k] - best);
      sum += row[k];
    }
    // the max term contributes exp(0) = 1
    if (!(sum >= 1.0) || !std::isfinite(sum)) throw std::logic_error("e_step: degenerate responsibility row");
    for (std::size_t k = 0; k < k_cols; ++k) r(n, k) = row[k] / sum;
  }
  return r;
}

/// Mean-field evidence lower bound for the current posterior, evaluated with
/// the responsibilities stored in `post`. Valid for any posterior; after an
/// m_step it is the quantity EM increases monotonically.
inline double elbo(const VariationalPosterior& post, std::span<const double> data, const Priors& p) {
  const std::size_t k_cols = post.components();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const double lambda_sum = post.lambda_sum();
  const double psi_sum = digamma(lambda_sum);

  double bound = 0.0;
  // ln C(lambda0 1_K) - ln C(lambda)
  bound += std::lgamma(static_cast<double>(k_cols) * p.lambda0) -
           static_cast<double>(k_cols) * std::lgamma(p.lambda0);
  bound -= std::lgamma(lambda_sum);

  for (std::size_t k = 0; k < k_cols; ++k) {
    const double log_tau = digamma(post.a[k]) - std::log(post.b[k]);
    const double tau = post.a[k] / post.b[k];
    const double log_w = digamma(post.lambda[k]) - psi_sum;

    double nk = 0.0;
    double sq = 0.0;
    double ent = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) {
      const double r = post.resp(n, k);
      const double d = data[n] - post.m[k];
      nk += r;
      sq += r * d * d;
      if (r > 0.0) ent += r * std::log(r);
    }

    // E[ln p(X | Z, mu, tau)]
    bound += 0.5 * (nk * (log_tau - log_2pi - 1.0 / post.beta[k]) - tau * sq);
    // E[ln p(Z | w)] + E[ln p(w)] - E[ln q(w)], Dirichlet normalizers handled above
    bound += (nk + p.lambda0 - post.lambda[k]) * log_w + std::lgamma(post.lambda[k]);
    // E[ln p(mu, tau)]
    const double dm = post.m[k] - p.m0;
    bound += 0.5 * (std::log(p.beta0) - log_2pi + log_tau - p.beta0 / post.beta[k] - p.beta0 * tau * dm * dm);
    bound += p.a0 * std::log(p.b0) - std::lgamma(p.a0) + (p.a0 - 1.0) * log_tau - p.b0 * tau;
    // - E[ln q(Z)]
    bound -= ent;
    // - E[ln q(mu, tau)]
    bound -= 0.5 * (std::log(post.beta[k]) - log_2pi + log_tau - 1.0);
    bound -= post.a[k] * std::log(post.b[k]) - std::lgamma(post.a[k]) + (post.a[k] - 1.0) * log_tau - post.a[k];
  }
  return bound;
}

struct KMeansInit {
  /// Cluster index per sample after empty clusters were dropped.
  std::vector<std::size_t> assignment;
  std::vector<double> centers;
  std::vector<std::size_t> counts;
  /// w_k(0) = count_k / N
  std::vector<double> weights;
  /// tau_k(0) = 1 / cluster variance (variance floored)
  std::vector<double> precisions;
  /// m_step of the one-hot partition: lambda_k(0) = N w_k(0) + lambda0.
  VariationalPosterior posterior;
};

/// k-means++ seeding (D^2 sampling) followed by Lloyd iterations. Seeding stops
/// early when every sample coincides with a chosen center; empty clusters are
/// dropped. Deterministic for a given seed.
inline KMeansInit kmeanspp_init(std::span<const double> data, std::size_t k_max, std::uint64_t seed,
                                const Priors& priors) {
  const std::size_t n_rows = data.size();
  if (k_max < 1 || n_rows < k_max) throw std::invalid_argument("kmeanspp_init: require N >= k_max >= 1");
  Rng rng(seed);

  std::vector<double> centers{data[rng.below(n_rows)]};
  std::vector<double> d2(n_rows);
  for (std::size_t n = 0; n < n_rows; ++n) d2[n] = (data[n] - centers[0]) * (data[n] - centers[0]);
  while (centers.size() < k_max) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (!(total > 0.0)) break;
    const double u = rng.uniform() * total;
    std::size_t pick = n_rows;
    double acc = 0.0;
    for (std::size_t n = 0; n < n_rows; ++n) {
      if (d2[n] <= 0.0) continue;
      acc += d2[n];
      pick = n;
      if (acc > u) break;
    }
    centers.push_back(data[pick]);
    for (std::size_t n = 0; n < n_rows; ++n) {
      const double d = data[n] - centers.back();
      d2[n] = std::min(d2[n], d * d);
    }
  }

  const std::size_t k_init = centers.size();
  std::vector<std::size_t> assign(n_rows, k_init);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t n = 0; n < n_rows; ++n) {
      std::size_t best = 0;
      double best_d = std::abs(data[n] - centers[0]);
      for (std::size_t k = 1; k < k_init; ++k) {
        const double d = std::abs(data[n] - centers[k]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (assign[n] != best) {
        assign[n] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(k_init, 0.0);
    std::vector<std::size_t> cnt(k_init, 0);
    for (std::size_t n = 0; n < n_rows; ++n) {
      sum[assign[n]] += data[n];
      ++cnt[assign[n]];
    }
    for (std::size_t k = 0; k < k_init; ++k) {
      if (cnt[k] > 0) centers[k] = sum[k] / static_cast<double>(cnt[k]);
    }
  }

  KMeansInit out;
  std::vector<std::size_t> remap(k_init, k_init);
  std::vector<std::size_t> cnt(k_init, 0);
  for (std::size_t a : assign) ++cnt[a];
  for (std::size_t k = 0; k < k_init; ++k) {
    if (cnt[k] == 0) continue;
    remap[k] = out.centers.size();
    out.centers.push_back(centers[k]);
    out.counts.push_back(cnt[k]);
  }
  const std::size_t k_out = out.centers.size();
  out.assignment.resize(n_rows);
  std::vector<double> var(k_out, 0.0);
  for (std::size_t n = 0; n < n_rows; ++n) {
    const std::size_t k = remap[assign[n]];
    out.assignment[n] = k;
    const double d = data[n] - out.centers[k];
    var[k] += d * d;
  }
  Responsibilities resp(n_rows, k_out);
  for (std::size_t n = 0; n < n_rows; ++n) resp(n, out.assignment[n]) = 1.0;
  for (std::size_t k = 0; k < k_out; ++k) {
    const double c = static_cast<double>(out.counts[k]);
    out.weights.push_back(c / static_cast<double>(n_rows));
    out.precisions.push_back(1.0 / std::max(var[k] / c, kVarianceFloor));
  }
  out.posterior = m_step(resp, data, priors);
  return out;
}

struct FitConfig {
  std::size_t k_max = 50;
  std::size_t history_len = 100;
  int max_iters = 100;
  double rel_tol = 1e-5;
  std::uint64_t rng_seed = 0;
  int intensity_levels = 256;
  /// Greedily merge mean-adjacent components while the bound increases.
  bool merge_components = true;

  void validate() const {
    if (history_len < 1) throw std::invalid_argument("FitConfig: history_len must be positive");
    if (k_max < 1 || k_max > history_len) throw std::invalid_argument("FitConfig: require 1 <= k_max <= history_len");
    if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be positive");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("FitConfig: rel_tol must be positive");
    if (intensity_levels < 2) throw std::invalid_argument("FitConfig: intensity_levels must be >= 2");
  }
};

struct FitResult {
  MixtureModel model;
  bool converged = false;
  /// EM iterations (one e_step + m_step each), summed over all rounds.
  int iterations = 0;
  int merges = 0;
  std::size_t initial_components = 0;
  /// Bound after the initial partition, every m_step and every accepted merge.
  std::vector<double> elbo_trace;
  Priors priors;
};

namespace detail {

/// Sufficient statistics of one responsibility column, enough to evaluate that
/// component's share of the bound after an m_step.
struct ColumnStats {
  double nk = 0.0;
  double xbar = 0.0;
  double sigma = 0.0;
  double r_log_r = 0.0;
  std::vector<double> column;
};

inline ColumnStats column_stats(std::vector<double> column, std::span<const double> data) {
  ColumnStats s;
  double s1 = 0.0;
  for (std::size_t n = 0; n < column.size(); ++n) {
    s.nk += column[n];
    s1 += column[n] * data[n];
    if (column[n] > 0.0) s.r_log_r += column[n] * std::log(column[n]);
  }
  if (s.nk >= kEmptyComponent) {
    s.xbar = s1 / s.nk;
    double s2 = 0.0;
    for (std::size_t n = 0; n < column.size(); ++n) s2 += column[n] * (data[n] - s.xbar) * (data[n] - s.xbar);
    s.sigma = s2 / s.nk;
  }
  s.column = std::move(column);
  return s;
}

/// Component-local part of the bound when the factors are at their m_step
/// optimum for this column (the Dirichlet cross terms cancel there).
inline double component_bound(const ColumnStats& s, const Priors& p) {
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const double xbar = s.nk >= kEmptyComponent ? s.xbar : p.m0;
  const auto f = factor_params(s.nk, xbar, s.sigma, p);
  const double log_tau = digamma(f.a) - std::log(f.b);
  const double tau = f.a / f.b;
  const double dx = xbar - f.m;
  const double sq = s.nk * (s.sigma + dx * dx);
  const double dm = f.m - p.m0;
  double h = 0.5 * (s.nk * (log_tau - log_2pi - 1.0 / f.beta) - tau * sq);
  h += std::lgamma(f.lambda);
  h += 0.5 * (std::log(p.beta0) - log_2pi + log_tau - p.beta0 / f.beta - p.beta0 * tau * dm * dm);
  h += p.a0 * std::log(p.b0) - std::lgamma(p.a0) + (p.a0 - 1.0) * log_tau - p.b0 * tau;
  h -= s.r_log_r;
  h -= 0.5 * (std::log(f.beta) - log_2pi + log_tau - 1.0);
  h -= f.a * std::log(f.b) - std::lgamma(f.a) + (f.a - 1.0) * log_tau - f.a;
  return h;
}

/// Part of the bound that depends only on K and N.
inline double global_bound(std::size_t k, double n, const Priors& p) {
  const double kd = static_cast<double>(k);
  return std::lgamma(kd * p.lambda0) - kd * std::lgamma(p.lambda0) - std::lgamma(n + kd * p.lambda0);
}

inline ColumnStats merged(const ColumnStats& x, const ColumnStats& y, std::span<const double> data) {
  std::vector<double> col(x.column.size());
  for (std::size_t n = 0; n < col.size(); ++n) col[n] = x.column[n] + y.column[n];
  return column_stats(std::move(col), data);
}

/// Greedy merging of components adjacent in centroid order. Each step takes
/// the pair whose merge (followed by an m_step) raises the bound the most and
/// stops when no merge raises it. Returns the number of merges performed.
inline int merge_adjacent(VariationalPosterior& post, std::span<const double> data, const Priors& priors) {
  const std::size_t k_cols = post.components();
  if (k_cols < 2) return 0;
  const double n_total = static_cast<double>(data.size());

  std::vector<std::size_t> order(k_cols);
  for (std::size_t k = 0; k < k_cols; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const double ci = post.nk[i] >= kEmptyComponent ? post.xbar[i] : post.m[i];
    const double cj = post.nk[j] >= kEmptyComponent ? post.xbar[j] : post.m[j];
    return ci < cj;
  });

  std::vector<ColumnStats> comps;
  comps.reserve(k_cols);
  for (std::size_t k : order) {
    std::vector<double> col(data.size());
    for (std::size_t n = 0; n < data.size(); ++n) col[n] = post.resp(n, k);
    comps.push_back(column_stats(std::move(col), data));
  }
  std::vector<double> local(k_cols);
  for (std::size_t i = 0; i < k_cols; ++i) local[i] = component_bound(comps[i], priors);

  // gain[i]: local change from merging comps[i] and comps[i + 1]
  std::vector<ColumnStats> cand(k_cols - 1);
  std::vector<double> gain(k_cols - 1);
  auto evaluate = [&](std::size_t i) {
    cand[i] = merged(comps[i], comps[i + 1], data);
    gain[i] = component_bound(cand[i], priors) - local[i] - local[i + 1];
  };
  for (std::size_t i = 0; i + 1 < k_cols; ++i) evaluate(i);

  int merges = 0;
  while (comps.size() > 1) {
    const std::size_t k = comps.size();
    const std::size_t best = static_cast<std::size_t>(std::max_element(gain.begin(), gain.end()) - gain.begin());
    const double delta = gain[best] + global_bound(k - 1, n_total, priors) - global_bound(k, n_total, priors);
    if (!(delta > 0.0)) break;

    comps[best] = std::move(cand[best]);
    local[best] = component_bound(comps[best], priors);
    comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    local.erase(local.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(best));
    gain.erase(gain.begin() + static_cast<std::ptrdiff_t>(best));
    if (best > 0) evaluate(best - 1);
    if (best + 1 < comps.size()) evaluate(best);
    ++merges;
  }
  if (merges == 0) return 0;

  Responsibilities resp(data.size(), comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    for (std::size_t n = 0; n < data.size(); ++n) resp(n, k) = comps[k].column[n];
  }
  post = m_step(resp, data, priors);
  return merges;
}

inline double max_relative_change(const VariationalPosterior& prev, const VariationalPosterior& next,
                                  double min_weight) {
  double change = 0.0;
  const double prev_sum = prev.lambda_sum();
  const double next_sum = next.lambda_sum();
  for (std::size_t k = 0; k < prev.components(); ++k) {
    change = std::max(change, std::abs(next.m[k] - prev.m[k]) / std::max(std::abs(prev.m[k]), 1.0));
    const double w_prev = prev.lambda[k] / prev_sum;
    const double w_next = next.lambda[k] / next_sum;
    change = std::max(change, std::abs(w_next - w_prev) / std::max(w_prev, min_weight));
  }
  return change;
}

}  // namespace detail

/// Exports the posterior as a point-estimate mixture: w_k = lambda_k / sum
/// lambda, mu_k = m_k, sigma_k^2 = b_k / a_k. Components below 1/N are pruned.
inline MixtureModel export_model(const VariationalPosterior& post, std::size_t history_len, int intensity_levels) {
  MixtureModel model;
  model.history_len = static_cast<int>(history_len);
  model.intensity_levels = intensity_levels;
  for (std::size_t k = 0; k < post.components(); ++k) {
    model.components.push_back({post.expected_weight(k), post.m[k], std::max(post.b[k] / post.a[k], kVarianceFloor)});
  }
  prune_and_normalize(model);
  return model;
}

/// Fits a mixture with automatically selected K to N = cfg.history_len samples.
inline FitResult fit(std::span<const double> data, const FitConfig& cfg) {
  cfg.validate();
  if (data.size() != cfg.history_len) throw std::invalid_argument("fit: data length must equal history_len");
  for (double x : data) {
    if (!std::isfinite(x)) throw std::invalid_argument("fit: non-finite sample");
  }

  FitResult result;
  result.priors = default_priors(data);
  const Priors& priors = result.priors;
  auto init = kmeanspp_init(data, cfg.k_max, cfg.rng_seed, priors);
  result.initial_components = init.posterior.components();
  VariationalPosterior post = std::move(init.posterior);
  result.elbo_trace.push_back(elbo(post, data, priors));

  const double min_weight = 1.0 / static_cast<double>(cfg.history_len);
  auto merge_round = [&] {
    const int merged = detail::merge_adjacent(post, data, priors);
    if (merged > 0) {
      result.merges += merged;
      result.elbo_trace.push_back(elbo(post, data, priors));
    }
    return merged;
  };

  if (cfg.merge_components) merge_round();
  while (true) {
    bool converged = false;
    while (result.iterations < cfg.max_iters) {
      auto next = m_step(e_step(post, data), data, priors);
      ++result.iterations;
      result.elbo_trace.push_back(elbo(next, data, priors));
      const double change = detail::max_relative_change(post, next, min_weight);
      post = std::move(next);
      if (change < cfg.rel_tol) {
        converged = true;
        break;
      }
    }
    result.converged = converged;
    if (!converged || !cfg.merge_components || merge_round() == 0) break;
  }

  result.model = export_model(post, cfg.history_len, cfg.intensity_levels);
  return result;
}

}  // namespace thermobg
