// Copyright 2026 The TopTwo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toptwo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "toptwo/binary_views.hpp"
#include "toptwo/rng.hpp"

namespace toptwo {
namespace {

int iteration_cap(const SpectralConfig& cfg, Eigen::Index m) {
  if (cfg.power_iters > 0) return cfg.power_iters;
  const double mm = std::max<double>(static_cast<double>(m), 2.0);
  return static_cast<int>(std::ceil(1000.0 * std::log(mm)));
}

double half_density(const ResponseMatrix& half) {
  return half.density();
}

}  // namespace

void validate(const SpectralConfig& cfg) {
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (cfg.s_prime && !(*cfg.s_prime > 0.0 && *cfg.s_prime <= 1.0)) {
    throw std::invalid_argument("s_prime must lie in (0, 1]");
  }
  if (!(cfg.power_tol > 0.0)) throw std::invalid_argument("power_tol must be positive");
  if (cfg.power_iters < 0) throw std::invalid_argument("power_iters must be non-negative");
}

void orient_majority_positive(Eigen::VectorXd& u) {
  const auto positives = (u.array() > 0.0).count();
  const auto negatives = (u.array() < 0.0).count();
  bool flip = negatives > positives;
  if (negatives == positives) {
    const double sum = u.sum();
    if (sum != 0.0) {
      flip = sum < 0.0;
    } else {
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u(i) != 0.0) {
          flip = u(i) < 0.0;
          break;
        }
      }
    }
  }
  if (flip) u = -u;
}

SingularVector leading_left_singular_vector(const Eigen::MatrixXd& X, const SpectralConfig& cfg) {
  if (X.size() == 0 || X.squaredNorm() == 0.0) {
    throw std::invalid_argument("leading_left_singular_vector: matrix is zero");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  const int cap = iteration_cap(cfg, m);

  StreamRng rng(cfg.seed, Stream::kPowerStart, static_cast<std::uint64_t>(n),
                static_cast<std::uint64_t>(m));
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.uniform() - 0.5;
  u.normalize();

  // Gram-matrix iteration when workers <= tasks.
  const bool use_gram = n <= m;
  Eigen::MatrixXd gram;
  if (use_gram) gram.noalias() = X * X.transpose();

  SingularVector out;
  Eigen::VectorXd next(n);
  for (int it = 1; it <= cap; ++it) {
    if (use_gram) {
      next.noalias() = gram * u;
    } else {
      next.noalias() = X * (X.transpose() * u);
    }
    const double norm = next.norm();
    out.iterations = it;
    if (norm == 0.0) break;
    next /= norm;
    const double step = (next - u).norm();
    u.swap(next);
    if (step < cfg.power_tol) {
      out.converged = true;
      break;
    }
  }
  orient_majority_positive(u);
  out.u = std::move(u);
  return out;
}

Eigen::VectorXd trim(const Eigen::VectorXd& u, double eta, int n) {
  if (!(eta > 0.0)) throw std::invalid_argument("trim: eta must be positive");
  const double threshold = 2.0 / (eta * std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd out = u;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) > threshold) out(i) = 0.0;
  }
  return out;
}

Eigen::VectorXd project(const Eigen::MatrixXd& Y, const Eigen::VectorXd& u_trimmed,
                        double s_prime) {
  if (Y.rows() != u_trimmed.size()) throw std::invalid_argument("project: dimension mismatch");
  if (!(s_prime > 0.0)) throw std::invalid_argument("project: s_prime must be positive");
  return (Y.transpose() * u_trimmed) / s_prime;
}

std::pair<ResponseMatrix, ResponseMatrix> split_equal(const ResponseMatrix& responses,
                                                      std::uint64_t seed) {
  ResponseMatrix first = responses.empty_like();
  ResponseMatrix second = responses.empty_like();
  for (int i = 0; i < responses.workers(); ++i) {
    for (int j = 0; j < responses.tasks(); ++j) {
      const Label a = responses.at(i, j);
      if (a == kUnobserved) continue;
      StreamRng rng(seed, Stream::kInnerSplit, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(j));
      (rng.uniform() < 0.5 ? first : second).set(i, j, a);
    }
  }
  return {std::move(first), std::move(second)};
}

TopTwoPairs read_top_two(const ProjectionStack& v) {
  const auto m = v.rows();
  const int K = static_cast<int>(v.cols()) - 1;
  if (K < 2) throw std::invalid_argument("read_top_two: need at least two labels");
  TopTwoPairs out;
  out.g.resize(static_cast<std::size_t>(m));
  out.h.resize(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    Label g = 1;
    double g_val = v(j, 1) - v(j, 0);
    for (int k = 2; k <= K; ++k) {
      const double dv = v(j, k) - v(j, k - 1);
      if (dv < g_val) {
        g = k;
        g_val = dv;
      }
    }
    Label h = 0;
    double h_val = 0.0;
    for (int k = 1; k <= K; ++k) {
      if (k == g) continue;
      const double dv = v(j, k) - v(j, k - 1);
      if (h == 0 || dv < h_val) {
        h = k;
        h_val = dv;
      }
    }
    out.g[static_cast<std::size_t>(j)] = g;
    out.h[static_cast<std::size_t>(j)] = h;
  }
  return out;
}

ConfusionEstimate estimate_q(const ProjectionStack& v, const std::vector<Label>& g_hat,
                             const std::vector<Label>& h_hat, const std::vector<bool>& excluded) {
  const auto m = static_cast<std::size_t>(v.rows());
  const int K = static_cast<int>(v.cols()) - 1;
  if (K < 3) throw std::invalid_argument("estimate_q: needs K >= 3");
  if (g_hat.size() != m || h_hat.size() != m) {
    throw std::invalid_argument("estimate_q: label vectors do not match the task count");
  }
  if (!excluded.empty() && excluded.size() != m) {
    throw std::invalid_argument("estimate_q: exclusion mask does not match the task count");
  }

  ConfusionEstimate out;
  out.l_per_task.resize(m);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    double rest = 0.0;
    for (int k = 1; k <= K; ++k) {
      if (k == g_hat[j] || k == h_hat[j]) continue;
      rest += v(row, k) - v(row, k - 1);
    }
    out.l_per_task[j] = static_cast<double>(K) / static_cast<double>(K - 2) * rest;
    if (excluded.empty() || !excluded[j]) {
      total += out.l_per_task[j];
      ++counted;
    }
  }
  out.l = counted > 0 ? total / static_cast<double>(counted) : 0.0;
  out.degenerate = counted == 0 || !(out.l > 0.0);

  out.q_hat_raw.resize(m);
  out.q_hat.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    const int g = g_hat[j];
    const double dv = v(row, g) - v(row, g - 1);
    const double raw = 1.0 / K - dv / out.l;
    out.q_hat_raw[j] = raw;
    out.q_hat[j] = out.degenerate ? kConfusionFloor : std::clamp(raw, kConfusionFloor, 1.0);
  }
  return out;
}

SpectralProjections spectral_projections(const std::vector<Eigen::MatrixXd>& x_views,
                                         const std::vector<Eigen::MatrixXd>& y_views,
                                         double s_prime_x, double s_prime_y,
                                         const SpectralConfig& cfg) {
  validate(cfg);
  if (x_views.empty() || x_views.size() != y_views.size()) {
    throw std::invalid_argument("spectral_projections: need one X and one Y view per threshold");
  }
  const int K = static_cast<int>(x_views.size()) + 1;
  const auto n = x_views.front().rows();
  const auto m = x_views.front().cols();
  for (std::size_t t = 0; t < x_views.size(); ++t) {
    if (x_views[t].rows() != n || x_views[t].cols() != m || y_views[t].rows() != n ||
        y_views[t].cols() != m) {
      throw std::invalid_argument("spectral_projections: views have inconsistent shapes");
    }
  }
  if (!(s_prime_x > 0.0) || !(s_prime_y > 0.0)) {
    throw std::invalid_argument("spectral_projections: effective sampling rates must be positive");
  }

  SpectralProjections out;
  out.v = ProjectionStack::Zero(m, K + 1);
  out.unobserved.assign(static_cast<std::size_t>(m), false);
  out.s_prime_x = s_prime_x;
  out.s_prime_y = s_prime_y;
  for (int k = 1; k < K; ++k) {
    const auto& X = x_views[static_cast<std::size_t>(k - 1)];
    const auto& Y = y_views[static_cast<std::size_t>(k - 1)];
    Eigen::VectorXd u_trimmed = Eigen::VectorXd::Zero(n);
    bool converged = false;
    if (X.squaredNorm() > 0.0) {
      SpectralConfig per_threshold = cfg;
      per_threshold.seed = derive_seed(cfg.seed, Stream::kPowerStart, static_cast<std::uint64_t>(k));
      const SingularVector sv = leading_left_singular_vector(X, per_threshold);
      converged = sv.converged;
      u_trimmed = trim(sv.u, cfg.eta, static_cast<int>(n));
    }
    out.v.col(k) = project(Y, u_trimmed, s_prime_y);
    out.trimmed_norms.push_back(u_trimmed.norm());
    out.u_trimmed.push_back(std::move(u_trimmed));
    out.converged.push_back(converged);
  }
  return out;
}

SpectralProjections spectral_projections(const ResponseMatrix& responses,
                                         const SpectralConfig& cfg) {
  validate(cfg);
  const int K = responses.choices();
  if (K < 3) throw std::invalid_argument("spectral stage needs K >= 3");
  if (responses.observed_count() == 0) {
    throw std::invalid_argument("spectral stage needs at least one observed response");
  }
  auto [first, second] = split_equal(responses, derive_seed(cfg.seed, Stream::kInnerSplit));
  // Empty halves get rate 1 / (n m).
  const double floor_rate = 1.0 / static_cast<double>(responses.workers() * responses.tasks());
  const double sx = cfg.s_prime ? *cfg.s_prime : std::max(half_density(first), floor_rate);
  const double sy = cfg.s_prime ? *cfg.s_prime : std::max(half_density(second), floor_rate);

  std::vector<Eigen::MatrixXd> x_views;
  std::vector<Eigen::MatrixXd> y_views;
  x_views.reserve(static_cast<std::size_t>(K - 1));
  y_views.reserve(static_cast<std::size_t>(K - 1));
  for (int k = 1; k < K; ++k) {
    x_views.push_back(center(binarize(first, k), sx, K, k));
    y_views.push_back(center(binarize(second, k), sy, K, k));
  }
  SpectralProjections out = spectral_projections(x_views, y_views, sx, sy, cfg);
  for (int j = 0; j < responses.tasks(); ++j) {
    out.unobserved[static_cast<std::size_t>(j)] = responses.observed_in_task(j) == 0;
  }
  return out;
}

namespace {

SpectralEstimate readout(SpectralProjections proj) {
  SpectralEstimate est;
  const TopTwoPairs pairs = read_top_two(proj.v);
  est.g_hat = pairs.g;
  est.h_hat = pairs.h;
  ConfusionEstimate conf = estimate_q(proj.v, est.g_hat, est.h_hat, proj.unobserved);
  est.q_hat = std::move(conf.q_hat);
  est.q_hat_raw = std::move(conf.q_hat_raw);
  est.l = conf.l;
  est.degenerate = conf.degenerate;
  for (std::size_t j = 0; j < proj.unobserved.size(); ++j) {
    if (!proj.unobserved[j]) continue;
    est.g_hat[j] = 1;
    est.h_hat[j] = 2;
    est.q_hat[j] = kConfusionFloor;
  }
  est.v = std::move(proj.v);
  est.u_trimmed = std::move(proj.u_trimmed);
  est.trimmed_norms = std::move(proj.trimmed_norms);
  est.converged = std::move(proj.converged);
  est.unobserved = std::move(proj.unobserved);
  est.s_prime = proj.s_prime_y;
  return est;
}

}  // namespace

SpectralEstimate toptwo1(const ResponseMatrix& responses, const SpectralConfig& cfg) {
  return readout(spectral_projections(responses, cfg));
}

SpectralEstimate toptwo1_from_centered(const std::vector<Eigen::MatrixXd>& x_views,
                                       const std::vector<Eigen::MatrixXd>& y_views,
                                       double s_prime, const SpectralConfig& cfg) {
  return readout(spectral_projections(x_views, y_views, s_prime, s_prime, cfg));
}

}  // namespace toptwo
