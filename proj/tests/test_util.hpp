#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "tergmix/common.hpp"
#include "tergmix/models.hpp"
#include "tergmix/netseries.hpp"

namespace testutil {

// Erdos-Renyi-style independent snapshots; enough structure for invariants.
inline tergmix::NetworkSeries random_series(int n, int T, double density, std::uint64_t seed) {
  tergmix::Rng rng(tergmix::mix64(seed));
  tergmix::NetworkSeries series;
  series.snapshots.assign(static_cast<std::size_t>(T) + 1, tergmix::Snapshot(n));
  for (auto& snap : series.snapshots) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.bernoulli(density)) snap.add_edge(i, j);
      }
    }
    snap.finalize();
  }
  return series;
}

inline Eigen::MatrixXd random_simplex_rows(int n, int K, tergmix::Rng& rng) {
  Eigen::MatrixXd gamma(n, K);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      gamma(i, k) = 0.05 + rng.uniform01();
      sum += gamma(i, k);
    }
    gamma.row(i) /= sum;
  }
  return gamma;
}

inline tergmix::Params random_params(const tergmix::ModelSpec& spec, tergmix::Rng& rng,
                                     double scale = 1.0) {
  tergmix::Params params;
  params.pi.resize(spec.K);
  double sum = 0.0;
  for (int k = 0; k < spec.K; ++k) {
    params.pi(k) = 0.2 + rng.uniform01();
    sum += params.pi(k);
  }
  params.pi /= sum;
  params.theta.resize(spec.K, spec.p());
  for (int k = 0; k < spec.K; ++k) {
    for (int c = 0; c < spec.p(); ++c) params.theta(k, c) = scale * (2.0 * rng.uniform01() - 1.0);
  }
  return params;
}

// Transition log-probability of the whole snapshot given hard labels z
// (1-based), summed per dyad.
inline double transition_logprob_given_z(const tergmix::Snapshot& prev,
                                         const tergmix::Snapshot& cur,
                                         const tergmix::ModelSpec& spec,
                                         const Eigen::MatrixXd& theta,
                                         const std::vector<int>& z) {
  double acc = 0.0;
  const int n = prev.node_count();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      acc += tergmix::edge_transition_logprob(
          spec, theta.row(z[static_cast<std::size_t>(i)] - 1),
          theta.row(z[static_cast<std::size_t>(j)] - 1), prev.has_edge(i, j) ? 1 : 0,
          cur.has_edge(i, j) ? 1 : 0);
    }
  }
  return acc;
}

// Exact mixture log-likelihood by brute-force summation over all K^n label
// vectors, feasible for tiny n.
inline double exact_loglik_bruteforce(const tergmix::NetworkSeries& series,
                                      const tergmix::ModelSpec& spec,
                                      const tergmix::Params& params) {
  const int n = series.node_count();
  const int K = spec.K;
  std::vector<int> z(static_cast<std::size_t>(n), 1);
  double total = 0.0;
  for (int t = 1; t <= series.transitions(); ++t) {
    double mix = 0.0;
    std::fill(z.begin(), z.end(), 1);
    for (;;) {
      double weight = 1.0;
      for (int i = 0; i < n; ++i) weight *= params.pi(z[static_cast<std::size_t>(i)] - 1);
      mix += weight * std::exp(transition_logprob_given_z(
                          series.snapshots[static_cast<std::size_t>(t) - 1],
                          series.snapshots[static_cast<std::size_t>(t)], spec, params.theta, z));
      int pos = 0;
      while (pos < n && z[static_cast<std::size_t>(pos)] == K) {
        z[static_cast<std::size_t>(pos)] = 1;
        ++pos;
      }
      if (pos == n) break;
      ++z[static_cast<std::size_t>(pos)];
    }
    total += std::log(mix);
  }
  return total;
}

inline double qp_objective(const Eigen::VectorXd& A, const Eigen::VectorXd& B,
                           const Eigen::VectorXd& g) {
  double acc = 0.0;
  for (int k = 0; k < A.size(); ++k) acc += A(k) * g(k) * g(k) + B(k) * g(k);
  return acc;
}

// Grid oracle for K = 2: full sweep of gamma_1 at the given step.
inline Eigen::VectorXd grid_qp_k2(const Eigen::VectorXd& A, const Eigen::VectorXd& B,
                                  double step) {
  Eigen::VectorXd best(2), g(2);
  double best_val = -std::numeric_limits<double>::infinity();
  for (double g1 = 0.0; g1 <= 1.0 + 1e-15; g1 += step) {
    g << g1, 1.0 - g1;
    const double val = qp_objective(A, B, g);
    if (val > best_val) {
      best_val = val;
      best = g;
    }
  }
  return best;
}

// Grid oracle for K = 3: coarse sweep then local refinement at 1e-4, sound
// because the objective is strictly concave.
inline Eigen::VectorXd grid_qp_k3(const Eigen::VectorXd& A, const Eigen::VectorXd& B) {
  Eigen::VectorXd best(3), g(3);
  double best_val = -std::numeric_limits<double>::infinity();
  auto sweep = [&](double lo1, double hi1, double lo2, double hi2, double step) {
    for (double g1 = lo1; g1 <= hi1 + 1e-15; g1 += step) {
      for (double g2 = lo2; g2 <= hi2 + 1e-15; g2 += step) {
        if (g1 + g2 > 1.0 + 1e-12) continue;
        g << g1, g2, 1.0 - g1 - g2;
        const double val = qp_objective(A, B, g);
        if (val > best_val) {
          best_val = val;
          best = g;
        }
      }
    }
  };
  sweep(0.0, 1.0, 0.0, 1.0, 2e-3);
  const double c1 = best(0), c2 = best(1);
  sweep(std::max(0.0, c1 - 4e-3), std::min(1.0, c1 + 4e-3), std::max(0.0, c2 - 4e-3),
        std::min(1.0, c2 + 4e-3), 1e-4);
  return best;
}

// Direct evaluation of the quadratic minorizer of the lower bound at gamma
// around gamma_tau, independent of the coefficient-based implementation.
inline double direct_minorizer(const tergmix::NetworkSeries& series,
                               const tergmix::ModelSpec& spec, const tergmix::Params& params,
                               const Eigen::MatrixXd& gamma_tau, const Eigen::MatrixXd& gamma) {
  const int n = series.node_count();
  const int K = spec.K;
  double acc = 0.0;
  for (int t = 1; t <= series.transitions(); ++t) {
    const tergmix::Snapshot& prev = series.snapshots[static_cast<std::size_t>(t) - 1];
    const tergmix::Snapshot& cur = series.snapshots[static_cast<std::size_t>(t)];
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int yp = prev.has_edge(i, j) ? 1 : 0;
        const int yc = cur.has_edge(i, j) ? 1 : 0;
        for (int k = 0; k < K; ++k) {
          for (int l = 0; l < K; ++l) {
            const double lp = tergmix::edge_transition_logprob(
                spec, params.theta.row(k), params.theta.row(l), yp, yc);
            acc += (gamma(i, k) * gamma(i, k) * gamma_tau(j, l) / (2.0 * gamma_tau(i, k)) +
                    gamma(j, l) * gamma(j, l) * gamma_tau(i, k) / (2.0 * gamma_tau(j, l))) *
                   lp;
          }
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < K; ++k) {
        acc += gamma(i, k) * (std::log(params.pi(k)) - std::log(gamma_tau(i, k)) -
                              gamma(i, k) / gamma_tau(i, k) + 1.0);
      }
    }
  }
  return acc;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("tergmix_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() { std::filesystem::remove_all(dir_); }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
