#include "tergmix/simulate.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tergmix/common.hpp"

namespace tergmix {

namespace {

void check_pi(const Eigen::VectorXd& pi, int K) {
  if (pi.size() != K) throw std::invalid_argument("pi length must equal K");
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    if (!(pi(k) >= 0.0)) throw std::invalid_argument("pi entries must be >= 0");
    sum += pi(k);
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("pi must sum to 1");
}

std::vector<int> draw_labels(Rng& rng, const Eigen::VectorXd& pi, int n) {
  std::vector<double> w(pi.data(), pi.data() + pi.size());
  std::vector<int> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = rng.categorical(w) + 1;
  return z;
}

}  // namespace

void MixtureSimConfig::validate() const {
  spec.validate();
  if (n < 2) throw std::invalid_argument("MixtureSimConfig: n must be >= 2");
  if (T < 1) throw std::invalid_argument("MixtureSimConfig: T must be >= 1");
  check_pi(pi, spec.K);
  if (theta.rows() != spec.K || theta.cols() != spec.p())
    throw std::invalid_argument("MixtureSimConfig: theta must be K x p");
  if (theta_d.size() != spec.K)
    throw std::invalid_argument("MixtureSimConfig: theta_d must have length K");
}

void DurationSimConfig::validate() const {
  if (K < 1) throw std::invalid_argument("DurationSimConfig: K must be >= 1");
  if (n < 2) throw std::invalid_argument("DurationSimConfig: n must be >= 2");
  if (T < 1) throw std::invalid_argument("DurationSimConfig: T must be >= 1");
  check_pi(pi, K);
  if (mean_duration.size() != K || avg_density.size() != K)
    throw std::invalid_argument("DurationSimConfig: per-community vectors must have length K");
  for (int k = 0; k < K; ++k) {
    if (!(mean_duration(k) > 1.0))
      throw std::invalid_argument("DurationSimConfig: mean_duration must be > 1");
    if (!(avg_density(k) > 0.0 && avg_density(k) < 1.0))
      throw std::invalid_argument("DurationSimConfig: avg_density must be in (0,1)");
  }
  if (cross_edges < 0) throw std::invalid_argument("DurationSimConfig: cross_edges must be >= 0");
}

SimResult simulate_mixture(const MixtureSimConfig& config) {
  config.validate();
  Rng rng(substream_seed(config.seed, 0));

  SimResult result;
  result.z = draw_labels(rng, config.pi, config.n);

  NetworkSeries& series = result.series;
  series.snapshots.assign(static_cast<std::size_t>(config.T) + 1, Snapshot(config.n));

  // Initial network: node-additive logistic density parameters.
  for (int i = 0; i < config.n; ++i) {
    for (int j = i + 1; j < config.n; ++j) {
      const double p = logistic(config.theta_d(result.z[static_cast<std::size_t>(i)] - 1) +
                                config.theta_d(result.z[static_cast<std::size_t>(j)] - 1));
      if (rng.bernoulli(p)) series.snapshots[0].add_edge(i, j);
    }
  }

  for (int t = 1; t <= config.T; ++t) {
    const Snapshot& prev = series.snapshots[static_cast<std::size_t>(t) - 1];
    Snapshot& cur = series.snapshots[static_cast<std::size_t>(t)];
    for (int i = 0; i < config.n; ++i) {
      const int zi = result.z[static_cast<std::size_t>(i)] - 1;
      for (int j = i + 1; j < config.n; ++j) {
        const int zj = result.z[static_cast<std::size_t>(j)] - 1;
        const double p = edge_prob(config.spec, config.theta.row(zi), config.theta.row(zj),
                                   prev.has_edge(i, j) ? 1 : 0);
        if (rng.bernoulli(p)) cur.add_edge(i, j);
      }
    }
  }
  for (Snapshot& snap : series.snapshots) snap.finalize();
  return result;
}

void duration_density_rates(const DurationSimConfig& config, Eigen::VectorXd* persist,
                            Eigen::VectorXd* form) {
  persist->resize(config.K);
  form->resize(config.K);
  for (int k = 0; k < config.K; ++k) {
    const double p = 1.0 - 1.0 / config.mean_duration(k);
    const double rho = config.avg_density(k);
    const double q = rho * (1.0 - p) / (1.0 - rho);
    if (!(q > 0.0 && q < 1.0))
      throw std::runtime_error("duration_density_rates: community " + std::to_string(k + 1) +
                               " infeasible (formation probability " + std::to_string(q) +
                               " outside (0,1))");
    (*persist)(k) = p;
    (*form)(k) = q;
  }
}

SimResult simulate_duration_density(const DurationSimConfig& config) {
  config.validate();
  Eigen::VectorXd persist, form;
  duration_density_rates(config, &persist, &form);

  Rng rng(substream_seed(config.seed, 0));
  SimResult result;
  result.z = draw_labels(rng, config.pi, config.n);

  NetworkSeries& series = result.series;
  series.snapshots.assign(static_cast<std::size_t>(config.T) + 1, Snapshot(config.n));

  // Within-community dyads start at the stationary density and evolve as
  // two-state chains; cross-community dyads stay empty until planting.
  for (int i = 0; i < config.n; ++i) {
    const int zi = result.z[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < config.n; ++j) {
      if (zi != result.z[static_cast<std::size_t>(j)]) continue;
      if (rng.bernoulli(config.avg_density(zi - 1))) series.snapshots[0].add_edge(i, j);
    }
  }
  for (int t = 1; t <= config.T; ++t) {
    const Snapshot& prev = series.snapshots[static_cast<std::size_t>(t) - 1];
    Snapshot& cur = series.snapshots[static_cast<std::size_t>(t)];
    for (int i = 0; i < config.n; ++i) {
      const int zi = result.z[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < config.n; ++j) {
        if (zi != result.z[static_cast<std::size_t>(j)]) continue;
        const double p = prev.has_edge(i, j) ? persist(zi - 1) : form(zi - 1);
        if (rng.bernoulli(p)) cur.add_edge(i, j);
      }
    }
  }
  for (Snapshot& snap : series.snapshots) snap.finalize();

  if (config.cross_edges > 0)
    result.series = plant_cross_edges(result.series, result.z, config.cross_edges,
                                      substream_seed(config.seed, 1));
  return result;
}

NetworkSeries plant_cross_edges(const NetworkSeries& series, const std::vector<int>& z, int m,
                                std::uint64_t seed) {
  series.validate();
  const int n = series.node_count();
  if (static_cast<int>(z.size()) != n)
    throw std::invalid_argument("plant_cross_edges: labels length must equal node count");
  if (m < 0) throw std::invalid_argument("plant_cross_edges: m must be >= 0");
  if (m == 0) return series;

  std::vector<std::pair<int, int>> cross;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (z[static_cast<std::size_t>(i)] != z[static_cast<std::size_t>(j)]) cross.emplace_back(i, j);
    }
  }
  if (static_cast<int>(cross.size()) < m)
    throw std::runtime_error("plant_cross_edges: only " + std::to_string(cross.size()) +
                             " cross-community dyads available, need " + std::to_string(m));

  Rng rng(seed);
  NetworkSeries planted = series;
  std::vector<std::size_t> index(cross.size());
  for (Snapshot& snap : planted.snapshots) {
    // partial Fisher-Yates: the first m entries become the sample
    std::iota(index.begin(), index.end(), std::size_t{0});
    for (int pick = 0; pick < m; ++pick) {
      const std::size_t swap_with =
          static_cast<std::size_t>(pick) + rng.below(index.size() - static_cast<std::size_t>(pick));
      std::swap(index[static_cast<std::size_t>(pick)], index[swap_with]);
      const auto& [i, j] = cross[index[static_cast<std::size_t>(pick)]];
      snap.add_edge(i, j);
    }
    snap.finalize();
  }
  return planted;
}

PresetConfig model_preset(const std::string& name, std::uint64_t seed) {
  const double third = 1.0 / 3.0;
  if (name == "model1" || name == "model2" || name == "model3" || name == "model4") {
    MixtureSimConfig config;
    config.n = 100;
    config.T = 10;
    config.seed = seed;
    if (name == "model1") {
      config.spec = {ModelKind::tergm_stability, 2};
      config.pi = Eigen::Vector2d(0.5, 0.5);
      config.theta = Eigen::MatrixXd(2, 1);
      config.theta << -0.5, 0.5;
      config.theta_d = Eigen::Vector2d(-0.5, 0.5);
    } else if (name == "model2") {
      config.spec = {ModelKind::tergm_stability, 3};
      config.pi = Eigen::Vector3d(third, third, third);
      config.theta = Eigen::MatrixXd(3, 1);
      config.theta << -1.0, 0.0, 1.0;
      config.theta_d = Eigen::Vector3d(-1.0, 0.0, 1.0);
    } else if (name == "model3") {
      config.spec = {ModelKind::stergm_fp, 2};
      config.pi = Eigen::Vector2d(0.5, 0.5);
      config.theta = Eigen::MatrixXd(2, 2);
      config.theta << -1.5, -1.0, 1.5, 1.0;
      config.theta_d = Eigen::Vector2d(-0.5, 0.5);
    } else {
      config.spec = {ModelKind::stergm_fp, 3};
      config.pi = Eigen::Vector3d(third, third, third);
      config.theta = Eigen::MatrixXd(3, 2);
      config.theta << -1.5, -1.0, 0.0, 0.0, 1.5, 1.0;
      config.theta_d = Eigen::Vector3d(-1.0, 0.0, 1.0);
    }
    return config;
  }
  if (name == "model5" || name == "model6") {
    DurationSimConfig config;
    config.n = 100;
    config.T = 10;
    config.cross_edges = 10;
    config.seed = seed;
    if (name == "model5") {
      config.K = 2;
      config.pi = Eigen::Vector2d(0.4, 0.6);
      config.mean_duration = Eigen::Vector2d(5.0, 2.5);
      config.avg_density = Eigen::Vector2d(0.15, 0.10);
    } else {
      config.K = 3;
      config.pi = Eigen::Vector3d(0.3, 0.4, 0.3);
      config.mean_duration = Eigen::Vector3d(7.5, 5.0, 2.5);
      config.avg_density = Eigen::Vector3d(0.10, 0.25, 0.30);
    }
    return config;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (expected model1..model6)");
}

}  // namespace tergmix
