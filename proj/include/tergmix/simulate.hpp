#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>
#include <Eigen/Dense>

#include "tergmix/models.hpp"
#include "tergmix/netseries.hpp"

namespace tergmix {

// Exact sampler for the mixture model: community labels from pi, the initial
// network from node-additive density parameters theta_d, then sequential
// per-dyad transitions.
struct MixtureSimConfig {
  int n = 0;
  int T = 0;
  ModelSpec spec;
  Eigen::VectorXd pi;       // K
  Eigen::MatrixXd theta;    // K x p dynamic parameters
  Eigen::VectorXd theta_d;  // K initial-density parameters
  std::uint64_t seed = 0;

  void validate() const;
};

// Robustness generator: per community, dyads evolve as two-state Markov
// chains parameterized by mean relational duration and stationary density;
// communities are combined by planting cross-community edges.
struct DurationSimConfig {
  int n = 0;
  int T = 0;
  int K = 0;
  Eigen::VectorXd pi;
  Eigen::VectorXd mean_duration;  // > 1, per community
  Eigen::VectorXd avg_density;    // in (0,1), per community
  int cross_edges = 0;            // planted per snapshot
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimResult {
  NetworkSeries series;
  std::vector<int> z;  // true labels, 1..K
};

SimResult simulate_mixture(const MixtureSimConfig& config);

SimResult simulate_duration_density(const DurationSimConfig& config);

// Per-community Markov chain parameters implied by (mean_duration, density):
// persistence p = 1 - 1/duration and formation q = rho (1-p) / (1-rho), the
// unique q with stationary density rho. Throws if q falls outside (0,1).
void duration_density_rates(const DurationSimConfig& config,
                            Eigen::VectorXd* persist, Eigen::VectorXd* form);

// Returns a copy of the series with m distinct cross-community dyads set to 1
// in each snapshot, sampled uniformly and independently across snapshots.
NetworkSeries plant_cross_edges(const NetworkSeries& series, const std::vector<int>& z,
                                int m, std::uint64_t seed);

// Canonical simulation settings for the bundled experiment models
// ("model1".."model6"): model1/2 stability mixtures, model3/4
// formation-persistence mixtures, model5/6 duration-density designs.
using PresetConfig = std::variant<MixtureSimConfig, DurationSimConfig>;
PresetConfig model_preset(const std::string& name, std::uint64_t seed);

}  // namespace tergmix
