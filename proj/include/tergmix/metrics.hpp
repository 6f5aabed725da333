#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>

#include "tergmix/netseries.hpp"

namespace tergmix {

// Proportion of node pairs on which the two labelings agree about being in
// the same or in different communities.
double rand_index(const std::vector<int>& z_true, const std::vector<int>& z_hat);

struct RseResult {
  double rse_pi = 0.0;
  Eigen::VectorXd rse_theta;  // one l2 loss per theta column
};

// l2 losses after aligning estimated communities to the truth by the
// permutation minimizing rse_pi + sum of per-column rse_theta (exhaustive,
// K <= 8).
RseResult rse(const Eigen::VectorXd& pi_hat, const Eigen::VectorXd& pi_true,
              const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& theta_true);

// Per community pair: averages over t of the dissolved/persisted,
// formed/stably-absent, and changed/unchanged dyad ratios. Time steps with a
// zero denominator are excluded from the average and counted.
struct PairInstability {
  int k = 0, l = 0;
  double as_10 = 0.0, sd_10 = 0.0;
  double as_01 = 0.0, sd_01 = 0.0;
  double as_tot = 0.0, sd_tot = 0.0;
  int excluded_10 = 0, excluded_01 = 0, excluded_tot = 0;
};

struct InstabilityReport {
  int K = 0;
  std::vector<PairInstability> pairs;  // unordered (k,l), k <= l
};

// K defaults to max(z) when not given.
InstabilityReport instability_stats(const NetworkSeries& series, const std::vector<int>& z,
                                    int K = -1);

void write_instability_tsv(const InstabilityReport& report, const std::string& path);

// Expected geometric edge lifetime 1 / (1 - logistic(theta_p)) under per-step
// persistence probability logistic(theta_p).
double mean_relational_duration(double theta_p);

}  // namespace tergmix
