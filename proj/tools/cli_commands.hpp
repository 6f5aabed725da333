#pragma once

#include <cstdint>
#include <string>

#include "tergmix/varem.hpp"

namespace tergmix::cli {

struct LoadOpts {
  std::string path;
  int nodes = -1;    // -1 = infer from data
  int horizon = -1;  // -1 = infer from data
};

struct SimulateOpts {
  std::string preset;       // model1..model6
  std::string config_path;  // JSON config mirroring the sim config fields
  std::string model;        // optional; must agree with the preset when both given
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct FitOpts {
  LoadOpts in;
  std::string model = "tergm";
  int k = 1;
  FitConfig config;
  std::string out_dir;
};

struct SelectOpts {
  LoadOpts in;
  std::string model = "tergm";
  int k_min = 1;
  int k_max = 6;
  FitConfig config;
  int jobs = 0;  // 0 = hardware concurrency
  std::string out_dir;
};

struct MetricsOpts {
  std::string labels_path;
  std::string truth_labels_path;
  std::string fit_path;           // optional: FitResult JSON, enables RSE
  std::string truth_params_path;  // optional: JSON with pi/theta (or a simulate provenance)
  std::string out_dir;
};

struct InstabilityOpts {
  LoadOpts in;
  std::string labels_path;
  std::string out_dir;
};

// Each command writes its outputs plus a manifest under out_dir and returns a
// process exit code; on failure everything written so far is removed.
int cmd_simulate(const SimulateOpts& opts);
int cmd_fit(const FitOpts& opts);
int cmd_select(const SelectOpts& opts);
int cmd_metrics(const MetricsOpts& opts);
int cmd_instability(const InstabilityOpts& opts);

}  // namespace tergmix::cli
