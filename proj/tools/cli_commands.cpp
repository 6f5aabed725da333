#include "cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <variant>

#include <json.hpp>

#include "tergmix/common.hpp"
#include "tergmix/metrics.hpp"
#include "tergmix/selection.hpp"
#include "tergmix/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tergmix::cli {

namespace {

// Collects every file a command writes so that failures leave no partial
// output behind.
class OutputTracker {
 public:
  explicit OutputTracker(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write_text(const std::string& name, const std::string& content) {
    const fs::path p = path(name);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + p.string());
    record(name);
  }

  void record(const std::string& name) { names_.push_back(name); }

  // The manifest is always the last file written.
  void write_manifest(const std::string& command, const json& config_echo) {
    json doc;
    doc["command"] = command;
    doc["version"] = kVersion;
    doc["config"] = config_echo;
    json files = json::array();
    for (const std::string& name : names_) files.push_back(name);
    files.push_back("manifest.json");
    doc["files"] = files;
    write_text("manifest.json", doc.dump(2) + "\n");
  }

  void rollback() {
    std::error_code ec;
    for (const std::string& name : names_) fs::remove(path(name), ec);
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

int run_command(const std::string& command, const std::string& out_dir,
                const std::function<void(OutputTracker&)>& body) {
  OutputTracker tracker(out_dir);
  try {
    body(tracker);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "tergmix " << command << ": " << e.what() << '\n';
    tracker.rollback();
    return 1;
  }
}

NetworkSeries load_input(const LoadOpts& opts) {
  const SeriesFormat format =
      fs::is_directory(opts.path) ? SeriesFormat::snapshot_dir : SeriesFormat::long_tsv;
  return load_series(opts.path, format, opts.nodes, opts.horizon);
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < m.rows(); ++r) {
    rows.emplace_back();
    for (int c = 0; c < m.cols(); ++c) rows.back().push_back(m(r, c));
  }
  return rows;
}

Eigen::VectorXd vec_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
  return v;
}

Eigen::MatrixXd mat_from_json(const json& arr) {
  const int rows = static_cast<int>(arr.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const int cols = static_cast<int>(arr[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(arr[static_cast<std::size_t>(r)].size()) != cols)
      throw std::runtime_error("ragged matrix in JSON");
    for (int c = 0; c < cols; ++c)
      m(r, c) = arr[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc;
  in >> doc;
  return doc;
}

json echo_config(const MixtureSimConfig& config) {
  json doc;
  doc["type"] = "mixture";
  doc["model"] = model_kind_name(config.spec.kind);
  doc["n"] = config.n;
  doc["T"] = config.T;
  doc["K"] = config.spec.K;
  doc["pi"] = to_vec(config.pi);
  doc["theta"] = to_rows(config.theta);
  doc["theta_d"] = to_vec(config.theta_d);
  doc["seed"] = config.seed;
  return doc;
}

json echo_config(const DurationSimConfig& config) {
  json doc;
  doc["type"] = "duration_density";
  doc["n"] = config.n;
  doc["T"] = config.T;
  doc["K"] = config.K;
  doc["pi"] = to_vec(config.pi);
  doc["mean_duration"] = to_vec(config.mean_duration);
  doc["avg_density"] = to_vec(config.avg_density);
  doc["cross_edges"] = config.cross_edges;
  doc["seed"] = config.seed;
  return doc;
}

PresetConfig sim_config_from_json(const json& doc, std::uint64_t seed) {
  const std::string type = doc.at("type").get<std::string>();
  if (type == "mixture") {
    MixtureSimConfig config;
    config.n = doc.at("n").get<int>();
    config.T = doc.at("T").get<int>();
    config.pi = vec_from_json(doc.at("pi"));
    config.theta = mat_from_json(doc.at("theta"));
    config.theta_d = vec_from_json(doc.at("theta_d"));
    config.spec.kind = model_kind_from_name(doc.at("model").get<std::string>());
    config.spec.K = static_cast<int>(config.pi.size());
    config.seed = seed;
    return config;
  }
  if (type == "duration_density") {
    DurationSimConfig config;
    config.n = doc.at("n").get<int>();
    config.T = doc.at("T").get<int>();
    config.pi = vec_from_json(doc.at("pi"));
    config.K = static_cast<int>(config.pi.size());
    config.mean_duration = vec_from_json(doc.at("mean_duration"));
    config.avg_density = vec_from_json(doc.at("avg_density"));
    config.cross_edges = doc.value("cross_edges", 0);
    config.seed = seed;
    return config;
  }
  throw std::runtime_error("config type must be 'mixture' or 'duration_density'");
}

json fit_config_echo(const FitConfig& config) {
  json doc;
  doc["max_iter"] = config.max_iter;
  doc["rel_tol"] = config.rel_tol;
  doc["restarts"] = config.restarts;
  doc["seed"] = config.seed;
  doc["gamma_floor"] = config.gamma_floor;
  doc["newton_max_inner"] = config.newton_max_inner;
  return doc;
}

}  // namespace

int cmd_simulate(const SimulateOpts& opts) {
  return run_command("simulate", opts.out_dir, [&](OutputTracker& tracker) {
    if (opts.preset.empty() == opts.config_path.empty())
      throw std::runtime_error("exactly one of --preset and --config is required");

    PresetConfig config = opts.preset.empty()
                              ? sim_config_from_json(load_json_file(opts.config_path), opts.seed)
                              : model_preset(opts.preset, opts.seed);

    if (!opts.model.empty()) {
      const ModelKind requested = model_kind_from_name(opts.model);
      if (const auto* mix = std::get_if<MixtureSimConfig>(&config)) {
        if (mix->spec.kind != requested)
          throw std::runtime_error("--model disagrees with the configured model kind");
      }
    }

    SimResult sim;
    json config_json;
    if (const auto* mix = std::get_if<MixtureSimConfig>(&config)) {
      sim = simulate_mixture(*mix);
      config_json = echo_config(*mix);
    } else {
      const auto& dur = std::get<DurationSimConfig>(config);
      sim = simulate_duration_density(dur);
      config_json = echo_config(dur);
    }

    save_series_long_tsv(sim.series, tracker.path("series.tsv").string());
    tracker.record("series.tsv");
    save_labels(tracker.path("labels.tsv").string(), sim.z);
    tracker.record("labels.tsv");

    json provenance;
    provenance["command"] = "simulate";
    provenance["version"] = kVersion;
    provenance["config"] = config_json;
    tracker.write_text("provenance.json", provenance.dump(2) + "\n");

    tracker.write_manifest("simulate", config_json);
  });
}

int cmd_fit(const FitOpts& opts) {
  return run_command("fit", opts.out_dir, [&](OutputTracker& tracker) {
    const NetworkSeries series = load_input(opts.in);
    const ModelSpec spec{model_kind_from_name(opts.model), opts.k};
    const FitResult result = fit(series, spec, opts.config);

    tracker.write_text("fit.json", fit_result_to_json(result, spec));
    save_labels(tracker.path("labels.tsv").string(), result.labels);
    tracker.record("labels.tsv");

    json config_json = fit_config_echo(opts.config);
    config_json["model"] = opts.model;
    config_json["K"] = opts.k;
    config_json["in"] = opts.in.path;
    tracker.write_manifest("fit", config_json);
  });
}

int cmd_select(const SelectOpts& opts) {
  return run_command("select", opts.out_dir, [&](OutputTracker& tracker) {
    const NetworkSeries series = load_input(opts.in);
    const ModelKind kind = model_kind_from_name(opts.model);
    const int jobs = opts.jobs > 0
                         ? opts.jobs
                         : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const SelectionReport report = select_k(series, kind, opts.k_min, opts.k_max, opts.config, jobs);

    tracker.write_text("selection.json", selection_report_to_json(report, kind));
    write_selection_tsv(report, tracker.path("selection.tsv").string());
    tracker.record("selection.tsv");

    json config_json = fit_config_echo(opts.config);
    config_json["model"] = opts.model;
    config_json["k_min"] = opts.k_min;
    config_json["k_max"] = opts.k_max;
    config_json["jobs"] = jobs;
    config_json["in"] = opts.in.path;
    tracker.write_manifest("select", config_json);
  });
}

int cmd_metrics(const MetricsOpts& opts) {
  return run_command("metrics", opts.out_dir, [&](OutputTracker& tracker) {
    const std::vector<int> z_hat = load_labels(opts.labels_path);
    const std::vector<int> z_true = load_labels(opts.truth_labels_path);

    json doc;
    doc["n"] = z_true.size();
    doc["rand_index"] = rand_index(z_true, z_hat);

    if (opts.fit_path.empty() != opts.truth_params_path.empty())
      throw std::runtime_error("--fit and --truth-params must be given together");
    if (!opts.fit_path.empty()) {
      const json fit_doc = load_json_file(opts.fit_path);
      json truth_doc = load_json_file(opts.truth_params_path);
      if (truth_doc.contains("config")) truth_doc = truth_doc["config"];
      if (!truth_doc.contains("pi") || !truth_doc.contains("theta"))
        throw std::runtime_error(opts.truth_params_path + ": expected pi and theta");
      const RseResult r = rse(vec_from_json(fit_doc.at("pi")), vec_from_json(truth_doc.at("pi")),
                              mat_from_json(fit_doc.at("theta")),
                              mat_from_json(truth_doc.at("theta")));
      doc["rse_pi"] = r.rse_pi;
      doc["rse_theta"] = to_vec(r.rse_theta);
    }

    tracker.write_text("metrics.json", doc.dump(2) + "\n");

    json config_json;
    config_json["labels"] = opts.labels_path;
    config_json["truth_labels"] = opts.truth_labels_path;
    if (!opts.fit_path.empty()) {
      config_json["fit"] = opts.fit_path;
      config_json["truth_params"] = opts.truth_params_path;
    }
    tracker.write_manifest("metrics", config_json);
  });
}

int cmd_instability(const InstabilityOpts& opts) {
  return run_command("instability", opts.out_dir, [&](OutputTracker& tracker) {
    const NetworkSeries series = load_input(opts.in);
    const std::vector<int> z = load_labels(opts.labels_path, series.node_count());
    const InstabilityReport report = instability_stats(series, z);

    write_instability_tsv(report, tracker.path("instability.tsv").string());
    tracker.record("instability.tsv");

    json config_json;
    config_json["in"] = opts.in.path;
    config_json["labels"] = opts.labels_path;
    config_json["K"] = report.K;
    tracker.write_manifest("instability", config_json);
  });
}

}  // namespace tergmix::cli
