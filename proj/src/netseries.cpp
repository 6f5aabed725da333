#include "tergmix/netseries.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace tergmix {

namespace {

[[noreturn]] void parse_fail(const std::string& where, std::size_t line_no, const std::string& what) {
  throw std::runtime_error(where + ":" + std::to_string(line_no) + ": " + what);
}

// Splits a line into whitespace-separated integer fields; returns false on
// any non-integer token.
bool parse_ints(const std::string& line, std::vector<long>& out) {
  out.clear();
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p != end) {
    while (p != end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    long value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc()) return false;
    if (next != end && *next != ' ' && *next != '\t' && *next != '\r') return false;
    out.push_back(value);
    p = next;
  }
  return true;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

struct RawEdge {
  long t, i, j;
};

NetworkSeries build_series(const std::vector<RawEdge>& edges, long max_t, long max_id,
                           int nodes_override, int horizon_override, const std::string& where) {
  const long n = nodes_override > 0 ? nodes_override : max_id + 1;
  const long T = horizon_override >= 0 ? horizon_override : max_t;
  if (T < 1) throw std::runtime_error(where + ": series must contain at least 2 snapshots (T >= 1)");
  if (n < 1) throw std::runtime_error(where + ": empty node set");

  NetworkSeries series;
  series.snapshots.assign(static_cast<std::size_t>(T) + 1, Snapshot(static_cast<int>(n)));
  for (const RawEdge& e : edges) {
    if (e.t < 0 || e.t > T)
      throw std::runtime_error(where + ": time index " + std::to_string(e.t) + " outside 0.." + std::to_string(T));
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
      throw std::runtime_error(where + ": node id out of range for n=" + std::to_string(n) + " at t=" + std::to_string(e.t));
    if (e.i == e.j)
      throw std::runtime_error(where + ": self-loop (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") at t=" + std::to_string(e.t));
    series.snapshots[static_cast<std::size_t>(e.t)].add_edge(static_cast<int>(e.i), static_cast<int>(e.j));
  }
  for (Snapshot& snap : series.snapshots) snap.finalize();
  series.validate();
  return series;
}

NetworkSeries load_long_tsv(const std::string& path, int nodes_override, int horizon_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  ++line_no;
  {
    std::string header = line;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "t\ti\tj") parse_fail(path, line_no, "expected header 't<TAB>i<TAB>j'");
  }

  std::vector<RawEdge> edges;
  std::vector<long> fields;
  long max_t = 0, max_id = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!parse_ints(line, fields) || fields.size() != 3)
      parse_fail(path, line_no, "expected three integer fields 't i j'");
    const RawEdge e{fields[0], fields[1], fields[2]};
    if (e.t < 0) parse_fail(path, line_no, "negative time index");
    if (e.i < 0 || e.j < 0) parse_fail(path, line_no, "negative node id");
    max_t = std::max(max_t, e.t);
    max_id = std::max({max_id, e.i, e.j});
    edges.push_back(e);
  }
  return build_series(edges, max_t, max_id, nodes_override, horizon_override, path);
}

NetworkSeries load_snapshot_dir(const std::string& path, int nodes_override, int horizon_override) {
  if (!fs::is_directory(path)) throw std::runtime_error(path + ": not a directory");
  const std::regex name_re("^t([0-9]{3,})\\.tsv$");

  std::vector<std::pair<long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, name_re)) files.emplace_back(std::stol(m[1]), entry.path());
  }
  if (files.empty()) throw std::runtime_error(path + ": no snapshot files tNNN.tsv found");
  std::sort(files.begin(), files.end());
  for (std::size_t t = 0; t < files.size(); ++t) {
    if (files[t].first != static_cast<long>(t))
      throw std::runtime_error(path + ": snapshot files are not contiguous from t000");
  }

  std::vector<RawEdge> edges;
  std::vector<long> fields;
  long max_id = -1;
  for (const auto& [t, file] : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank(line)) continue;
      if (!parse_ints(line, fields) || fields.size() != 2)
        parse_fail(file.string(), line_no, "expected two integer fields 'i j'");
      if (fields[0] < 0 || fields[1] < 0) parse_fail(file.string(), line_no, "negative node id");
      edges.push_back(RawEdge{t, fields[0], fields[1]});
      max_id = std::max({max_id, fields[0], fields[1]});
    }
  }
  const long max_t = files.back().first;
  return build_series(edges, max_t, max_id, nodes_override, horizon_override, path);
}

}  // namespace

Snapshot::Snapshot(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("Snapshot: node count must be positive");
  bits_.assign((dyad_count(static_cast<std::size_t>(n)) + 63) / 64, 0);
}

bool Snapshot::has_edge(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  const std::size_t d = dyad_index(static_cast<std::size_t>(n_), static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j));
  return (bits_[d >> 6] >> (d & 63)) & 1u;
}

void Snapshot::add_edge(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_)
    throw std::invalid_argument("Snapshot: node id out of range");
  if (i == j) throw std::invalid_argument("Snapshot: self-loops are not allowed");
  if (i > j) std::swap(i, j);
  const std::size_t d = dyad_index(static_cast<std::size_t>(n_), static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j));
  std::uint64_t& word = bits_[d >> 6];
  const std::uint64_t mask = std::uint64_t{1} << (d & 63);
  if (word & mask) return;  // duplicate
  word |= mask;
  edges_.emplace_back(i, j);
}

void Snapshot::finalize() { std::sort(edges_.begin(), edges_.end()); }

bool Snapshot::operator==(const Snapshot& other) const {
  return n_ == other.n_ && bits_ == other.bits_;
}

void NetworkSeries::validate() const {
  if (snapshots.size() < 2)
    throw std::runtime_error("NetworkSeries: need at least 2 snapshots (initial network plus one transition)");
  const int n = snapshots.front().node_count();
  for (const Snapshot& snap : snapshots) {
    if (snap.node_count() != n)
      throw std::runtime_error("NetworkSeries: snapshots must share a common node set");
  }
  if (!node_names.empty() && static_cast<int>(node_names.size()) != n)
    throw std::runtime_error("NetworkSeries: node_names length must equal node count");
}

bool NetworkSeries::operator==(const NetworkSeries& other) const {
  return snapshots == other.snapshots;
}

NetworkSeries load_series(const std::string& path, SeriesFormat format,
                          int nodes_override, int horizon_override) {
  if (!fs::exists(path)) throw std::runtime_error(path + ": no such file or directory");
  switch (format) {
    case SeriesFormat::long_tsv:
      return load_long_tsv(path, nodes_override, horizon_override);
    case SeriesFormat::snapshot_dir:
      return load_snapshot_dir(path, nodes_override, horizon_override);
  }
  throw std::logic_error("unknown series format");
}

void save_series_long_tsv(const NetworkSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t\ti\tj\n";
  for (std::size_t t = 0; t < series.snapshots.size(); ++t) {
    for (const auto& [i, j] : series.snapshots[t].edges()) out << t << '\t' << i << '\t' << j << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<int> load_labels(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<int> z(static_cast<std::size_t>(n), 0);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::string line;
  std::vector<long> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!parse_ints(line, fields) || fields.size() != 2)
      parse_fail(path, line_no, "expected two integer fields 'i k'");
    const long i = fields[0], k = fields[1];
    if (i < 0 || i >= n) parse_fail(path, line_no, "node id out of range");
    if (k < 1) parse_fail(path, line_no, "labels must be in 1..K");
    if (seen[static_cast<std::size_t>(i)]) parse_fail(path, line_no, "duplicate node id");
    seen[static_cast<std::size_t>(i)] = true;
    z[static_cast<std::size_t>(i)] = static_cast<int>(k);
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)])
      throw std::runtime_error(path + ": missing label for node " + std::to_string(i));
  }
  return z;
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  long max_id = -1;
  std::string line;
  std::vector<long> fields;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!parse_ints(line, fields) || fields.size() != 2)
      parse_fail(path, line_no, "expected two integer fields 'i k'");
    if (fields[0] < 0) parse_fail(path, line_no, "negative node id");
    max_id = std::max(max_id, fields[0]);
  }
  if (max_id < 0) throw std::runtime_error(path + ": no labels found");
  return load_labels(path, static_cast<int>(max_id) + 1);
}

void save_labels(const std::string& path, const std::vector<int>& z) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < z.size(); ++i) out << i << '\t' << z[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

int BlockTransitionCounts::pair_index(int k, int l) const {
  if (k < 1 || k > K || l < 1 || l > K)
    throw std::invalid_argument("BlockTransitionCounts: label out of range 1..K");
  int a = k - 1, b = l - 1;
  if (a > b) std::swap(a, b);
  return a * K - a * (a - 1) / 2 + (b - a);
}

std::uint64_t BlockTransitionCounts::total() const {
  std::uint64_t sum = 0;
  for (const Cells& c : cells) sum += c.total();
  return sum;
}

namespace {

void check_labels(const std::vector<int>& z, int n, int K) {
  if (static_cast<int>(z.size()) != n)
    throw std::invalid_argument("labels: length must equal node count");
  for (int zi : z) {
    if (zi < 1 || zi > K) throw std::invalid_argument("labels: value outside 1..K");
  }
}

void tally_transition(const Snapshot& prev, const Snapshot& cur, const std::vector<int>& z,
                      BlockTransitionCounts& counts) {
  const int n = prev.node_count();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      BlockTransitionCounts::Cells& cell = counts.cells[static_cast<std::size_t>(
          counts.pair_index(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]))];
      const bool a = prev.has_edge(i, j);
      const bool b = cur.has_edge(i, j);
      if (a) {
        b ? ++cell.n11 : ++cell.n10;
      } else {
        b ? ++cell.n01 : ++cell.n00;
      }
    }
  }
}

}  // namespace

BlockTransitionCounts transition_tallies(const NetworkSeries& series, const std::vector<int>& z,
                                         int K) {
  series.validate();
  check_labels(z, series.node_count(), K);
  BlockTransitionCounts counts;
  counts.K = K;
  counts.cells.assign(static_cast<std::size_t>(K) * (K + 1) / 2, {});
  for (int t = 1; t <= series.transitions(); ++t)
    tally_transition(series.snapshots[static_cast<std::size_t>(t) - 1],
                     series.snapshots[static_cast<std::size_t>(t)], z, counts);
  return counts;
}

BlockTransitionCounts transition_tallies_at(const NetworkSeries& series, const std::vector<int>& z,
                                            int K, int t) {
  series.validate();
  check_labels(z, series.node_count(), K);
  if (t < 1 || t > series.transitions())
    throw std::invalid_argument("transition_tallies_at: t outside 1..T");
  BlockTransitionCounts counts;
  counts.K = K;
  counts.cells.assign(static_cast<std::size_t>(K) * (K + 1) / 2, {});
  tally_transition(series.snapshots[static_cast<std::size_t>(t) - 1],
                   series.snapshots[static_cast<std::size_t>(t)], z, counts);
  return counts;
}

DyadHistory DyadHistory::from_series(const NetworkSeries& series) {
  series.validate();
  DyadHistory hist;
  hist.n = series.node_count();
  hist.T = series.transitions();
  const std::size_t m = dyad_count(static_cast<std::size_t>(hist.n));
  hist.prev_edges.assign(m, 0);
  hist.persisted.assign(m, 0);
  hist.formed.assign(m, 0);
  hist.stable.assign(m, 0);
  for (int t = 1; t <= hist.T; ++t) {
    const Snapshot& prev = series.snapshots[static_cast<std::size_t>(t) - 1];
    const Snapshot& cur = series.snapshots[static_cast<std::size_t>(t)];
    std::size_t d = 0;
    for (int i = 0; i < hist.n; ++i) {
      for (int j = i + 1; j < hist.n; ++j, ++d) {
        const bool a = prev.has_edge(i, j);
        const bool b = cur.has_edge(i, j);
        hist.prev_edges[d] += a;
        hist.persisted[d] += a && b;
        hist.formed[d] += !a && b;
        hist.stable[d] += a == b;
      }
    }
  }
  return hist;
}

}  // namespace tergmix
