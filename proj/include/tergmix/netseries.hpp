#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tergmix/common.hpp"

namespace tergmix {

// One undirected binary snapshot on nodes 0..n-1. Keeps a sorted edge list
// plus a packed upper-triangular bitmap, so membership tests stay O(1) even
// for dense networks.
class Snapshot {
 public:
  explicit Snapshot(int n);

  int node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_edge(int i, int j) const;
  // Undirected: (i,j) and (j,i) are the same edge; duplicates are ignored.
  // Throws on self-loops and out-of-range ids.
  void add_edge(int i, int j);
  void finalize();  // sorts the edge list

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  bool operator==(const Snapshot& other) const;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::pair<int, int>> edges_;  // stored with i < j
};

// Observed series y_0, ..., y_T over a fixed node set. snapshots[0] is the
// initial network; transitions t = 1..T are modeled.
struct NetworkSeries {
  std::vector<Snapshot> snapshots;
  std::vector<std::string> node_names;  // optional; empty or length n

  int node_count() const { return snapshots.empty() ? 0 : snapshots.front().node_count(); }
  int transitions() const { return static_cast<int>(snapshots.size()) - 1; }

  // Checks the series invariants (>= 2 snapshots, common node set).
  void validate() const;

  bool operator==(const NetworkSeries& other) const;
};

enum class SeriesFormat { long_tsv, snapshot_dir };

// long_tsv: header "t<TAB>i<TAB>j", one edge per line. snapshot_dir: files
// t000.tsv..tNNN.tsv of "i<TAB>j" lines. Node count and horizon are inferred
// from the data unless overridden (-1 = infer). Input edges are symmetrized
// and deduplicated; self-loops and out-of-range ids are hard errors.
NetworkSeries load_series(const std::string& path, SeriesFormat format,
                          int nodes_override = -1, int horizon_override = -1);

void save_series_long_tsv(const NetworkSeries& series, const std::string& path);

// Labels files hold one "i<TAB>k" line per node with k in 1..K. The
// single-argument overload infers the node count from the file.
std::vector<int> load_labels(const std::string& path, int n);
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<int>& z);

// Dyad transition tallies pooled within unordered community pairs; cell n_ab
// counts dyads moving from state a to state b.
struct BlockTransitionCounts {
  struct Cells {
    std::uint64_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    std::uint64_t total() const { return n00 + n01 + n10 + n11; }
  };

  int K = 0;
  std::vector<Cells> cells;  // unordered pairs (k,l), k <= l

  // 1-based community labels; order of k and l does not matter.
  int pair_index(int k, int l) const;
  std::uint64_t total() const;
};

// Tallies over all transitions t = 1..T. Labels are 1-based with values in 1..K.
BlockTransitionCounts transition_tallies(const NetworkSeries& series,
                                         const std::vector<int>& z, int K);

// Tallies for the single transition y_{t-1} -> y_t, t in 1..T.
BlockTransitionCounts transition_tallies_at(const NetworkSeries& series,
                                            const std::vector<int>& z, int K, int t);

// Per-dyad transition counts over t = 1..T, flat over dyads i < j.
struct DyadHistory {
  int n = 0;
  int T = 0;
  std::vector<std::uint32_t> prev_edges;  // transitions with y_{t-1} = 1
  std::vector<std::uint32_t> persisted;   // 1 -> 1
  std::vector<std::uint32_t> formed;      // 0 -> 1
  std::vector<std::uint32_t> stable;      // unchanged in either state

  static DyadHistory from_series(const NetworkSeries& series);
};

}  // namespace tergmix
