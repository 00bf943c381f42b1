#pragma once

// Shared helpers and independent oracle implementations used by the test
// suites. The oracles deliberately avoid the library's code paths: they keep
// full materialized state (outcome lists, sorted copies) and recompute
// everything from first principles.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "bwset/profiler.hpp"
#include "bwset/types.hpp"

namespace testutil {

inline std::vector<bwset::BranchRecord> records_from(
    std::initializer_list<std::pair<std::uint64_t, int>> items) {
  std::vector<bwset::BranchRecord> out;
  for (const auto& [pc, taken] : items) out.push_back({pc, taken != 0});
  return out;
}

// Random trace over `pcs` distinct branches with per-branch random bias.
inline std::vector<bwset::BranchRecord> random_trace(std::mt19937_64& rng, std::size_t pcs,
                                                     std::size_t length) {
  std::vector<double> bias(pcs);
  for (auto& b : bias) b = static_cast<double>(rng() % 1000) / 999.0;
  std::vector<bwset::BranchRecord> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    std::size_t idx = rng() % pcs;
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.push_back({0x1000 + 8 * idx, u < bias[idx]});
  }
  return out;
}

// --- working-set oracle -----------------------------------------------------

struct OracleTuple {
  bwset::TupleKey key;
  std::uint64_t occurrence;
};

// Exhaustive minimal covering prefix: sort descending by occurrence (ties by
// ascending key), accumulate until the cumulative count strictly exceeds
// theta * total.
inline std::vector<bwset::TupleKey> oracle_bwset(std::vector<OracleTuple> tuples, double theta) {
  std::sort(tuples.begin(), tuples.end(), [](const OracleTuple& a, const OracleTuple& b) {
    if (a.occurrence != b.occurrence) return a.occurrence > b.occurrence;
    return a.key < b.key;
  });
  std::uint64_t total = 0;
  for (const auto& t : tuples) total += t.occurrence;
  double cutoff = theta * static_cast<double>(total);
  std::vector<bwset::TupleKey> out;
  std::uint64_t cum = 0;
  for (const auto& t : tuples) {
    out.push_back(t.key);
    cum += t.occurrence;
    if (static_cast<double>(cum) > cutoff) break;
  }
  return out;
}

// --- rank-correlation oracle ------------------------------------------------

inline std::vector<double> oracle_ranks(const std::vector<double>& xs) {
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t below = 0, equal = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] < xs[i]) ++below;
      if (xs[j] == xs[i]) ++equal;
    }
    ranks[i] = static_cast<double>(below) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

inline double oracle_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto rx = oracle_ranks(xs);
  auto ry = oracle_ranks(ys);
  double n = static_cast<double>(xs.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  return cov / std::sqrt(vx * vy);
}

// --- history oracle ----------------------------------------------------------

// Keeps the complete outcome sequence and recomputes any window by slicing.
struct HistoryOracle {
  std::vector<bool> global;
  std::map<std::uint64_t, std::vector<bool>> local;

  void update(std::uint64_t pc, bool taken) {
    global.push_back(taken);
    local[pc].push_back(taken);
  }

  static std::uint64_t window(const std::vector<bool>& outcomes, unsigned n) {
    std::uint64_t bits = 0;
    std::size_t len = outcomes.size();
    // newest outcome lands in the LSB
    for (unsigned i = 0; i < n && i < len; ++i)
      bits |= static_cast<std::uint64_t>(outcomes[len - 1 - i]) << i;
    return bits;
  }

  std::uint64_t global_window(unsigned n) const { return window(global, n); }

  std::uint64_t local_window(std::uint64_t pc, unsigned m) const {
    auto it = local.find(pc);
    if (it == local.end()) return 0;
    return window(it->second, m);
  }
};

// --- tiny smith oracle --------------------------------------------------------

// Independent 2-bit-counter state machine over `entries` counters indexed by
// (pc >> 2) & (entries - 1), counters start at weakly-not-taken.
struct SmithOracle {
  std::vector<int> counters;

  explicit SmithOracle(std::size_t entries) : counters(entries, 1) {}

  bool predict(std::uint64_t pc) const { return counters[(pc >> 2) & (counters.size() - 1)] >= 2; }

  void train(std::uint64_t pc, bool taken) {
    int& c = counters[(pc >> 2) & (counters.size() - 1)];
    c = taken ? std::min(c + 1, 3) : std::max(c - 1, 0);
  }
};

}  // namespace testutil
