#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bwset/profiler.hpp"
#include "bwset/types.hpp"

namespace bwset {

// Post-processing of a ProfileRun into the two characterization parameters
// (working-set size and weighted predictability), the baseline metrics, and
// the size/predictability bin labels.

struct BwsetEntry {
  TupleKey key;
  TupleStats stats;
};

// Minimal prefix, under descending-occurrence order (ties by ascending key),
// whose cumulative occurrence strictly exceeds theta * total. With theta = 1
// no prefix qualifies and the whole table is returned.
inline std::vector<BwsetEntry> extract_bwset(const ProfileRun& run) {
  if (run.total_occurrences == 0) throw ContractError("cannot extract a working set from an empty trace");
  auto sorted = sorted_tuples(run);
  const double cutoff = run.config.theta * static_cast<double>(run.total_occurrences);
  std::vector<BwsetEntry> out;
  out.reserve(sorted.size());
  std::uint64_t cumulative = 0;
  for (const auto& [key, st] : sorted) {
    out.push_back(BwsetEntry{key, st});
    cumulative += st.occurrence;
    if (static_cast<double>(cumulative) > cutoff) break;
  }
  return out;
}

// Accuracy of an oracle that always guesses this context's majority outcome.
inline double tuple_predictability(const TupleStats& stats) {
  if (stats.occurrence == 0) throw ContractError("tuple_predictability: zero occurrence count");
  std::uint64_t majority = std::max(stats.taken, stats.occurrence - stats.taken);
  return static_cast<double>(majority) / static_cast<double>(stats.occurrence);
}

// Occurrence-weighted mean of tuple predictability over the working set only.
// Weighted sum of occ * (majority/occ) telescopes to integer sums, so this is
// exact up to one final division.
inline double trace_predictability(std::span<const BwsetEntry> bwset) {
  if (bwset.empty()) throw ContractError("trace_predictability: empty working set");
  std::uint64_t occ = 0;
  std::uint64_t majority = 0;
  for (const auto& e : bwset) {
    if (e.stats.occurrence == 0) throw ContractError("trace_predictability: zero occurrence entry");
    occ += e.stats.occurrence;
    majority += std::max(e.stats.taken, e.stats.occurrence - e.stats.taken);
  }
  return static_cast<double>(majority) / static_cast<double>(occ);
}

enum class SizeBin { kLow1, kLow2, kMedium1, kMedium2, kHigh1, kHigh2, kHigh3 };
enum class PredBin {
  kVeryLow1,
  kLow1,
  kLow2,
  kLow3,
  kMedium1,
  kMedium2,
  kHigh1,
  kHigh2,
  kHigh3
};

inline constexpr std::array<SizeBin, 7> kAllSizeBins = {
    SizeBin::kLow1, SizeBin::kLow2, SizeBin::kMedium1, SizeBin::kMedium2,
    SizeBin::kHigh1, SizeBin::kHigh2, SizeBin::kHigh3};

inline constexpr std::array<PredBin, 9> kAllPredBins = {
    PredBin::kVeryLow1, PredBin::kLow1, PredBin::kLow2,  PredBin::kLow3, PredBin::kMedium1,
    PredBin::kMedium2,  PredBin::kHigh1, PredBin::kHigh2, PredBin::kHigh3};

inline const char* to_string(SizeBin b) {
  switch (b) {
    case SizeBin::kLow1: return "BWSET-LOW1";
    case SizeBin::kLow2: return "BWSET-LOW2";
    case SizeBin::kMedium1: return "BWSET-MEDIUM1";
    case SizeBin::kMedium2: return "BWSET-MEDIUM2";
    case SizeBin::kHigh1: return "BWSET-HIGH1";
    case SizeBin::kHigh2: return "BWSET-HIGH2";
    case SizeBin::kHigh3: return "BWSET-HIGH3";
  }
  return "?";
}

inline const char* to_string(PredBin b) {
  switch (b) {
    case PredBin::kVeryLow1: return "Pred-VLOW1";
    case PredBin::kLow1: return "Pred-LOW1";
    case PredBin::kLow2: return "Pred-LOW2";
    case PredBin::kLow3: return "Pred-LOW3";
    case PredBin::kMedium1: return "Pred-MEDIUM1";
    case PredBin::kMedium2: return "Pred-MEDIUM2";
    case PredBin::kHigh1: return "Pred-HIGH1";
    case PredBin::kHigh2: return "Pred-HIGH2";
    case PredBin::kHigh3: return "Pred-HIGH3";
  }
  return "?";
}

// Exponential size buckets, half-open on the upper edge.
inline SizeBin assign_size_bin(std::uint64_t bwset_size) {
  if (bwset_size == 0) throw ContractError("assign_size_bin: working-set size must be >= 1");
  if (bwset_size < 100) return SizeBin::kLow1;
  if (bwset_size < 1'000) return SizeBin::kLow2;
  if (bwset_size < 10'000) return SizeBin::kMedium1;
  if (bwset_size < 100'000) return SizeBin::kMedium2;
  if (bwset_size < 1'000'000) return SizeBin::kHigh1;
  if (bwset_size < 10'000'000) return SizeBin::kHigh2;
  return SizeBin::kHigh3;
}

// Predictability buckets, half-open on the lower edge so that 1.0 lands in
// the top bin.
inline PredBin assign_pred_bin(double predictability) {
  if (!(predictability >= 0.5 && predictability <= 1.0))
    throw ContractError("assign_pred_bin: predictability must lie in [0.5, 1.0]");
  if (predictability < 0.75) return PredBin::kVeryLow1;
  if (predictability < 0.80) return PredBin::kLow1;
  if (predictability < 0.85) return PredBin::kLow2;
  if (predictability < 0.90) return PredBin::kLow3;
  if (predictability < 0.925) return PredBin::kMedium1;
  if (predictability < 0.95) return PredBin::kMedium2;
  if (predictability < 0.975) return PredBin::kHigh1;
  if (predictability < 0.99) return PredBin::kHigh2;
  return PredBin::kHigh3;
}

// Binary-outcome entropy of a per-context taken probability, in bits.
inline double binary_shannon_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

// 2*min(p, 1-p): 0 for a fully biased context, 1 for a random one. Identity:
// linear entropy == 2 * (1 - predictability) per context.
inline double linear_branch_entropy(double p) { return 2.0 * std::min(p, 1.0 - p); }

struct BaselineMetrics {
  double taken_rate = 0.0;
  double transition_rate = 0.0;
  double shannon_entropy = 0.0;  // binary outcome entropy, occurrence-weighted over the working set
  double linear_entropy = 0.0;   // occurrence-weighted over the working set
};

inline BaselineMetrics baseline_metrics(const ProfileRun& run, std::span<const BwsetEntry> bwset) {
  if (run.total_occurrences == 0) throw ContractError("baseline_metrics: empty run");
  BaselineMetrics m;
  m.taken_rate =
      static_cast<double>(run.taken_occurrences) / static_cast<double>(run.total_occurrences);
  const std::uint64_t pairs = run.transition_pairs();
  m.transition_rate =
      pairs == 0 ? 0.0 : static_cast<double>(run.transition_count) / static_cast<double>(pairs);

  double weight = 0.0;
  double shannon = 0.0;
  double linear = 0.0;
  for (const auto& e : bwset) {
    double occ = static_cast<double>(e.stats.occurrence);
    double p = static_cast<double>(e.stats.taken) / occ;
    shannon += occ * binary_shannon_entropy(p);
    linear += occ * linear_branch_entropy(p);
    weight += occ;
  }
  if (weight > 0.0) {
    m.shannon_entropy = shannon / weight;
    m.linear_entropy = linear / weight;
  }
  return m;
}

inline BaselineMetrics baseline_metrics(const ProfileRun& run) {
  auto bwset = extract_bwset(run);
  return baseline_metrics(run, bwset);
}

// Per-(trace, config) characterization row.
struct BwsetSummary {
  std::string trace_id;
  ProfileConfig config;
  std::uint64_t bwset_size = 0;
  double coverage = 0.0;  // fraction of total occurrences inside the working set
  double predictability = 0.0;
  SizeBin size_bin = SizeBin::kLow1;
  PredBin pred_bin = PredBin::kVeryLow1;
  BaselineMetrics baselines;
};

inline BwsetSummary summarize(const ProfileRun& run, const std::string& trace_id) {
  auto bwset = extract_bwset(run);
  BwsetSummary s;
  s.trace_id = trace_id;
  s.config = run.config;
  s.bwset_size = bwset.size();
  std::uint64_t covered = 0;
  for (const auto& e : bwset) covered += e.stats.occurrence;
  s.coverage = static_cast<double>(covered) / static_cast<double>(run.total_occurrences);
  s.predictability = trace_predictability(bwset);
  s.size_bin = assign_size_bin(s.bwset_size);
  s.pred_bin = assign_pred_bin(s.predictability);
  s.baselines = baseline_metrics(run, bwset);
  return s;
}

}  // namespace bwset
