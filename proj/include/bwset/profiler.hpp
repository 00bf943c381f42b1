#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bwset/history.hpp"
#include "bwset/types.hpp"

namespace bwset {

// Single-pass tuple profiler. A branch context is the pc alone, the pc plus
// N bits of global history, or the pc plus N global and M local history bits.
// For every distinct context the profiler accumulates occurrence, taken and
// (when a prediction stream is attached) misprediction counts.

enum class ProfileMode { kPcOnly, kGlobalTuple, kGlobalLocalTuple };

inline const char* to_string(ProfileMode m) {
  switch (m) {
    case ProfileMode::kPcOnly: return "pc";
    case ProfileMode::kGlobalTuple: return "global";
    case ProfileMode::kGlobalLocalTuple: return "global_local";
  }
  return "?";
}

inline ProfileMode profile_mode_from_string(const std::string& s) {
  if (s == "pc" || s == "pc_only") return ProfileMode::kPcOnly;
  if (s == "global" || s == "global_tuple") return ProfileMode::kGlobalTuple;
  if (s == "global_local" || s == "global_local_tuple") return ProfileMode::kGlobalLocalTuple;
  throw ConfigError("unknown profile mode: " + s);
}

struct ProfileConfig {
  ProfileMode mode = ProfileMode::kPcOnly;
  unsigned global_bits = 0;  // N
  unsigned local_bits = 0;   // M
  double theta = 0.95;       // cumulative-occurrence threshold for the working set

  // Range checks only. The standard sweep grids (N in {8,16,24,32,48,64},
  // M in {4,8,16,24}) are applied by the manifest defaults, not enforced
  // here, so scenario tests can profile with shorter histories.
  void validate() const {
    switch (mode) {
      case ProfileMode::kPcOnly:
        if (global_bits != 0 || local_bits != 0)
          throw ConfigError("pc mode takes no history bits");
        break;
      case ProfileMode::kGlobalTuple:
        if (global_bits < 1 || global_bits > GlobalHistory::kMaxBits)
          throw ConfigError("global tuple mode needs 1..64 global history bits");
        if (local_bits != 0) throw ConfigError("global tuple mode takes no local history bits");
        break;
      case ProfileMode::kGlobalLocalTuple:
        if (global_bits < 1 || global_bits > GlobalHistory::kMaxBits)
          throw ConfigError("global-local tuple mode needs 1..64 global history bits");
        if (local_bits < 1 || local_bits > LocalHistoryTable::kMaxBits)
          throw ConfigError("global-local tuple mode needs 1..24 local history bits");
        break;
    }
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  }

  // File-name token, e.g. "pc", "global_24g", "global_local_16g_8l";
  // a non-default theta is appended as e.g. "_t90".
  std::string token() const {
    std::string t = to_string(mode);
    if (mode != ProfileMode::kPcOnly) t += "_" + std::to_string(global_bits) + "g";
    if (mode == ProfileMode::kGlobalLocalTuple) t += "_" + std::to_string(local_bits) + "l";
    if (theta != 0.95) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "_t%g", theta * 100.0);
      t += buf;
    }
    return t;
  }

  friend bool operator==(const ProfileConfig&, const ProfileConfig&) = default;
};

struct TupleKey {
  std::uint64_t pc = 0;
  std::uint64_t global_bits = 0;
  std::uint32_t local_bits = 0;

  friend auto operator<=>(const TupleKey&, const TupleKey&) = default;
};

struct TupleKeyHash {
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }
  std::size_t operator()(const TupleKey& k) const {
    return static_cast<std::size_t>(mix(k.pc ^ mix(k.global_bits ^ mix(k.local_bits))));
  }
};

struct TupleStats {
  std::uint64_t occurrence = 0;
  std::uint64_t taken = 0;
  std::uint64_t mispredict = 0;
};

struct PcStats {
  bool seen_taken = false;
  bool seen_not_taken = false;
  bool has_last = false;
  bool last_outcome = false;

  bool is_dynamic() const { return seen_taken && seen_not_taken; }
};

struct ProfileRun {
  ProfileConfig config;
  std::unordered_map<TupleKey, TupleStats, TupleKeyHash> table;
  std::unordered_map<std::uint64_t, PcStats> per_pc;
  std::uint64_t total_occurrences = 0;
  std::uint64_t taken_occurrences = 0;
  std::uint64_t transition_count = 0;  // per-pc consecutive pairs whose outcomes differ

  std::uint64_t static_branch_count() const { return per_pc.size(); }

  // Consecutive same-pc occurrence pairs, the transition-rate denominator.
  std::uint64_t transition_pairs() const { return total_occurrences - per_pc.size(); }
};

inline ProfileRun profile_trace(std::span<const BranchRecord> records, const ProfileConfig& config,
                                const std::vector<bool>* predictions = nullptr) {
  config.validate();
  if (predictions && predictions->size() != records.size()) {
    std::uint64_t index = std::min<std::uint64_t>(predictions->size(), records.size());
    throw AlignmentError("prediction stream misaligned with record stream at index " +
                             std::to_string(index),
                         index);
  }

  ProfileRun run;
  run.config = config;
  GlobalHistory gh;
  LocalHistoryTable lht;
  const bool track_local = config.local_bits > 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const BranchRecord& rec = records[i];
    auto snap = snapshot(gh, lht, rec.pc, config.global_bits, config.local_bits);
    TupleKey key{rec.pc, snap.global_bits, snap.local_bits};
    TupleStats& st = run.table[key];
    ++st.occurrence;
    if (rec.taken) ++st.taken;
    if (predictions && (*predictions)[i] != rec.taken) ++st.mispredict;

    PcStats& pcs = run.per_pc[rec.pc];
    if (rec.taken)
      pcs.seen_taken = true;
    else
      pcs.seen_not_taken = true;
    if (pcs.has_last && pcs.last_outcome != rec.taken) ++run.transition_count;
    pcs.has_last = true;
    pcs.last_outcome = rec.taken;

    ++run.total_occurrences;
    if (rec.taken) ++run.taken_occurrences;
    gh.update(rec.taken);
    if (track_local) lht.update(rec.pc, rec.taken);
  }
  return run;
}

// (static, dynamic) pc counts; a pc is dynamic once both directions were seen.
inline std::pair<std::uint64_t, std::uint64_t> dynamic_static_split(const ProfileRun& run) {
  std::uint64_t dynamic = 0;
  for (const auto& [pc, st] : run.per_pc)
    if (st.is_dynamic()) ++dynamic;
  return {run.per_pc.size() - dynamic, dynamic};
}

// Table entries sorted by descending occurrence, ties by ascending key.
inline std::vector<std::pair<TupleKey, TupleStats>> sorted_tuples(const ProfileRun& run) {
  std::vector<std::pair<TupleKey, TupleStats>> out(run.table.begin(), run.table.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second.occurrence != b.second.occurrence) return a.second.occurrence > b.second.occurrence;
    return a.first < b.first;
  });
  return out;
}

// Profile dump: `pc,global_bits,local_bits,occurrence,taken,mispredict`,
// hex for pc and bit fields, sorted by descending occurrence then key.
inline void dump_profile(const ProfileRun& run, std::ostream& os) {
  os << "pc,global_bits,local_bits,occurrence,taken,mispredict\n";
  char buf[160];
  for (const auto& [key, st] : sorted_tuples(run)) {
    std::snprintf(buf, sizeof(buf), "0x%llx,0x%llx,0x%lx,%llu,%llu,%llu\n",
                  static_cast<unsigned long long>(key.pc),
                  static_cast<unsigned long long>(key.global_bits),
                  static_cast<unsigned long>(key.local_bits),
                  static_cast<unsigned long long>(st.occurrence),
                  static_cast<unsigned long long>(st.taken),
                  static_cast<unsigned long long>(st.mispredict));
    os << buf;
  }
}

}  // namespace bwset
