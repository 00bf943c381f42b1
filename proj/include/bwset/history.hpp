#pragma once

#include <cstdint>
#include <unordered_map>

#include "bwset/types.hpp"

namespace bwset {

// Shift-register branch histories, updated once per retired record in trace
// order. Convention: newest outcome in the least significant bit, taken = 1,
// fresh registers read as all zeros.

class GlobalHistory {
public:
  static constexpr unsigned kMaxBits = 64;

  void update(bool taken) { bits_ = (bits_ << 1) | static_cast<std::uint64_t>(taken); }

  // Last n outcomes, newest in the LSB.
  std::uint64_t extract(unsigned n) const {
    if (n > kMaxBits) throw ConfigError("global history length exceeds 64");
    if (n == kMaxBits) return bits_;
    return bits_ & ((std::uint64_t{1} << n) - 1);
  }

  std::uint64_t raw() const { return bits_; }

private:
  std::uint64_t bits_ = 0;
};

// One register per distinct pc, allocated on first update. Unbounded: this is
// an offline profiler, not a hardware table.
class LocalHistoryTable {
public:
  static constexpr unsigned kMaxBits = 24;

  void update(std::uint64_t pc, bool taken) {
    auto& reg = regs_[pc];
    reg = ((reg << 1) | static_cast<std::uint32_t>(taken)) & kMask;
  }

  std::uint32_t extract(std::uint64_t pc, unsigned m) const {
    if (m > kMaxBits) throw ConfigError("local history length exceeds 24");
    auto it = regs_.find(pc);
    if (it == regs_.end()) return 0;
    return it->second & ((std::uint32_t{1} << m) - 1);
  }

  std::size_t tracked_pcs() const { return regs_.size(); }

private:
  static constexpr std::uint32_t kMask = (std::uint32_t{1} << kMaxBits) - 1;
  std::unordered_map<std::uint64_t, std::uint32_t> regs_;
};

struct HistorySnapshot {
  std::uint64_t global_bits = 0;
  std::uint32_t local_bits = 0;
};

// History values visible to the branch about to execute; its own outcome is
// not included. Call update() exactly once afterwards to retire the outcome.
inline HistorySnapshot snapshot(const GlobalHistory& gh, const LocalHistoryTable& lht,
                                std::uint64_t pc, unsigned n, unsigned m) {
  return HistorySnapshot{gh.extract(n), lht.extract(pc, m)};
}

inline void update(GlobalHistory& gh, LocalHistoryTable& lht, std::uint64_t pc, bool taken) {
  gh.update(taken);
  lht.update(pc, taken);
}

}  // namespace bwset
