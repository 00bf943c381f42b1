#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bwset/types.hpp"

namespace bwset {

// BWT1 trace container:
//   bytes 0..7   magic "BWTRACE1"
//   bytes 8..15  record count, little-endian u64
//   then fixed 9-byte records: 8-byte little-endian pc + 1 outcome byte
//   (0 = not taken, 1 = taken).

inline constexpr std::array<unsigned char, 8> kTraceMagic = {'B', 'W', 'T', 'R', 'A', 'C', 'E', '1'};
inline constexpr std::size_t kTraceHeaderBytes = 16;
inline constexpr std::size_t kTraceRecordBytes = 9;

namespace detail {

inline void put_u64_le(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

inline std::uint64_t get_u64_le(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

// Uniform double in [0, 1) from the top 53 bits of one engine draw. Hand-rolled
// so generated traces are stable across standard-library implementations.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline void write_trace(const std::vector<BranchRecord>& records, const TraceMeta& meta,
                        const std::filesystem::path& path) {
  if (meta.record_count != records.size())
    throw ContractError("write_trace: meta.record_count does not match the record sequence length");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open trace file for writing: " + path.string());

  unsigned char header[kTraceHeaderBytes];
  std::copy(kTraceMagic.begin(), kTraceMagic.end(), header);
  detail::put_u64_le(header + 8, records.size());
  out.write(reinterpret_cast<const char*>(header), kTraceHeaderBytes);

  constexpr std::size_t kFlushBytes = 1u << 20;
  std::vector<unsigned char> buf;
  buf.reserve(std::min(kTraceRecordBytes * records.size(), kFlushBytes + kTraceRecordBytes));
  for (const auto& r : records) {
    unsigned char rec[kTraceRecordBytes];
    detail::put_u64_le(rec, r.pc);
    rec[8] = r.taken ? 1 : 0;
    buf.insert(buf.end(), rec, rec + kTraceRecordBytes);
    if (buf.size() >= kFlushBytes) {
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  if (!buf.empty())
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// Incremental reader; next() yields records in file order.
class TraceReader {
public:
  explicit TraceReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open trace file: " + path.string());
    unsigned char header[kTraceHeaderBytes];
    in_.read(reinterpret_cast<char*>(header), kTraceHeaderBytes);
    if (in_.gcount() != static_cast<std::streamsize>(kTraceHeaderBytes))
      throw FormatError("trace header truncated at byte offset " + std::to_string(in_.gcount()),
                        static_cast<std::uint64_t>(in_.gcount()));
    if (!std::equal(kTraceMagic.begin(), kTraceMagic.end(), header)) {
      std::uint64_t off = 0;
      while (off < kTraceMagic.size() && header[off] == kTraceMagic[off]) ++off;
      throw FormatError("bad trace magic at byte offset " + std::to_string(off), off);
    }
    meta_.trace_id = path.stem().string();
    meta_.record_count = detail::get_u64_le(header + 8);
  }

  const TraceMeta& meta() const { return meta_; }

  // False once the declared record count has been consumed.
  bool next(BranchRecord& out) {
    if (read_ == meta_.record_count) return false;
    unsigned char rec[kTraceRecordBytes];
    in_.read(reinterpret_cast<char*>(rec), kTraceRecordBytes);
    if (in_.gcount() != static_cast<std::streamsize>(kTraceRecordBytes))
      throw TruncationError("trace truncated: " + std::to_string(read_) + " of " +
                                std::to_string(meta_.record_count) + " records are complete",
                            read_);
    if (rec[8] > 1)
      throw FormatError("invalid outcome byte at byte offset " +
                            std::to_string(kTraceHeaderBytes + read_ * kTraceRecordBytes + 8),
                        kTraceHeaderBytes + read_ * kTraceRecordBytes + 8);
    out.pc = detail::get_u64_le(rec);
    out.taken = rec[8] != 0;
    ++read_;
    return true;
  }

private:
  std::ifstream in_;
  TraceMeta meta_;
  std::uint64_t read_ = 0;
};

inline std::pair<std::vector<BranchRecord>, TraceMeta> read_trace(const std::filesystem::path& path) {
  TraceReader reader(path);
  std::vector<BranchRecord> records;
  records.reserve(reader.meta().record_count);
  BranchRecord r;
  while (reader.next(r)) records.push_back(r);
  return {std::move(records), reader.meta()};
}

// CSV import for hand-written traces: header `pc,taken`, pc in hex with 0x
// prefix, taken in {0,1}.
inline std::pair<std::vector<BranchRecord>, TraceMeta> read_csv_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open csv trace: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv trace is empty (missing header)", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "pc,taken") throw FormatError("csv header must be `pc,taken` (line 1)", 0);
  std::vector<BranchRecord> records;
  std::uint64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw FormatError("csv record missing comma (line " + std::to_string(lineno) + ")", lineno);
    std::string pc_str = line.substr(0, comma);
    std::string taken_str = line.substr(comma + 1);
    if (pc_str.rfind("0x", 0) != 0 && pc_str.rfind("0X", 0) != 0)
      throw FormatError("csv pc must have 0x prefix (line " + std::to_string(lineno) + ")", lineno);
    BranchRecord r;
    std::size_t used = 0;
    try {
      r.pc = std::stoull(pc_str.substr(2), &used, 16);
    } catch (const std::exception&) {
      throw FormatError("csv pc is not valid hex (line " + std::to_string(lineno) + ")", lineno);
    }
    if (used != pc_str.size() - 2)
      throw FormatError("csv pc is not valid hex (line " + std::to_string(lineno) + ")", lineno);
    if (taken_str == "1")
      r.taken = true;
    else if (taken_str == "0")
      r.taken = false;
    else
      throw FormatError("csv taken must be 0 or 1 (line " + std::to_string(lineno) + ")", lineno);
    records.push_back(r);
  }
  TraceMeta meta;
  meta.trace_id = path.stem().string();
  meta.record_count = records.size();
  return {std::move(records), std::move(meta)};
}

// ---------------------------------------------------------------------------
// Synthetic trace generation.

// Repeating outcome pattern attached to one static branch; occurrence i of
// that branch resolves to pattern[i mod pattern.size()].
struct PatternBranch {
  std::uint32_t index = 0;
  std::string pattern;  // 'T'/'1' = taken, 'N'/'0' = not taken
};

struct SyntheticSpec {
  std::string trace_id = "synthetic";
  std::uint32_t num_static_branches = 1;
  std::vector<double> bias_per_branch;  // P(taken), one per static branch
  std::vector<PatternBranch> pattern_branches;
  std::uint64_t total_records = 0;
  std::uint64_t rng_seed = 0;
  bool round_robin = false;  // default: uniform random branch selection
  std::string source_tag = "synthetic";

  void validate() const {
    if (num_static_branches == 0)
      throw ValidationError("num_static_branches must be positive", "num_static_branches");
    if (total_records == 0) throw ValidationError("total_records must be positive", "total_records");
    if (bias_per_branch.size() != num_static_branches)
      throw ValidationError("bias_per_branch length (" + std::to_string(bias_per_branch.size()) +
                                ") must equal num_static_branches (" +
                                std::to_string(num_static_branches) + ")",
                            "bias_per_branch");
    for (double b : bias_per_branch)
      if (!(b >= 0.0 && b <= 1.0))
        throw ValidationError("bias_per_branch entries must lie in [0,1]", "bias_per_branch");
    for (const auto& p : pattern_branches) {
      if (p.index >= num_static_branches)
        throw ValidationError("pattern branch index out of range", "pattern_branches");
      if (p.pattern.empty())
        throw ValidationError("pattern bit-strings must be non-empty", "pattern_branches");
      for (char c : p.pattern)
        if (c != 'T' && c != 't' && c != '1' && c != 'N' && c != 'n' && c != '0')
          throw ValidationError("pattern characters must be T/N or 1/0", "pattern_branches");
    }
  }
};

inline constexpr std::uint64_t kSyntheticPcBase = 0x10000;

inline std::uint64_t synthetic_pc(std::uint32_t branch_index) {
  return kSyntheticPcBase + 4ull * branch_index;
}

// Deterministic for a fixed seed. Per record: pick a branch (uniform draw
// unless round_robin), then resolve its outcome (pattern position, or one
// Bernoulli draw against the branch bias). Draw order is part of the format:
// golden traces depend on it.
inline std::vector<BranchRecord> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::uint32_t n = spec.num_static_branches;

  std::vector<std::vector<bool>> patterns(n);
  for (const auto& p : spec.pattern_branches) {
    std::vector<bool> bits;
    bits.reserve(p.pattern.size());
    for (char c : p.pattern) bits.push_back(c == 'T' || c == 't' || c == '1');
    patterns[p.index] = std::move(bits);
  }

  std::mt19937_64 rng(spec.rng_seed);
  std::vector<std::uint64_t> occurrences(n, 0);
  std::vector<BranchRecord> out;
  out.reserve(spec.total_records);
  for (std::uint64_t i = 0; i < spec.total_records; ++i) {
    std::uint32_t idx = spec.round_robin ? static_cast<std::uint32_t>(i % n)
                                         : static_cast<std::uint32_t>(rng() % n);
    bool taken;
    if (!patterns[idx].empty()) {
      const auto& pat = patterns[idx];
      taken = pat[occurrences[idx] % pat.size()];
    } else {
      taken = detail::uniform_unit(rng) < spec.bias_per_branch[idx];
    }
    ++occurrences[idx];
    out.push_back(BranchRecord{synthetic_pc(idx), taken});
  }
  return out;
}

}  // namespace bwset
