#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bwset {

// One conditional-branch event: static branch address plus resolved direction.
struct BranchRecord {
  std::uint64_t pc = 0;
  bool taken = false;

  friend bool operator==(const BranchRecord&, const BranchRecord&) = default;
};

// Per-trace bookkeeping carried alongside the record stream.
struct TraceMeta {
  std::string trace_id;
  std::uint64_t record_count = 0;
  std::string source_tag;
};

// Root of the library's error hierarchy.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed file content; carries the byte offset where parsing failed.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}
  std::uint64_t byte_offset() const { return byte_offset_; }

private:
  std::uint64_t byte_offset_;
};

// File ended mid-record; reports how many complete records were read.
class TruncationError : public Error {
public:
  TruncationError(const std::string& what, std::uint64_t complete_records)
      : Error(what), complete_records_(complete_records) {}
  std::uint64_t complete_records() const { return complete_records_; }

private:
  std::uint64_t complete_records_;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// Prediction stream that does not line up 1:1 with the record stream.
class AlignmentError : public Error {
public:
  AlignmentError(const std::string& what, std::uint64_t index)
      : Error(what), index_(index) {}
  std::uint64_t index() const { return index_; }

private:
  std::uint64_t index_;
};

// Operation precondition violated (empty input, zero counts, ...).
class ContractError : public Error {
public:
  using Error::Error;
};

// Invalid user-supplied specification; names the offending field.
class ValidationError : public Error {
public:
  ValidationError(const std::string& what, std::string field)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

// Aggregation join failure (per-trace rows without matching partners).
class JoinError : public Error {
public:
  using Error::Error;
};

}  // namespace bwset
