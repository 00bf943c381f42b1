#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bwset/types.hpp"

namespace bwset {

// Reference predictors simulated over a trace to produce MPKB numbers and a
// per-record prediction stream for the profiler. All state is owned by the
// predictor object; one instance per (trace, config) run.

enum class PredictorKind { kSmith, kGshare, kPerceptron, kTage };

inline const char* to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::kSmith: return "smith";
    case PredictorKind::kGshare: return "gshare";
    case PredictorKind::kPerceptron: return "perceptron";
    case PredictorKind::kTage: return "tage";
  }
  return "?";
}

inline PredictorKind predictor_kind_from_string(const std::string& s) {
  if (s == "smith") return PredictorKind::kSmith;
  if (s == "gshare") return PredictorKind::kGshare;
  if (s == "perceptron") return PredictorKind::kPerceptron;
  if (s == "tage") return PredictorKind::kTage;
  throw ConfigError("unknown predictor kind: " + s);
}

struct SmithConfig {
  unsigned index_bits = 12;
};

struct GshareConfig {
  unsigned index_bits = 14;
  unsigned history_bits = 14;
};

struct PerceptronConfig {
  unsigned row_bits = 10;        // log2 rows per feature table
  unsigned global_history = 32;  // global history bits, split across segment tables
  unsigned global_segments = 4;
  unsigned local_history = 8;  // per-pc local history bits (one feature table)
  unsigned weight_bits = 8;
};

struct TageConfig {
  unsigned bimodal_bits = 13;  // log2 entries of the 2-bit base predictor
  unsigned num_tables = 6;     // tagged components
  unsigned entry_bits = 10;    // log2 entries per tagged table
  unsigned tag_bits = 10;
  unsigned counter_bits = 3;  // signed prediction counter width
  unsigned useful_bits = 2;
  unsigned min_history = 8;  // geometric history lengths min_history..max_history
  unsigned max_history = 64;
  unsigned aging_log2 = 19;  // halve useful counters every 2^aging_log2 updates
};

struct PredictorConfig {
  PredictorKind kind = PredictorKind::kTage;
  SmithConfig smith;
  GshareConfig gshare;
  PerceptronConfig perceptron;
  TageConfig tage;

  std::string name() const { return to_string(kind); }

  void validate() const {
    switch (kind) {
      case PredictorKind::kSmith:
        if (smith.index_bits < 1 || smith.index_bits > 24)
          throw ConfigError("smith index_bits must lie in 1..24");
        break;
      case PredictorKind::kGshare:
        if (gshare.index_bits < 1 || gshare.index_bits > 24)
          throw ConfigError("gshare index_bits must lie in 1..24");
        if (gshare.history_bits > 64) throw ConfigError("gshare history_bits must lie in 0..64");
        break;
      case PredictorKind::kPerceptron: {
        const auto& p = perceptron;
        if (p.row_bits < 1 || p.row_bits > 20) throw ConfigError("perceptron row_bits must lie in 1..20");
        if (p.global_segments == 0 || p.global_history == 0 ||
            p.global_history % p.global_segments != 0)
          throw ConfigError("perceptron global_history must divide evenly into global_segments");
        if (p.global_history > 64) throw ConfigError("perceptron global_history must lie in 1..64");
        if (p.local_history > 32) throw ConfigError("perceptron local_history must lie in 0..32");
        if (p.weight_bits < 2 || p.weight_bits > 16)
          throw ConfigError("perceptron weight_bits must lie in 2..16");
        break;
      }
      case PredictorKind::kTage: {
        const auto& t = tage;
        if (t.bimodal_bits < 1 || t.bimodal_bits > 24)
          throw ConfigError("tage bimodal_bits must lie in 1..24");
        if (t.num_tables < 1 || t.num_tables > 16) throw ConfigError("tage num_tables must lie in 1..16");
        if (t.entry_bits < 1 || t.entry_bits > 24) throw ConfigError("tage entry_bits must lie in 1..24");
        if (t.tag_bits < 2 || t.tag_bits > 16) throw ConfigError("tage tag_bits must lie in 2..16");
        if (t.counter_bits < 2 || t.counter_bits > 8)
          throw ConfigError("tage counter_bits must lie in 2..8");
        if (t.useful_bits < 1 || t.useful_bits > 8) throw ConfigError("tage useful_bits must lie in 1..8");
        if (t.min_history < 1 || t.max_history > 64 || t.min_history > t.max_history)
          throw ConfigError("tage history range must satisfy 1 <= min <= max <= 64");
        if (t.num_tables > 1 && t.min_history == t.max_history)
          throw ConfigError("tage history lengths must strictly increase across tables");
        break;
      }
    }
  }
};

class Predictor {
public:
  virtual ~Predictor() = default;
  virtual bool predict(std::uint64_t pc) const = 0;
  virtual void train(std::uint64_t pc, bool taken, bool predicted) = 0;
  virtual std::string name() const = 0;
};

namespace detail {

// Branch addresses are byte addresses of 4-byte-aligned instructions.
inline std::uint64_t pc_index(std::uint64_t pc) { return pc >> 2; }

inline void bump2(std::uint8_t& ctr, bool taken) {
  if (taken) {
    if (ctr < 3) ++ctr;
  } else {
    if (ctr > 0) --ctr;
  }
}

inline std::uint64_t mask_bits(unsigned n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

// Fold the low `len` history bits into `width` bits by xor-ing chunks.
inline std::uint64_t fold(std::uint64_t hist, unsigned len, unsigned width) {
  std::uint64_t h = hist & mask_bits(len);
  std::uint64_t f = 0;
  for (unsigned b = 0; b < len; b += width) {
    f ^= h & mask_bits(width);
    h >>= width;
  }
  return f & mask_bits(width);
}

}  // namespace detail

// Table of 2-bit saturating counters indexed by pc bits; counters start
// weakly not-taken.
class SmithPredictor final : public Predictor {
public:
  explicit SmithPredictor(const SmithConfig& cfg)
      : mask_(detail::mask_bits(cfg.index_bits)), counters_(std::size_t{1} << cfg.index_bits, 1) {}

  bool predict(std::uint64_t pc) const override { return counters_[index(pc)] >= 2; }

  void train(std::uint64_t pc, bool taken, bool) override {
    detail::bump2(counters_[index(pc)], taken);
  }

  std::string name() const override { return "smith"; }

private:
  std::size_t index(std::uint64_t pc) const {
    return static_cast<std::size_t>(detail::pc_index(pc) & mask_);
  }

  std::uint64_t mask_;
  std::vector<std::uint8_t> counters_;
};

// Counters indexed by pc bits xor-ed with global history.
class GsharePredictor final : public Predictor {
public:
  explicit GsharePredictor(const GshareConfig& cfg)
      : index_mask_(detail::mask_bits(cfg.index_bits)),
        history_mask_(detail::mask_bits(cfg.history_bits)),
        counters_(std::size_t{1} << cfg.index_bits, 1) {}

  bool predict(std::uint64_t pc) const override { return counters_[index(pc)] >= 2; }

  void train(std::uint64_t pc, bool taken, bool) override {
    detail::bump2(counters_[index(pc)], taken);
    history_ = (history_ << 1) | static_cast<std::uint64_t>(taken);
  }

  std::string name() const override { return "gshare"; }

private:
  std::size_t index(std::uint64_t pc) const {
    return static_cast<std::size_t>((detail::pc_index(pc) ^ (history_ & history_mask_)) & index_mask_);
  }

  std::uint64_t index_mask_;
  std::uint64_t history_mask_;
  std::uint64_t history_ = 0;
  std::vector<std::uint8_t> counters_;
};

// Hashed perceptron: a bias table plus one weight table per feature (global
// history segments and the per-pc local history), each indexed by a hash of
// pc and the feature bits. Prediction is taken iff the weight sum is
// positive, so the zero-initialized predictor guesses not-taken.
class PerceptronPredictor final : public Predictor {
public:
  explicit PerceptronPredictor(const PerceptronConfig& cfg) : cfg_(cfg) {
    rows_ = std::size_t{1} << cfg.row_bits;
    row_mask_ = rows_ - 1;
    seg_bits_ = cfg.global_history / cfg.global_segments;
    weight_min_ = -(1 << (cfg.weight_bits - 1));
    weight_max_ = (1 << (cfg.weight_bits - 1)) - 1;
    unsigned history_sum = cfg.global_history + cfg.local_history;
    threshold_ = static_cast<int>(std::floor(1.93 * history_sum + 14.0));
    std::size_t tables = 1 + cfg.global_segments + (cfg.local_history > 0 ? 1 : 0);
    weights_.assign(tables, std::vector<int>(rows_, 0));
    local_history_.assign(rows_, 0);
  }

  bool predict(std::uint64_t pc) const override { return output(pc) > 0; }

  void train(std::uint64_t pc, bool taken, bool predicted) override {
    int y = output(pc);
    bool correct = predicted == taken;
    if (!correct || std::abs(y) <= threshold_) {
      int delta = taken ? 1 : -1;
      std::size_t t = 0;
      auto adjust = [&](std::size_t row) {
        int& w = weights_[t][row];
        w = std::clamp(w + delta, weight_min_, weight_max_);
        ++t;
      };
      adjust(bias_row(pc));
      for (unsigned s = 0; s < cfg_.global_segments; ++s) adjust(feature_row(pc, segment(s), s + 1));
      if (cfg_.local_history > 0)
        adjust(feature_row(pc, local_history_[bias_row(pc)], cfg_.global_segments + 1));
    }
    global_history_ = (global_history_ << 1) | static_cast<std::uint64_t>(taken);
    if (cfg_.local_history > 0) {
      std::uint32_t& lh = local_history_[bias_row(pc)];
      lh = static_cast<std::uint32_t>(((lh << 1) | (taken ? 1u : 0u)) &
                                      detail::mask_bits(cfg_.local_history));
    }
  }

  std::string name() const override { return "perceptron"; }

  int threshold() const { return threshold_; }

private:
  std::uint64_t segment(unsigned s) const {
    return (global_history_ >> (s * seg_bits_)) & detail::mask_bits(seg_bits_);
  }

  std::size_t bias_row(std::uint64_t pc) const {
    return static_cast<std::size_t>(detail::pc_index(pc) & row_mask_);
  }

  // Per-table salt keeps identical feature values in different tables from
  // landing on the same rows.
  std::size_t feature_row(std::uint64_t pc, std::uint64_t feature, std::size_t table) const {
    std::uint64_t h = hash_mix(detail::pc_index(pc) * 0x9e3779b97f4a7c15ull ^ feature ^
                               (static_cast<std::uint64_t>(table) << 56));
    return static_cast<std::size_t>(h & row_mask_);
  }

  static std::uint64_t hash_mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  int output(std::uint64_t pc) const {
    int sum = weights_[0][bias_row(pc)];
    std::size_t t = 1;
    for (unsigned s = 0; s < cfg_.global_segments; ++s, ++t)
      sum += weights_[t][feature_row(pc, segment(s), t)];
    if (cfg_.local_history > 0)
      sum += weights_[t][feature_row(pc, local_history_[bias_row(pc)], t)];
    return sum;
  }

  PerceptronConfig cfg_;
  std::size_t rows_ = 0;
  std::size_t row_mask_ = 0;
  unsigned seg_bits_ = 0;
  int weight_min_ = 0;
  int weight_max_ = 0;
  int threshold_ = 0;
  std::uint64_t global_history_ = 0;
  std::vector<std::vector<int>> weights_;     // [bias, global segments..., local]
  std::vector<std::uint32_t> local_history_;  // indexed like the bias table
};

// Parameterized TAGE: 2-bit bimodal base plus partially tagged tables indexed
// by geometrically increasing global history lengths. The longest matching
// tagged table provides the prediction, the bimodal otherwise. No statistical
// corrector or loop predictor.
class TagePredictor final : public Predictor {
public:
  static constexpr unsigned kMaxTables = 16;

  explicit TagePredictor(const TageConfig& cfg) : cfg_(cfg) {
    bimodal_mask_ = detail::mask_bits(cfg.bimodal_bits);
    bimodal_.assign(std::size_t{1} << cfg.bimodal_bits, 1);
    index_mask_ = detail::mask_bits(cfg.entry_bits);
    tag_mask_ = detail::mask_bits(cfg.tag_bits);
    ctr_min_ = -(1 << (cfg.counter_bits - 1));
    ctr_max_ = (1 << (cfg.counter_bits - 1)) - 1;
    useful_max_ = static_cast<std::uint8_t>((1u << cfg.useful_bits) - 1);
    aging_mask_ = (std::uint64_t{1} << cfg.aging_log2) - 1;

    // Geometric history lengths, forced strictly increasing after rounding.
    history_lengths_.resize(cfg.num_tables);
    for (unsigned i = 0; i < cfg.num_tables; ++i) {
      double len = cfg.num_tables == 1
                       ? cfg.min_history
                       : cfg.min_history *
                             std::pow(static_cast<double>(cfg.max_history) / cfg.min_history,
                                      static_cast<double>(i) / (cfg.num_tables - 1));
      history_lengths_[i] = static_cast<unsigned>(std::lround(len));
      if (i > 0 && history_lengths_[i] <= history_lengths_[i - 1])
        history_lengths_[i] = history_lengths_[i - 1] + 1;
    }
    if (history_lengths_.back() > 64)
      throw ConfigError("tage: geometric history lengths exceed 64 bits");
    tables_.assign(cfg.num_tables, std::vector<Entry>(std::size_t{1} << cfg.entry_bits));
  }

  bool predict(std::uint64_t pc) const override { return final_prediction(lookup(pc)); }

  void train(std::uint64_t pc, bool taken, bool predicted) override {
    Lookup l = lookup(pc);

    // A weak provider counter marks a (pseudo-)newly allocated entry; track
    // whether the alternate prediction serves those cases better.
    if (l.provider >= 0 && l.provider_weak && l.provider_pred != l.alt_pred) {
      if (l.alt_pred == taken) {
        if (use_alt_on_na_ < 7) ++use_alt_on_na_;
      } else {
        if (use_alt_on_na_ > -8) --use_alt_on_na_;
      }
    }

    // Allocate one longer-history entry on a misprediction; failed candidates
    // lose a useful point so stale entries eventually free up.
    if (predicted != taken && l.provider + 1 < static_cast<int>(cfg_.num_tables)) {
      int start = l.provider + 1;
      if (start + 1 < static_cast<int>(cfg_.num_tables) && (next_random() & 1)) ++start;
      bool allocated = false;
      for (int j = start; j < static_cast<int>(cfg_.num_tables); ++j) {
        Entry& e = tables_[j][l.index[j]];
        if (!e.valid || e.useful == 0) {
          e.valid = true;
          e.tag = l.tag[j];
          e.ctr = taken ? 0 : -1;
          e.useful = 0;
          ++allocations_;
          allocated = true;
          break;
        }
      }
      if (!allocated) {
        for (int j = l.provider + 1; j < static_cast<int>(cfg_.num_tables); ++j) {
          Entry& e = tables_[j][l.index[j]];
          if (e.useful > 0) --e.useful;
        }
      }
    }

    if (l.provider >= 0) {
      Entry& e = tables_[l.provider][l.index[l.provider]];
      // A weak wrong provider also trains its alternate so the fallback
      // stays warm.
      if (l.provider_weak && l.provider_pred != taken) {
        if (l.alt >= 0)
          bump_signed(tables_[l.alt][l.index[l.alt]].ctr, taken);
        else
          detail::bump2(bimodal_[bimodal_index(pc)], taken);
      }
      bump_signed(e.ctr, taken);
      if (l.provider_pred != l.alt_pred) {
        if (l.provider_pred == taken) {
          if (e.useful < useful_max_) ++e.useful;
        } else if (e.useful > 0) {
          --e.useful;
        }
      }
    } else {
      detail::bump2(bimodal_[bimodal_index(pc)], taken);
    }

    ++update_count_;
    if ((update_count_ & aging_mask_) == 0) {
      for (auto& table : tables_)
        for (auto& e : table) e.useful >>= 1;
    }
    history_ = (history_ << 1) | static_cast<std::uint64_t>(taken);
  }

  std::string name() const override { return "tage"; }

  std::uint64_t allocations() const { return allocations_; }
  std::span<const unsigned> history_lengths() const { return history_lengths_; }

private:
  struct Entry {
    std::uint16_t tag = 0;
    std::int8_t ctr = 0;
    std::uint8_t useful = 0;
    bool valid = false;
  };

  struct Lookup {
    int provider = -1;
    int alt = -1;
    bool provider_pred = false;
    bool provider_weak = false;
    bool alt_pred = false;
    bool bimodal_pred = false;
    std::array<std::uint32_t, kMaxTables> index{};
    std::array<std::uint16_t, kMaxTables> tag{};
  };

  bool final_prediction(const Lookup& l) const {
    if (l.provider < 0) return l.bimodal_pred;
    if (l.provider_weak && use_alt_on_na_ >= 0) return l.alt_pred;
    return l.provider_pred;
  }

  std::size_t bimodal_index(std::uint64_t pc) const {
    return static_cast<std::size_t>(detail::pc_index(pc) & bimodal_mask_);
  }

  std::uint32_t table_index(std::uint64_t pc, unsigned t) const {
    std::uint64_t p = detail::pc_index(pc);
    std::uint64_t folded = detail::fold(history_, history_lengths_[t], cfg_.entry_bits);
    return static_cast<std::uint32_t>((p ^ (p >> (cfg_.entry_bits - (t % cfg_.entry_bits))) ^ folded) &
                                      index_mask_);
  }

  std::uint16_t table_tag(std::uint64_t pc, unsigned t) const {
    std::uint64_t p = detail::pc_index(pc);
    std::uint64_t f1 = detail::fold(history_, history_lengths_[t], cfg_.tag_bits);
    std::uint64_t f2 = detail::fold(history_, history_lengths_[t], cfg_.tag_bits - 1);
    return static_cast<std::uint16_t>((p ^ f1 ^ (f2 << 1)) & tag_mask_);
  }

  Lookup lookup(std::uint64_t pc) const {
    Lookup l;
    for (unsigned t = 0; t < cfg_.num_tables; ++t) {
      l.index[t] = table_index(pc, t);
      l.tag[t] = table_tag(pc, t);
    }
    l.bimodal_pred = bimodal_[bimodal_index(pc)] >= 2;
    for (int t = static_cast<int>(cfg_.num_tables) - 1; t >= 0; --t) {
      const Entry& e = tables_[t][l.index[t]];
      if (e.valid && e.tag == l.tag[t]) {
        if (l.provider < 0) {
          l.provider = t;
        } else {
          l.alt = t;
          break;
        }
      }
    }
    if (l.provider >= 0) {
      std::int8_t ctr = tables_[l.provider][l.index[l.provider]].ctr;
      l.provider_pred = ctr >= 0;
      l.provider_weak = ctr == 0 || ctr == -1;
    } else {
      l.provider_pred = l.bimodal_pred;
    }
    l.alt_pred = l.alt >= 0 ? tables_[l.alt][l.index[l.alt]].ctr >= 0 : l.bimodal_pred;
    return l;
  }

  void bump_signed(std::int8_t& ctr, bool taken) const {
    if (taken) {
      if (ctr < ctr_max_) ++ctr;
    } else {
      if (ctr > ctr_min_) --ctr;
    }
  }

  // Small deterministic generator for allocation-site randomization.
  std::uint64_t next_random() {
    rand_state_ = rand_state_ * 6364136223846793005ull + 1442695040888963407ull;
    return rand_state_ >> 33;
  }

  TageConfig cfg_;
  std::vector<unsigned> history_lengths_;
  std::uint64_t bimodal_mask_ = 0;
  std::uint64_t index_mask_ = 0;
  std::uint64_t tag_mask_ = 0;
  int ctr_min_ = 0;
  int ctr_max_ = 0;
  std::uint8_t useful_max_ = 0;
  std::uint64_t aging_mask_ = 0;
  std::vector<std::uint8_t> bimodal_;
  std::vector<std::vector<Entry>> tables_;
  std::uint64_t history_ = 0;
  std::uint64_t update_count_ = 0;
  std::uint64_t allocations_ = 0;
  std::int8_t use_alt_on_na_ = 0;
  std::uint64_t rand_state_ = 0x853c49e6748fea9bull;
};

inline std::unique_ptr<Predictor> make_predictor(const PredictorConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case PredictorKind::kSmith: return std::make_unique<SmithPredictor>(cfg.smith);
    case PredictorKind::kGshare: return std::make_unique<GsharePredictor>(cfg.gshare);
    case PredictorKind::kPerceptron: return std::make_unique<PerceptronPredictor>(cfg.perceptron);
    case PredictorKind::kTage: return std::make_unique<TagePredictor>(cfg.tage);
  }
  throw ConfigError("unknown predictor kind");
}

struct PredictorResult {
  std::string trace_id;
  std::string kind;
  std::uint64_t branches = 0;
  std::uint64_t mispredicts = 0;
  double mpkb = 0.0;
  double accuracy_pct = 100.0;
};

inline PredictorResult make_predictor_result(std::string trace_id, std::string kind,
                                             std::uint64_t branches, std::uint64_t mispredicts) {
  PredictorResult r;
  r.trace_id = std::move(trace_id);
  r.kind = std::move(kind);
  r.branches = branches;
  r.mispredicts = mispredicts;
  r.mpkb = branches == 0 ? 0.0
                         : 1000.0 * static_cast<double>(mispredicts) / static_cast<double>(branches);
  r.accuracy_pct = 100.0 - r.mpkb / 10.0;
  return r;
}

// Simulates one predictor over a trace; the returned stream is aligned 1:1
// with the records and suitable as a profiler attachment.
inline std::pair<PredictorResult, std::vector<bool>> run_predictor(
    std::span<const BranchRecord> records, const PredictorConfig& cfg, const std::string& trace_id) {
  auto predictor = make_predictor(cfg);
  std::vector<bool> stream;
  stream.reserve(records.size());
  std::uint64_t mispredicts = 0;
  for (const auto& rec : records) {
    bool guess = predictor->predict(rec.pc);
    stream.push_back(guess);
    if (guess != rec.taken) ++mispredicts;
    predictor->train(rec.pc, rec.taken, guess);
  }
  return {make_predictor_result(trace_id, cfg.name(), records.size(), mispredicts),
          std::move(stream)};
}

}  // namespace bwset
