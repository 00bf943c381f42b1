#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bwset/predictors.hpp"
#include "bwset/profiler.hpp"
#include "bwset/trace_io.hpp"
#include "bwset/types.hpp"

namespace bwset {

// Run manifest: trace sources, the profile-config sweep, the predictor list,
// and output placement. JSON on disk; relative paths resolve against the
// manifest file's directory.

struct RunManifest {
  std::vector<std::filesystem::path> trace_paths;
  std::vector<SyntheticSpec> synthetics;
  std::vector<ProfileConfig> configs;
  std::vector<PredictorConfig> predictors;
  std::filesystem::path output_dir = "bwset_out";
  unsigned threads = 0;  // 0 = hardware concurrency
  std::uint64_t rng_seed = 0;
  bool dump_profiles = false;
  bool write_synthetic_traces = false;

  void validate() const {
    if (trace_paths.empty() && synthetics.empty())
      throw ValidationError("manifest needs at least one trace source", "traces");
    if (configs.empty()) throw ValidationError("manifest needs at least one profile config", "configs");
    if (predictors.empty())
      throw ValidationError("manifest needs at least one predictor", "predictors");
    for (const auto& c : configs) c.validate();
    for (const auto& p : predictors) p.validate();
    for (const auto& s : synthetics) s.validate();
  }
};

// The full default sweep: PC-only, global tuples for N in {8,16,24,32,48,64},
// and global-local tuples for N in {8,16,24,32} x M in {4,8,16,24}.
inline std::vector<ProfileConfig> default_sweep(double theta = 0.95) {
  std::vector<ProfileConfig> out;
  out.push_back(ProfileConfig{ProfileMode::kPcOnly, 0, 0, theta});
  for (unsigned n : {8u, 16u, 24u, 32u, 48u, 64u})
    out.push_back(ProfileConfig{ProfileMode::kGlobalTuple, n, 0, theta});
  for (unsigned n : {8u, 16u, 24u, 32u})
    for (unsigned m : {4u, 8u, 16u, 24u})
      out.push_back(ProfileConfig{ProfileMode::kGlobalLocalTuple, n, m, theta});
  return out;
}

inline std::vector<PredictorConfig> default_predictors() {
  std::vector<PredictorConfig> out(4);
  out[0].kind = PredictorKind::kSmith;
  out[1].kind = PredictorKind::kGshare;
  out[2].kind = PredictorKind::kPerceptron;
  out[3].kind = PredictorKind::kTage;
  return out;
}

// Per-branch biases with alternating direction: even branches taken-biased,
// odd branches not-taken-biased. Every branch has predictability p.
inline std::vector<double> alternating_bias(std::uint32_t branches, double p) {
  std::vector<double> out(branches);
  for (std::uint32_t i = 0; i < branches; ++i) out[i] = (i % 2 == 0) ? p : 1.0 - p;
  return out;
}

// Per-branch biases with a seeded pseudo-random direction per branch. Every
// branch has predictability p; the direction mix keeps table aliasing between
// neighbouring branches destructive rather than accidentally constructive.
inline std::vector<double> mixed_direction_bias(std::uint32_t branches, double p,
                                                std::uint64_t seed) {
  std::vector<double> out(branches);
  for (std::uint32_t i = 0; i < branches; ++i) {
    std::uint64_t x = seed ^ i;
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    out[i] = ((x ^ (x >> 31)) & 1) ? 1.0 - p : p;
  }
  return out;
}

// Small fixed corpus spanning working-set sizes, bias levels, random and
// loop-pattern behavior. Used by the paper-sweep preset.
inline std::vector<SyntheticSpec> standard_synthetic_corpus(std::uint64_t seed,
                                                            std::uint64_t records = 50'000) {
  std::vector<SyntheticSpec> out;
  auto add = [&](SyntheticSpec s) {
    s.total_records = records;
    s.rng_seed = seed + out.size() + 1;
    out.push_back(std::move(s));
  };

  for (std::uint32_t n : {48u, 480u, 4800u}) {
    SyntheticSpec s;
    s.trace_id = "ws" + std::to_string(n);
    s.source_tag = "size_spread";
    s.num_static_branches = n;
    s.bias_per_branch.assign(n, 0.98);
    add(std::move(s));
  }
  for (int pct : {55, 70, 85, 95, 100}) {
    SyntheticSpec s;
    s.trace_id = "bias" + std::to_string(pct);
    s.source_tag = "bias_sweep";
    s.num_static_branches = 64;
    s.bias_per_branch.assign(64, pct / 100.0);
    add(std::move(s));
  }
  {
    SyntheticSpec s;
    s.trace_id = "rand50";
    s.source_tag = "random";
    s.num_static_branches = 16;
    s.bias_per_branch.assign(16, 0.5);
    add(std::move(s));
  }
  {
    SyntheticSpec s;
    s.trace_id = "loops";
    s.source_tag = "loop_patterns";
    s.num_static_branches = 4;
    s.bias_per_branch.assign(4, 0.5);  // unused: every branch carries a pattern
    s.pattern_branches = {{0, "TN"}, {1, "TTN"}, {2, "TTTTN"}, {3, "TTTTTTTN"}};
    add(std::move(s));
  }
  return out;
}

inline RunManifest paper_sweep_manifest(const std::filesystem::path& output_dir,
                                        std::uint64_t seed = 42) {
  RunManifest m;
  m.synthetics = standard_synthetic_corpus(seed);
  m.configs = default_sweep();
  m.predictors = default_predictors();
  m.output_dir = output_dir;
  m.rng_seed = seed;
  m.write_synthetic_traces = true;
  return m;
}

// ---------------------------------------------------------------------------
// JSON parsing.

namespace detail {

using json = nlohmann::json;

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open json file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("invalid json in " + path.string() + ": " + e.what(), 0);
  }
}

inline SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec s;
  try {
    if (j.contains("trace_id")) s.trace_id = j.at("trace_id").get<std::string>();
    s.num_static_branches = j.at("num_static_branches").get<std::uint32_t>();
    if (j.contains("bias_per_branch")) {
      s.bias_per_branch = j.at("bias_per_branch").get<std::vector<double>>();
    } else if (j.contains("bias")) {
      s.bias_per_branch.assign(s.num_static_branches, j.at("bias").get<double>());
    }
    if (j.contains("pattern_branches")) {
      for (const auto& p : j.at("pattern_branches")) {
        PatternBranch pb;
        pb.index = p.at("index").get<std::uint32_t>();
        pb.pattern = p.at("pattern").get<std::string>();
        s.pattern_branches.push_back(std::move(pb));
      }
    }
    s.total_records = j.at("total_records").get<std::uint64_t>();
    if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (j.contains("round_robin")) s.round_robin = j.at("round_robin").get<bool>();
    if (j.contains("source_tag")) s.source_tag = j.at("source_tag").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string{"bad synthetic spec: "} + e.what(), "synthetics");
  }
  s.validate();
  return s;
}

inline ProfileConfig profile_config_from_json(const json& j) {
  ProfileConfig c;
  try {
    c.mode = profile_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("global_bits")) c.global_bits = j.at("global_bits").get<unsigned>();
    if (j.contains("local_bits")) c.local_bits = j.at("local_bits").get<unsigned>();
    if (j.contains("theta")) c.theta = j.at("theta").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string{"bad profile config: "} + e.what(), "configs");
  }
  c.validate();
  return c;
}

inline PredictorConfig predictor_config_from_json(const json& j) {
  PredictorConfig c;
  try {
    c.kind = predictor_kind_from_string(j.at("kind").get<std::string>());
    auto opt = [&](const char* key, unsigned& slot) {
      if (j.contains(key)) slot = j.at(key).get<unsigned>();
    };
    switch (c.kind) {
      case PredictorKind::kSmith:
        opt("index_bits", c.smith.index_bits);
        break;
      case PredictorKind::kGshare:
        opt("index_bits", c.gshare.index_bits);
        opt("history_bits", c.gshare.history_bits);
        break;
      case PredictorKind::kPerceptron:
        opt("row_bits", c.perceptron.row_bits);
        opt("global_history", c.perceptron.global_history);
        opt("global_segments", c.perceptron.global_segments);
        opt("local_history", c.perceptron.local_history);
        opt("weight_bits", c.perceptron.weight_bits);
        break;
      case PredictorKind::kTage:
        opt("bimodal_bits", c.tage.bimodal_bits);
        opt("num_tables", c.tage.num_tables);
        opt("entry_bits", c.tage.entry_bits);
        opt("tag_bits", c.tage.tag_bits);
        opt("counter_bits", c.tage.counter_bits);
        opt("useful_bits", c.tage.useful_bits);
        opt("min_history", c.tage.min_history);
        opt("max_history", c.tage.max_history);
        opt("aging_log2", c.tage.aging_log2);
        break;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string{"bad predictor config: "} + e.what(), "predictors");
  }
  c.validate();
  return c;
}

}  // namespace detail

// Synthetic spec files accept a single spec object, a bare array of specs, or
// {"traces": [...]}.
inline std::vector<SyntheticSpec> parse_synthetic_spec_file(const std::filesystem::path& path) {
  auto j = detail::load_json_file(path);
  std::vector<SyntheticSpec> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(detail::synthetic_spec_from_json(item));
  } else if (j.contains("traces")) {
    for (const auto& item : j.at("traces")) out.push_back(detail::synthetic_spec_from_json(item));
  } else {
    out.push_back(detail::synthetic_spec_from_json(j));
  }
  if (out.empty()) throw ValidationError("spec file contains no traces", "traces");
  return out;
}

inline RunManifest parse_manifest(const std::filesystem::path& path) {
  auto j = detail::load_json_file(path);
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path{"."};
  RunManifest m;
  try {
    if (j.contains("traces")) {
      for (const auto& t : j.at("traces")) {
        std::filesystem::path p = t.get<std::string>();
        m.trace_paths.push_back(p.is_absolute() ? p : base / p);
      }
    }
    if (j.contains("synthetics"))
      for (const auto& s : j.at("synthetics"))
        m.synthetics.push_back(detail::synthetic_spec_from_json(s));

    double theta = j.value("theta", 0.95);
    if (j.contains("configs"))
      for (const auto& c : j.at("configs"))
        m.configs.push_back(detail::profile_config_from_json(c));
    if (m.configs.empty() || j.value("default_sweep", false)) {
      auto sweep = default_sweep(theta);
      m.configs.insert(m.configs.end(), sweep.begin(), sweep.end());
    }

    if (j.contains("predictors"))
      for (const auto& p : j.at("predictors"))
        m.predictors.push_back(detail::predictor_config_from_json(p));
    if (m.predictors.empty() || j.value("default_predictors", false)) {
      auto defaults = default_predictors();
      m.predictors.insert(m.predictors.end(), defaults.begin(), defaults.end());
    }

    if (j.contains("output_dir")) {
      std::filesystem::path p = j.at("output_dir").get<std::string>();
      m.output_dir = p.is_absolute() ? p : base / p;
    } else {
      m.output_dir = base / "bwset_out";
    }
    m.threads = j.value("threads", 0u);
    m.rng_seed = j.value("rng_seed", std::uint64_t{0});
    m.dump_profiles = j.value("dump_profiles", false);
    m.write_synthetic_traces = j.value("write_synthetic_traces", false);
  } catch (const detail::json::exception& e) {
    throw ValidationError(std::string{"bad manifest: "} + e.what(), "manifest");
  }
  m.validate();
  return m;
}

}  // namespace bwset
