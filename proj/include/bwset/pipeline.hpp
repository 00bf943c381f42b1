#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bwset/analysis.hpp"
#include "bwset/characterization.hpp"
#include "bwset/manifest.hpp"
#include "bwset/pipeline_io.hpp"
#include "bwset/predictors.hpp"
#include "bwset/profiler.hpp"
#include "bwset/trace_io.hpp"

namespace bwset {

// End-to-end orchestration of the characterization pipeline:
// load or synthesize traces, simulate every predictor, profile every config,
// aggregate per-config reports, and emit the output files.

struct TraceFailure {
  std::string trace_id;
  std::string message;
};

struct PipelineOutput {
  std::vector<BwsetSummary> summaries;      // trace-major, manifest config order within
  std::vector<PredictorResult> results;     // trace-major, manifest predictor order within
  std::vector<CorrelationReport> reports;   // one per profile config
  std::vector<TraceFailure> failures;
};

// BWSET_THREADS env var wins over the manifest; 0 means hardware concurrency.
inline unsigned effective_threads(unsigned requested) {
  if (const char* env = std::getenv("BWSET_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

namespace detail {

struct TraceBundle {
  std::string trace_id;
  std::vector<BwsetSummary> summaries;
  std::vector<PredictorResult> results;
  std::vector<std::pair<std::string, std::string>> profile_dumps;  // (token, csv body)
  bool failed = false;
  std::string failure_message;
};

// One task = one trace: every predictor and every profile config over it.
// The first predictor's prediction stream feeds the per-tuple misprediction
// counters.
inline TraceBundle process_trace(const RunManifest& manifest, std::size_t trace_index) {
  TraceBundle bundle;
  const std::size_t n_paths = manifest.trace_paths.size();
  try {
    std::vector<BranchRecord> records;
    if (trace_index < n_paths) {
      const auto& path = manifest.trace_paths[trace_index];
      auto [recs, meta] = path.extension() == ".csv" ? read_csv_trace(path) : read_trace(path);
      records = std::move(recs);
      bundle.trace_id = meta.trace_id;
    } else {
      const SyntheticSpec& spec = manifest.synthetics[trace_index - n_paths];
      bundle.trace_id = spec.trace_id;
      records = generate_synthetic(spec);
      if (manifest.write_synthetic_traces) {
        TraceMeta meta{spec.trace_id, records.size(), spec.source_tag};
        auto dir = manifest.output_dir / "traces";
        std::filesystem::create_directories(dir);
        write_trace(records, meta, dir / (spec.trace_id + ".bwt"));
      }
    }

    std::vector<bool> first_stream;
    for (std::size_t p = 0; p < manifest.predictors.size(); ++p) {
      auto [result, stream] = run_predictor(records, manifest.predictors[p], bundle.trace_id);
      bundle.results.push_back(std::move(result));
      if (p == 0) first_stream = std::move(stream);
    }

    const std::vector<bool>* attached = records.empty() ? nullptr : &first_stream;
    for (const auto& config : manifest.configs) {
      ProfileRun run = profile_trace(records, config, attached);
      bundle.summaries.push_back(summarize(run, bundle.trace_id));
      if (manifest.dump_profiles) {
        std::ostringstream os;
        dump_profile(run, os);
        bundle.profile_dumps.emplace_back(config.token(), os.str());
      }
    }
  } catch (const std::exception& e) {
    if (bundle.trace_id.empty()) {
      bundle.trace_id = trace_index < n_paths
                            ? manifest.trace_paths[trace_index].stem().string()
                            : manifest.synthetics[trace_index - n_paths].trace_id;
    }
    bundle.failed = true;
    bundle.failure_message = e.what();
    bundle.summaries.clear();
    bundle.results.clear();
    bundle.profile_dumps.clear();
  }
  return bundle;
}

}  // namespace detail

// Runs the whole manifest and writes all output files under
// manifest.output_dir. Per-trace failures are recorded and skipped; results
// are assembled in manifest order regardless of scheduling.
inline PipelineOutput run_characterize(const RunManifest& manifest) {
  manifest.validate();
  std::filesystem::create_directories(manifest.output_dir);

  const std::size_t n_traces = manifest.trace_paths.size() + manifest.synthetics.size();
  std::vector<detail::TraceBundle> bundles(n_traces);

  unsigned threads = std::min<unsigned>(effective_threads(manifest.threads),
                                        static_cast<unsigned>(n_traces));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n_traces; ++i) bundles[i] = detail::process_trace(manifest, i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < n_traces; i = next.fetch_add(1))
        bundles[i] = detail::process_trace(manifest, i);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  PipelineOutput out;
  for (auto& b : bundles) {
    if (b.failed) {
      out.failures.push_back(TraceFailure{b.trace_id, b.failure_message});
      continue;
    }
    out.summaries.insert(out.summaries.end(), b.summaries.begin(), b.summaries.end());
    out.results.insert(out.results.end(), b.results.begin(), b.results.end());
    if (!b.profile_dumps.empty()) {
      auto dir = manifest.output_dir / "profiles";
      std::filesystem::create_directories(dir);
      for (const auto& [token, body] : b.profile_dumps) {
        std::ofstream f(dir / (b.trace_id + "_" + token + ".csv"), std::ios::trunc);
        f << body;
      }
    }
  }

  for (const auto& config : manifest.configs) {
    std::vector<BwsetSummary> group;
    for (const auto& s : out.summaries)
      if (s.config == config) group.push_back(s);
    out.reports.push_back(bin_aggregate(group, out.results));
    out.reports.back().config = config;  // keep config for empty groups too
  }

  write_summaries_csv(out.summaries, manifest.output_dir / "summaries.csv");
  write_summaries_json(out.summaries, manifest.output_dir / "summaries.json");
  write_results_csv(out.results, manifest.output_dir / "results.csv");
  auto reports_dir = manifest.output_dir / "reports";
  std::filesystem::create_directories(reports_dir);
  for (const auto& report : out.reports) emit_report(report, reports_dir);

  if (!out.failures.empty()) {
    std::ofstream log(manifest.output_dir / "errors.log", std::ios::trunc);
    for (const auto& f : out.failures) log << f.trace_id << ": " << f.message << "\n";
  }
  return out;
}

// Rebuilds the aggregate reports from previously written per-trace rows.
inline std::vector<CorrelationReport> report_from_dir(const std::filesystem::path& dir) {
  auto summaries = read_summaries_csv(dir / "summaries.csv");
  auto results = read_results_csv(dir / "results.csv");

  std::vector<ProfileConfig> configs;
  for (const auto& s : summaries) {
    bool known = false;
    for (const auto& c : configs)
      if (c == s.config) known = true;
    if (!known) configs.push_back(s.config);
  }

  std::vector<CorrelationReport> reports;
  auto reports_dir = dir / "reports";
  std::filesystem::create_directories(reports_dir);
  for (const auto& config : configs) {
    std::vector<BwsetSummary> group;
    for (const auto& s : summaries)
      if (s.config == config) group.push_back(s);
    reports.push_back(bin_aggregate(group, results));
    reports.back().config = config;
    emit_report(reports.back(), reports_dir);
  }
  return reports;
}

}  // namespace bwset
