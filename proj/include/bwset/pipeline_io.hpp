#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bwset/analysis.hpp"
#include "bwset/characterization.hpp"
#include "bwset/predictors.hpp"
#include "bwset/types.hpp"

namespace bwset {

// File emission and re-ingestion for the pipeline outputs. All writers
// produce deterministic bytes for a fixed input: fixed float formatting,
// explicit row ordering, truncating writes.

namespace detail {

inline std::string fmt_f(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

inline void check_csv_safe(const std::string& s, const char* what) {
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw ContractError(std::string{what} + " must not contain commas or newlines: " + s);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  return out;
}

inline nlohmann::json config_to_json(const ProfileConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"global_bits", c.global_bits},
          {"local_bits", c.local_bits},
          {"theta", c.theta}};
}

}  // namespace detail

inline constexpr const char* kSummariesCsvHeader =
    "trace_id,mode,N,M,theta,bwset_size,coverage,predictability,size_bin,pred_bin,"
    "taken_rate,transition_rate,shannon_entropy,linear_entropy";

inline void write_summaries_csv(const std::vector<BwsetSummary>& summaries,
                                const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << kSummariesCsvHeader << "\n";
  for (const auto& s : summaries) {
    detail::check_csv_safe(s.trace_id, "trace_id");
    out << s.trace_id << ',' << to_string(s.config.mode) << ',' << s.config.global_bits << ','
        << s.config.local_bits << ',' << detail::fmt_f(s.config.theta) << ',' << s.bwset_size << ','
        << detail::fmt_f(s.coverage) << ',' << detail::fmt_f(s.predictability) << ','
        << to_string(s.size_bin) << ',' << to_string(s.pred_bin) << ','
        << detail::fmt_f(s.baselines.taken_rate) << ',' << detail::fmt_f(s.baselines.transition_rate)
        << ',' << detail::fmt_f(s.baselines.shannon_entropy) << ','
        << detail::fmt_f(s.baselines.linear_entropy) << "\n";
  }
}

inline void write_summaries_json(const std::vector<BwsetSummary>& summaries,
                                 const std::filesystem::path& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : summaries) {
    arr.push_back({{"trace_id", s.trace_id},
                   {"config", detail::config_to_json(s.config)},
                   {"bwset_size", s.bwset_size},
                   {"coverage", s.coverage},
                   {"predictability", s.predictability},
                   {"size_bin", to_string(s.size_bin)},
                   {"pred_bin", to_string(s.pred_bin)},
                   {"taken_rate", s.baselines.taken_rate},
                   {"transition_rate", s.baselines.transition_rate},
                   {"shannon_entropy", s.baselines.shannon_entropy},
                   {"linear_entropy", s.baselines.linear_entropy}});
  }
  auto out = detail::open_out(path);
  out << arr.dump(2) << "\n";
}

inline std::vector<BwsetSummary> read_summaries_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summaries file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSummariesCsvHeader)
    throw FormatError("unexpected summaries.csv header", 0);
  std::vector<BwsetSummary> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 14) throw FormatError("summaries.csv row has wrong field count", 0);
    BwsetSummary s;
    s.trace_id = f[0];
    s.config.mode = profile_mode_from_string(f[1]);
    s.config.global_bits = static_cast<unsigned>(std::strtoul(f[2].c_str(), nullptr, 10));
    s.config.local_bits = static_cast<unsigned>(std::strtoul(f[3].c_str(), nullptr, 10));
    s.config.theta = std::strtod(f[4].c_str(), nullptr);
    s.bwset_size = std::strtoull(f[5].c_str(), nullptr, 10);
    s.coverage = std::strtod(f[6].c_str(), nullptr);
    s.predictability = std::strtod(f[7].c_str(), nullptr);
    s.size_bin = assign_size_bin(s.bwset_size);
    s.pred_bin = assign_pred_bin(s.predictability);
    s.baselines.taken_rate = std::strtod(f[10].c_str(), nullptr);
    s.baselines.transition_rate = std::strtod(f[11].c_str(), nullptr);
    s.baselines.shannon_entropy = std::strtod(f[12].c_str(), nullptr);
    s.baselines.linear_entropy = std::strtod(f[13].c_str(), nullptr);
    out.push_back(std::move(s));
  }
  return out;
}

inline constexpr const char* kResultsCsvHeader =
    "trace_id,kind,branches,mispredicts,mpkb,accuracy_pct";

inline void write_results_csv(const std::vector<PredictorResult>& results,
                              const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << kResultsCsvHeader << "\n";
  for (const auto& r : results) {
    detail::check_csv_safe(r.trace_id, "trace_id");
    out << r.trace_id << ',' << r.kind << ',' << r.branches << ',' << r.mispredicts << ','
        << detail::fmt_f(r.mpkb) << ',' << detail::fmt_f(r.accuracy_pct) << "\n";
  }
}

inline std::vector<PredictorResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsCsvHeader)
    throw FormatError("unexpected results.csv header", 0);
  std::vector<PredictorResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 6) throw FormatError("results.csv row has wrong field count", 0);
    PredictorResult r;
    r.trace_id = f[0];
    r.kind = f[1];
    r.branches = std::strtoull(f[2].c_str(), nullptr, 10);
    r.mispredicts = std::strtoull(f[3].c_str(), nullptr, 10);
    r.mpkb = std::strtod(f[4].c_str(), nullptr);
    r.accuracy_pct = std::strtod(f[5].c_str(), nullptr);
    out.push_back(std::move(r));
  }
  return out;
}

inline constexpr const char* kReportCsvHeader =
    "table,bin,trace_count,mean_projection,median_projection,predictor,mean_mpkb,"
    "mean_accuracy_pct,value";

// One CSV + one JSON per config, plus per-predictor plot series
// (x = bin label, y = mean MPKB) for each bin table. Empty bins appear in the
// CSV with count 0 and no means, and are skipped in plot data.
inline void emit_report(const CorrelationReport& report, const std::filesystem::path& dir) {
  const std::string token = report.config.token();
  {
    auto out = detail::open_out(dir / ("report_" + token + ".csv"));
    out << kReportCsvHeader << "\n";
    if (report.corpus_size > 0) {
      for (const auto& row : report.per_size_bin) {
        if (row.trace_count == 0) {
          out << "size," << to_string(row.bin) << ",0,,,,,,\n";
          continue;
        }
        for (const auto& st : row.per_predictor)
          out << "size," << to_string(row.bin) << ',' << row.trace_count << ",,," << st.kind << ','
              << detail::fmt_f(st.mean_mpkb) << ',' << detail::fmt_f(st.mean_accuracy_pct) << ",\n";
      }
      for (const auto& row : report.per_pred_bin) {
        if (row.trace_count == 0) {
          out << "pred," << to_string(row.bin) << ",0,,,,,,\n";
          continue;
        }
        for (const auto& st : row.per_predictor)
          out << "pred," << to_string(row.bin) << ',' << row.trace_count << ','
              << detail::fmt_f(row.mean_projection) << ',' << detail::fmt_f(row.median_projection)
              << ',' << st.kind << ',' << detail::fmt_f(st.mean_mpkb) << ','
              << detail::fmt_f(st.mean_accuracy_pct) << ",\n";
      }
      for (const auto& [kind, rho] : report.spearman_size_mpkb)
        out << "spearman_size_mpkb,,,,," << kind << ",,," << detail::fmt_f(rho) << "\n";
      for (const auto& [kind, rho] : report.spearman_pred_mpkb)
        out << "spearman_pred_mpkb,,,,," << kind << ",,," << detail::fmt_f(rho) << "\n";
    }
  }
  {
    nlohmann::json j;
    j["config"] = detail::config_to_json(report.config);
    j["corpus_size"] = report.corpus_size;
    j["predictors"] = report.predictor_kinds;
    auto size_bins = nlohmann::json::array();
    for (const auto& row : report.per_size_bin) {
      nlohmann::json r = {{"bin", to_string(row.bin)}, {"trace_count", row.trace_count}};
      if (row.trace_count > 0) {
        auto pp = nlohmann::json::array();
        for (const auto& st : row.per_predictor)
          pp.push_back({{"kind", st.kind},
                        {"mean_mpkb", st.mean_mpkb},
                        {"mean_accuracy_pct", st.mean_accuracy_pct}});
        r["per_predictor"] = pp;
      }
      size_bins.push_back(std::move(r));
    }
    j["size_bins"] = size_bins;
    auto pred_bins = nlohmann::json::array();
    for (const auto& row : report.per_pred_bin) {
      nlohmann::json r = {{"bin", to_string(row.bin)}, {"trace_count", row.trace_count}};
      if (row.trace_count > 0) {
        r["mean_projection"] = row.mean_projection;
        r["median_projection"] = row.median_projection;
        auto pp = nlohmann::json::array();
        for (const auto& st : row.per_predictor)
          pp.push_back({{"kind", st.kind},
                        {"mean_mpkb", st.mean_mpkb},
                        {"mean_accuracy_pct", st.mean_accuracy_pct}});
        r["per_predictor"] = pp;
      }
      pred_bins.push_back(std::move(r));
    }
    j["pred_bins"] = pred_bins;
    j["spearman_size_mpkb"] = report.spearman_size_mpkb;
    j["spearman_pred_mpkb"] = report.spearman_pred_mpkb;
    auto out = detail::open_out(dir / ("report_" + token + ".json"));
    out << j.dump(2) << "\n";
  }
  for (const auto& kind : report.predictor_kinds) {
    {
      auto out = detail::open_out(dir / ("plot_" + token + "_size_mpkb_" + kind + ".dat"));
      out << "# bin mean_mpkb\n";
      for (const auto& row : report.per_size_bin) {
        if (row.trace_count == 0) continue;
        for (const auto& st : row.per_predictor)
          if (st.kind == kind)
            out << to_string(row.bin) << ' ' << detail::fmt_f(st.mean_mpkb) << "\n";
      }
    }
    {
      auto out = detail::open_out(dir / ("plot_" + token + "_pred_mpkb_" + kind + ".dat"));
      out << "# bin mean_mpkb\n";
      for (const auto& row : report.per_pred_bin) {
        if (row.trace_count == 0) continue;
        for (const auto& st : row.per_predictor)
          if (st.kind == kind)
            out << to_string(row.bin) << ' ' << detail::fmt_f(st.mean_mpkb) << "\n";
      }
    }
  }
}

}  // namespace bwset
