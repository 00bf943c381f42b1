#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bwset/characterization.hpp"
#include "bwset/predictors.hpp"
#include "bwset/types.hpp"

namespace bwset {

// Corpus-level aggregation: per-bin MPKB means, predictability projection vs
// measured accuracy, and rank correlations between the characterization
// parameters and the misprediction rate.

namespace detail {

// Average ranks (1-based), ties share the mean rank of their run.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace detail

// Spearman rank correlation with average ranks for ties. Returns 0 when
// either side has no rank variance (no monotone association measurable).
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ContractError("spearman: input lengths differ");
  if (xs.size() < 2) throw ContractError("spearman: need at least 2 points");
  auto rx = detail::average_ranks(xs);
  auto ry = detail::average_ranks(ys);
  const std::size_t n = rx.size();
  double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = rx[i] - mean;
    double dy = ry[i] - mean;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

struct PredictorBinStat {
  std::string kind;
  double mean_mpkb = 0.0;
  double mean_accuracy_pct = 0.0;
};

struct SizeBinRow {
  SizeBin bin = SizeBin::kLow1;
  std::uint64_t trace_count = 0;
  std::vector<PredictorBinStat> per_predictor;  // empty when trace_count == 0
};

struct PredBinRow {
  PredBin bin = PredBin::kVeryLow1;
  std::uint64_t trace_count = 0;
  double mean_projection = 0.0;
  double median_projection = 0.0;
  std::vector<PredictorBinStat> per_predictor;
};

struct CorrelationReport {
  ProfileConfig config;
  std::uint64_t corpus_size = 0;
  std::vector<std::string> predictor_kinds;
  std::vector<SizeBinRow> per_size_bin;  // all 7 bins, fixed order; empty report if corpus empty
  std::vector<PredBinRow> per_pred_bin;  // all 9 bins
  std::map<std::string, double> spearman_size_mpkb;  // per predictor kind
  std::map<std::string, double> spearman_pred_mpkb;
};

// Joins per-trace summaries (all sharing one profile config) with predictor
// results by trace_id and aggregates per bin. Traces missing a predictor
// result (or results without a summary) abort with the orphan list.
inline CorrelationReport bin_aggregate(std::span<const BwsetSummary> summaries,
                                       std::span<const PredictorResult> results) {
  CorrelationReport report;
  report.corpus_size = summaries.size();
  if (summaries.empty()) return report;
  report.config = summaries.front().config;
  for (const auto& s : summaries)
    if (!(s.config == report.config))
      throw ContractError("bin_aggregate: summaries span multiple profile configs");

  std::map<std::string, std::map<std::string, const PredictorResult*>> by_trace;
  for (const auto& r : results) by_trace[r.trace_id][r.kind] = &r;

  std::map<std::string, bool> kinds_seen;
  for (const auto& r : results) kinds_seen[r.kind] = true;
  for (const auto& [kind, _] : kinds_seen) report.predictor_kinds.push_back(kind);

  std::vector<std::string> orphans;
  for (const auto& s : summaries) {
    auto it = by_trace.find(s.trace_id);
    if (it == by_trace.end() || it->second.size() != report.predictor_kinds.size())
      orphans.push_back(s.trace_id);
  }
  std::map<std::string, bool> summary_ids;
  for (const auto& s : summaries) summary_ids[s.trace_id] = true;
  for (const auto& [trace_id, _] : by_trace)
    if (!summary_ids.count(trace_id)) orphans.push_back(trace_id);
  if (!orphans.empty()) {
    std::string msg = "bin_aggregate: orphan trace_ids:";
    for (const auto& id : orphans) msg += " " + id;
    throw JoinError(msg);
  }

  auto stats_for = [&](const std::vector<const BwsetSummary*>& members) {
    std::vector<PredictorBinStat> out;
    for (const auto& kind : report.predictor_kinds) {
      PredictorBinStat st;
      st.kind = kind;
      double mpkb = 0.0, acc = 0.0;
      for (const auto* s : members) {
        const PredictorResult* r = by_trace.at(s->trace_id).at(kind);
        mpkb += r->mpkb;
        acc += r->accuracy_pct;
      }
      st.mean_mpkb = mpkb / static_cast<double>(members.size());
      st.mean_accuracy_pct = acc / static_cast<double>(members.size());
      out.push_back(std::move(st));
    }
    return out;
  };

  for (SizeBin bin : kAllSizeBins) {
    SizeBinRow row;
    row.bin = bin;
    std::vector<const BwsetSummary*> members;
    for (const auto& s : summaries)
      if (s.size_bin == bin) members.push_back(&s);
    row.trace_count = members.size();
    if (!members.empty()) row.per_predictor = stats_for(members);
    report.per_size_bin.push_back(std::move(row));
  }

  for (PredBin bin : kAllPredBins) {
    PredBinRow row;
    row.bin = bin;
    std::vector<const BwsetSummary*> members;
    for (const auto& s : summaries)
      if (s.pred_bin == bin) members.push_back(&s);
    row.trace_count = members.size();
    if (!members.empty()) {
      std::vector<double> projections;
      for (const auto* s : members) projections.push_back(s->predictability);
      row.mean_projection =
          std::accumulate(projections.begin(), projections.end(), 0.0) / projections.size();
      row.median_projection = detail::median(projections);
      row.per_predictor = stats_for(members);
    }
    report.per_pred_bin.push_back(std::move(row));
  }

  if (summaries.size() >= 2) {
    std::vector<double> sizes, preds;
    for (const auto& s : summaries) {
      sizes.push_back(static_cast<double>(s.bwset_size));
      preds.push_back(s.predictability);
    }
    for (const auto& kind : report.predictor_kinds) {
      std::vector<double> mpkbs;
      for (const auto& s : summaries) mpkbs.push_back(by_trace.at(s.trace_id).at(kind)->mpkb);
      report.spearman_size_mpkb[kind] = spearman(sizes, mpkbs);
      report.spearman_pred_mpkb[kind] = spearman(preds, mpkbs);
    }
  } else {
    for (const auto& kind : report.predictor_kinds) {
      report.spearman_size_mpkb[kind] = std::numeric_limits<double>::quiet_NaN();
      report.spearman_pred_mpkb[kind] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return report;
}

}  // namespace bwset
