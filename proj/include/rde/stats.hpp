#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rde/core.hpp"
#include "rde/run_record.hpp"

namespace rde {

// Two-sample Wilcoxon rank-sum comparison machinery.
//
// Ranks are midranks over the pooled sample. For pooled sizes up to 16 the
// two-sided p-value is exact: every assignment of pooled ranks to the first
// sample is enumerated and the tail counts of the rank-sum statistic are
// doubled (capped at 1). Larger pools use the normal approximation with the
// standard tie-corrected variance. A comparison is a WIN for the first
// sample when the test is significant and its median is smaller
// (minimization), a LOSS in the opposite case, and a TIE otherwise.

enum class Decision { Win, Loss, Tie };

inline std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::Win: return "WIN";
    case Decision::Loss: return "LOSS";
    case Decision::Tie: return "TIE";
  }
  return "?";
}

struct RankSumResult {
  double p_value = 1.0;
  Decision decision = Decision::Tie;
  bool exact = false;  // which branch produced the p-value
};

inline double sample_median(std::vector<double> v) {
  if (v.empty()) throw UsageError("sample_median: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

namespace detail {

struct PooledRanks {
  std::vector<double> ranks;  // midranks in pooled sorted order
  std::vector<int> labels;    // 0 = first sample, 1 = second
  double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

inline PooledRanks pooled_midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  PooledRanks out;
  out.ranks.resize(n);
  out.labels.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) out.ranks[k] = rank;
    const double t = static_cast<double>(j - i);
    out.tie_term += t * t * t - t;
    i = j;
  }
  for (std::size_t k = 0; k < n; ++k) out.labels[k] = pooled[k].second;
  return out;
}

}  // namespace detail

inline RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                       double alpha = 0.05) {
  if (a.size() < 3 || b.size() < 3)
    throw UsageError("wilcoxon_rank_sum: need at least 3 observations per sample");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;

  const detail::PooledRanks pooled = detail::pooled_midranks(a, b);
  double w = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (pooled.labels[k] == 0) w += pooled.ranks[k];

  RankSumResult result;
  if (n <= 16) {
    // Exact null distribution: sums of midranks are exact multiples of 1/2,
    // so the comparisons below involve no rounding.
    result.exact = true;
    std::uint64_t total = 0, count_le = 0, count_ge = 0;
    const std::uint32_t masks = 1u << n;
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != n1) continue;
      double ws = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        if (mask & (1u << k)) ws += pooled.ranks[k];
      ++total;
      if (ws <= w) ++count_le;
      if (ws >= w) ++count_ge;
    }
    result.p_value = std::min(
        1.0, 2.0 * static_cast<double>(std::min(count_le, count_ge)) /
                 static_cast<double>(total));
  } else {
    result.exact = false;
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    const double mean = dn1 * (dn + 1.0) / 2.0;
    const double variance =
        dn1 * dn2 / 12.0 * ((dn + 1.0) - pooled.tie_term / (dn * (dn - 1.0)));
    if (variance <= 0.0) {
      result.p_value = 1.0;  // pooled sample fully tied
    } else {
      const double z = (w - mean) / std::sqrt(variance);
      result.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
    }
  }

  if (result.p_value < alpha) {
    const double med_a = sample_median(std::vector<double>(a.begin(), a.end()));
    const double med_b = sample_median(std::vector<double>(b.begin(), b.end()));
    if (med_a < med_b)
      result.decision = Decision::Win;
    else if (med_a > med_b)
      result.decision = Decision::Loss;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Result aggregation.
// ---------------------------------------------------------------------------

// Final result of one run, keyed by its experimental cell.
struct RunSummaryRow {
  std::string function;
  RunMode mode = RunMode::OV;
  int tdiv_index = -1;  // index into the sweep; -1 for OV/CRV
  std::uint64_t seed = 0;
  double final_error = 0.0;
};

struct PairCell {
  std::string function;
  std::string pair;  // e.g. "CRV vs OV"; WIN means the first side is better
  double p_value = 1.0;
  bool exact = false;
  Decision decision = Decision::Tie;
};

struct SummaryReport {
  std::vector<std::string> functions;
  std::vector<PairCell> cells;
  std::map<std::string, std::pair<int, int>> totals;  // pair -> (wins, losses)
  std::map<std::string, int> best_tdiv;               // function -> sweep index
  std::vector<int> tdiv_best_counts;                  // per sweep position
  std::vector<std::string> gaps;                      // groups too thin to compare
};

inline std::string ratio_string(int wins, int losses) {
  return std::to_string(wins) + ":" + std::to_string(losses);
}

inline std::string tdiv_ratio_string(std::span<const int> counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out += ':';
    out += std::to_string(counts[i]);
  }
  return out;
}

// Builds the comparison tables: per function, the best sweep position
// is chosen for IRV by median final error (ties count every position), then
// pairwise rank-sum decisions are tallied into win:loss totals.
inline SummaryReport summarize(std::span<const RunSummaryRow> rows, std::size_t tdiv_count,
                               double alpha = 0.05) {
  SummaryReport report;
  report.tdiv_best_counts.assign(tdiv_count, 0);

  std::map<std::string, std::map<int, std::vector<double>>> by_function_group;
  for (const RunSummaryRow& r : rows) {
    // group key: -1 OV, -2 CRV, >= 0 IRV sweep position
    int key = r.mode == RunMode::OV ? -1 : r.mode == RunMode::CRV ? -2 : r.tdiv_index;
    by_function_group[r.function][key].push_back(r.final_error);
  }

  for (auto& [function, groups] : by_function_group) {
    report.functions.push_back(function);

    auto usable = [&](int key) -> const std::vector<double>* {
      auto it = groups.find(key);
      if (it == groups.end()) return nullptr;
      if (it->second.size() < 3) {
        report.gaps.push_back(function + "/" + (key == -1 ? "OV" : key == -2 ? "CRV" : "IRV[" + std::to_string(key) + "]") +
                              ": only " + std::to_string(it->second.size()) + " runs (need >= 3)");
        return nullptr;
      }
      return &it->second;
    };

    // best sweep position for IRV by median final error
    const std::vector<double>* irv = nullptr;
    if (tdiv_count > 0) {
      double best_median = std::numeric_limits<double>::infinity();
      int best_index = -1;
      std::vector<std::pair<int, double>> medians;
      for (std::size_t t = 0; t < tdiv_count; ++t) {
        const auto* sample = usable(static_cast<int>(t));
        if (!sample) continue;
        const double med = sample_median(*sample);
        medians.emplace_back(static_cast<int>(t), med);
        if (med < best_median) {
          best_median = med;
          best_index = static_cast<int>(t);
        }
      }
      if (best_index >= 0) {
        for (const auto& [t, med] : medians)
          if (med == best_median) report.tdiv_best_counts[static_cast<std::size_t>(t)] += 1;
        report.best_tdiv[function] = best_index;
        irv = &groups[best_index];
      }
    }

    const std::vector<double>* ov = usable(-1);
    const std::vector<double>* crv = usable(-2);

    auto compare = [&](const std::vector<double>* first, const std::vector<double>* second,
                       const std::string& label) {
      if (!first || !second) return;
      const RankSumResult r = wilcoxon_rank_sum(*first, *second, alpha);
      report.cells.push_back(PairCell{function, label, r.p_value, r.exact, r.decision});
      auto& [wins, losses] = report.totals[label];
      if (r.decision == Decision::Win) wins += 1;
      if (r.decision == Decision::Loss) losses += 1;
    };

    compare(crv, ov, "CRV vs OV");
    compare(irv, ov, "IRV vs OV");
    compare(irv, crv, "IRV vs CRV");
  }

  return report;
}

// ---------------------------------------------------------------------------
// Mean best-error traces for plotting.
// ---------------------------------------------------------------------------

// Best error at a given budget: the last sample at or before fes.
inline double error_at(std::span<const TracePoint> samples, std::uint64_t fes) {
  if (samples.empty()) throw UsageError("error_at: empty trace");
  double value = samples.front().best_error;
  for (const TracePoint& p : samples) {
    if (p.fes > fes) break;
    value = p.best_error;
  }
  return value;
}

// First-generation point plus one point per MFES/100 of budget.
inline std::vector<std::uint64_t> checkpoint_grid(std::uint64_t first_fes, std::uint64_t mfes) {
  std::vector<std::uint64_t> grid;
  grid.push_back(first_fes);
  const std::uint64_t step = std::max<std::uint64_t>(1, mfes / 100);
  for (std::uint64_t fes = step; fes <= mfes; fes += step)
    if (fes > first_fes) grid.push_back(fes);
  return grid;
}

struct MeanTrace {
  std::vector<std::uint64_t> fes;
  std::vector<double> mean_error;
};

inline MeanTrace mean_best_error_trace(std::span<const std::vector<TracePoint>> traces,
                                       std::uint64_t mfes) {
  if (traces.empty()) throw UsageError("mean_best_error_trace: no traces");
  std::uint64_t first = traces.front().front().fes;
  for (const auto& t : traces) first = std::min(first, t.front().fes);
  MeanTrace out;
  out.fes = checkpoint_grid(first, mfes);
  out.mean_error.reserve(out.fes.size());
  for (std::uint64_t fes : out.fes) {
    double sum = 0.0;
    for (const auto& t : traces) sum += error_at(t, fes);
    out.mean_error.push_back(sum / static_cast<double>(traces.size()));
  }
  return out;
}

}  // namespace rde
