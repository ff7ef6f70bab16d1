#include "cubelens/deviation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cubelens {

namespace {

constexpr double kMadScale = 1.4826;

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool SideMatches(OutlierSide side, double diff) {
  switch (side) {
    case OutlierSide::kBoth:
      return true;
    case OutlierSide::kPositive:
      return diff > 0.0;
    case OutlierSide::kNegative:
      return diff < 0.0;
  }
  return true;
}

}  // namespace

std::string_view DeviationKindName(DeviationKind kind) {
  return kind == DeviationKind::kRatio ? "ratio" : "poisson";
}

DeviationKind ParseDeviationKind(std::string_view name) {
  if (name == "ratio") return DeviationKind::kRatio;
  if (name == "poisson") return DeviationKind::kPoisson;
  throw std::invalid_argument("unknown deviation kind: " + std::string(name));
}

std::string_view SurvivalModeName(SurvivalMode mode) {
  return mode == SurvivalMode::kGreater ? "gt" : "geq";
}

SurvivalMode ParseSurvivalMode(std::string_view name) {
  if (name == "gt") return SurvivalMode::kGreater;
  if (name == "geq") return SurvivalMode::kGreaterOrEqual;
  throw std::invalid_argument("unknown survival mode: " + std::string(name));
}

std::string_view DeviationStatusName(DeviationStatus status) {
  switch (status) {
    case DeviationStatus::kFinite:
      return "finite";
    case DeviationStatus::kUnsupported:
      return "unsupported";
    case DeviationStatus::kCapped:
      return "capped";
  }
  return "finite";
}

std::string_view OutlierSideName(OutlierSide side) {
  switch (side) {
    case OutlierSide::kBoth:
      return "both";
    case OutlierSide::kPositive:
      return "positive";
    case OutlierSide::kNegative:
      return "negative";
  }
  return "both";
}

OutlierSide ParseOutlierSide(std::string_view name) {
  if (name == "both") return OutlierSide::kBoth;
  if (name == "positive") return OutlierSide::kPositive;
  if (name == "negative") return OutlierSide::kNegative;
  throw std::invalid_argument("unknown outlier side: " + std::string(name));
}

void OutlierPolicy::Validate() const {
  if (!(sigma_multiplier > 0.0) || !std::isfinite(sigma_multiplier)) {
    throw std::invalid_argument("sigma multiplier must be positive");
  }
}

Deviation DeviationRatio(std::uint64_t observed, double expected) {
  if (!(expected >= 0.0) || !std::isfinite(expected)) {
    throw std::invalid_argument("expected value must be finite and non-negative");
  }
  if (expected == 0.0) {
    if (observed == 0) return {1.0, DeviationStatus::kFinite};
    return {std::numeric_limits<double>::quiet_NaN(), DeviationStatus::kUnsupported};
  }
  return {static_cast<double>(observed) / expected, DeviationStatus::kFinite};
}

Deviation DeviationPoisson(std::uint64_t observed, double expected, SurvivalMode survival) {
  if (!(expected >= 0.0) || !std::isfinite(expected)) {
    throw std::invalid_argument("expected value must be finite and non-negative");
  }
  if (expected == 0.0) {
    if (observed == 0) return {0.0, DeviationStatus::kFinite};
    return {kDeviationCap, DeviationStatus::kCapped};
  }
  if (static_cast<double>(observed) <= expected) {
    return {LogPoissonCdf(observed, expected), DeviationStatus::kFinite};
  }
  const double log_tail = survival == SurvivalMode::kGreater
                              ? LogPoissonSurvival(observed, expected)
                              : LogPoissonSurvival(observed - 1, expected);
  return {-log_tail, DeviationStatus::kFinite};
}

Deviation ComputeDeviation(DeviationKind kind, std::uint64_t observed, double expected,
                           SurvivalMode survival) {
  return kind == DeviationKind::kRatio ? DeviationRatio(observed, expected)
                                       : DeviationPoisson(observed, expected, survival);
}

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

DeviationStats ComputeStats(std::span<const double> values, SpreadEstimator spread) {
  DeviationStats stats;
  stats.count = values.size();
  if (values.empty()) return stats;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  stats.mean = PairwiseSum(sorted) / n;
  std::vector<double> squares(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double d = sorted[i] - stats.mean;
    squares[i] = d * d;
  }
  std::sort(squares.begin(), squares.end());
  stats.std = std::sqrt(PairwiseSum(squares) / n);
  if (spread == SpreadEstimator::kMeanStd) {
    stats.center = stats.mean;
    stats.spread = stats.std;
  } else {
    stats.center = Median(sorted);
    std::vector<double> abs_dev(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) abs_dev[i] = std::fabs(sorted[i] - stats.center);
    stats.spread = kMadScale * Median(std::move(abs_dev));
  }
  return stats;
}

OutlierSet DetectOutliers(std::span<const EvaluatedCell> cells, const OutlierPolicy& policy) {
  policy.Validate();
  OutlierSet result;
  std::vector<double> finite;
  finite.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].deviation.finite()) {
      finite.push_back(cells[i].deviation.value);
    } else {
      result.excluded.push_back(i);
    }
  }
  result.stats = ComputeStats(finite, policy.spread);
  if (finite.size() < 2) {
    result.warning = "fewer than two finite deviations; no outliers flagged";
    return result;
  }
  if (result.stats.spread == 0.0) {
    result.warning = "all deviations identical (zero spread); no outliers flagged";
    return result;
  }
  const double threshold = policy.sigma_multiplier * result.stats.spread;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].deviation.finite()) continue;
    const double diff = cells[i].deviation.value - result.stats.center;
    if (std::fabs(diff) > threshold && SideMatches(policy.side, diff)) {
      result.outliers.push_back(i);
    }
  }
  std::stable_sort(result.outliers.begin(), result.outliers.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::fabs(cells[a].deviation.value - result.stats.center) >
                            std::fabs(cells[b].deviation.value - result.stats.center);
                   });
  return result;
}

std::vector<std::size_t> ContextEvaluation::OutlierIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].outlier) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(cells[a].deviation.value - stats.center) >
           std::fabs(cells[b].deviation.value - stats.center);
  });
  return out;
}

std::vector<std::size_t> ContextEvaluation::PositiveOutliers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].outlier && cells[i].sign > 0) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    return cells[a].deviation.value > cells[b].deviation.value;
  });
  return out;
}

ContextEvaluation EvaluateContext(const ExpectedField& field, DeviationKind kind,
                                  const OutlierPolicy& policy, SurvivalMode survival) {
  policy.Validate();
  ContextEvaluation eval;
  eval.observed_cube = field.observed;
  eval.kind = kind;
  eval.survival = survival;
  eval.policy = policy;
  eval.cells.reserve(field.cells.size());
  for (const auto& c : field.cells) {
    EvaluatedCell cell;
    cell.key = c.key;
    cell.observed = c.observed;
    cell.expected = c.expected;
    if (c.unsupported) {
      cell.deviation = {std::numeric_limits<double>::quiet_NaN(), DeviationStatus::kUnsupported};
    } else {
      cell.deviation = ComputeDeviation(kind, c.observed, c.expected, survival);
    }
    eval.cells.push_back(cell);
  }
  OutlierSet outliers = DetectOutliers(eval.cells, policy);
  for (std::size_t i : outliers.outliers) {
    auto& cell = eval.cells[i];
    cell.outlier = true;
    cell.sign = cell.deviation.value > outliers.stats.center ? 1 : -1;
  }
  eval.stats = outliers.stats;
  eval.excluded = std::move(outliers.excluded);
  if (outliers.warning) eval.warnings.push_back(*outliers.warning);
  if (field.inconsistent_cells > 0) {
    eval.warnings.push_back(std::to_string(field.inconsistent_cells) +
                            " observed cells have a vanishing model denominator");
  }
  return eval;
}

std::vector<HistogramBin> DeviationHistogram(const ContextEvaluation& eval, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw std::invalid_argument("histogram bin width must be positive");
  }
  std::vector<std::pair<std::int64_t, bool>> slots;
  for (const auto& c : eval.cells) {
    if (!c.deviation.finite()) continue;
    slots.emplace_back(static_cast<std::int64_t>(std::floor(c.deviation.value / bin_width)),
                       c.outlier);
  }
  std::vector<HistogramBin> bins;
  if (slots.empty()) return bins;
  auto [lo, hi] = std::minmax_element(slots.begin(), slots.end());
  const std::int64_t first = lo->first;
  const std::int64_t last = hi->first;
  constexpr std::int64_t kMaxBins = 100000;
  if (last - first + 1 > kMaxBins) {
    throw std::invalid_argument("histogram bin width too small for the deviation range");
  }
  bins.resize(static_cast<std::size_t>(last - first + 1));
  for (std::size_t i = 0; i < bins.size(); ++i) {
    bins[i].lower = static_cast<double>(first + static_cast<std::int64_t>(i)) * bin_width;
    bins[i].upper = bins[i].lower + bin_width;
  }
  for (const auto& [slot, outlier] : slots) {
    auto& bin = bins[static_cast<std::size_t>(slot - first)];
    ++bin.count;
    bin.outliers += outlier ? 1 : 0;
  }
  return bins;
}

}  // namespace cubelens
