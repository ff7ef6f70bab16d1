#ifndef CUBELENS_DEVIATION_H_
#define CUBELENS_DEVIATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cubelens/cube.h"
#include "cubelens/estimator.h"

namespace cubelens {

// ---------------------------------------------------------------------------
// Poisson distribution

// P(X <= k) for X ~ Poisson(lambda). lambda == 0 gives 1 for every k.
// Throws std::invalid_argument for negative or non-finite lambda.
double PoissonCdf(std::uint64_t k, double lambda);

// log P(X <= k), accurate where the probability underflows a double.
double LogPoissonCdf(std::uint64_t k, double lambda);

// log P(X > k).
double LogPoissonSurvival(std::uint64_t k, double lambda);

// log P(X = k).
double LogPoissonPmf(std::uint64_t k, double lambda);

// ---------------------------------------------------------------------------
// Deviation functions

enum class DeviationKind { kRatio, kPoisson };

std::string_view DeviationKindName(DeviationKind kind);
DeviationKind ParseDeviationKind(std::string_view name);

// Upper-branch tail used by the Poisson deviation when observed > expected.
enum class SurvivalMode {
  kGreater,         // -log P(X > observed), the default
  kGreaterOrEqual,  // -log P(X >= observed)
};

std::string_view SurvivalModeName(SurvivalMode mode);
SurvivalMode ParseSurvivalMode(std::string_view name);

enum class DeviationStatus {
  kFinite,
  // expected == 0 with observed > 0 under the ratio, or a model cell whose
  // denominator vanished.
  kUnsupported,
  // Poisson deviation of an impossible observation; value is kDeviationCap.
  kCapped,
};

std::string_view DeviationStatusName(DeviationStatus status);

// About -log of the smallest positive double.
inline constexpr double kDeviationCap = 745.0;

struct Deviation {
  double value = 0.0;
  DeviationStatus status = DeviationStatus::kFinite;

  bool finite() const { return status == DeviationStatus::kFinite; }
};

// observed / expected; (0, 0) is neutral (1).
Deviation DeviationRatio(std::uint64_t observed, double expected);

// log F(observed) when observed <= expected, -log of the upper tail otherwise.
// Natural logarithm. Non-positive exactly when observed <= expected.
Deviation DeviationPoisson(std::uint64_t observed, double expected,
                           SurvivalMode survival = SurvivalMode::kGreater);

Deviation ComputeDeviation(DeviationKind kind, std::uint64_t observed, double expected,
                           SurvivalMode survival = SurvivalMode::kGreater);

// ---------------------------------------------------------------------------
// Outliers

enum class OutlierSide { kBoth, kPositive, kNegative };

std::string_view OutlierSideName(OutlierSide side);
OutlierSide ParseOutlierSide(std::string_view name);

enum class SpreadEstimator {
  kMeanStd,    // mean and population standard deviation
  kMedianMad,  // median and 1.4826 * median absolute deviation
};

struct OutlierPolicy {
  double sigma_multiplier = 3.0;
  OutlierSide side = OutlierSide::kBoth;
  SpreadEstimator spread = SpreadEstimator::kMeanStd;

  // Throws std::invalid_argument unless sigma_multiplier > 0.
  void Validate() const;
};

struct DeviationStats {
  std::size_t count = 0;  // finite deviations
  double mean = 0.0;
  double std = 0.0;  // population
  // Center and spread used by the outlier rule (mean/std or median/MAD).
  double center = 0.0;
  double spread = 0.0;
};

// Deterministic statistics over `values`: the input order does not matter.
DeviationStats ComputeStats(std::span<const double> values, SpreadEstimator spread);

struct EvaluatedCell {
  CellKey key;
  std::uint64_t observed = 0;
  double expected = 0.0;
  Deviation deviation;
  bool outlier = false;
  int sign = 0;  // +1 above the center, -1 below; set on outliers
};

struct OutlierSet {
  // Indices into the evaluated cells, by decreasing |deviation - center|,
  // ties broken by index.
  std::vector<std::size_t> outliers;
  // Capped or unsupported cells; never part of the statistics.
  std::vector<std::size_t> excluded;
  DeviationStats stats;
  std::optional<std::string> warning;
};

// Flags cells whose |deviation - center| exceeds sigma_multiplier * spread on
// the requested side.
OutlierSet DetectOutliers(std::span<const EvaluatedCell> cells, const OutlierPolicy& policy);

// One context: observed, expected and deviation values for every enumerated
// cell, with statistics and outlier flags.
struct ContextEvaluation {
  Cube observed_cube;
  std::vector<EvaluatedCell> cells;  // sorted by key
  DeviationKind kind = DeviationKind::kPoisson;
  SurvivalMode survival = SurvivalMode::kGreater;
  OutlierPolicy policy;
  DeviationStats stats;
  std::vector<std::size_t> excluded;
  std::vector<std::string> warnings;

  std::vector<std::string> Labels(const EvaluatedCell& cell) const {
    return observed_cube.Labels(cell.key);
  }
  // Outlier indices, most deviant first.
  std::vector<std::size_t> OutlierIndices() const;
  // Indices of outliers above the center, by decreasing deviation.
  std::vector<std::size_t> PositiveOutliers() const;
};

ContextEvaluation EvaluateContext(const ExpectedField& field, DeviationKind kind,
                                  const OutlierPolicy& policy,
                                  SurvivalMode survival = SurvivalMode::kGreater);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::size_t outliers = 0;
};

// Finite deviations binned on multiples of `bin_width`; empty bins between
// the first and the last occupied bin are included.
std::vector<HistogramBin> DeviationHistogram(const ContextEvaluation& eval, double bin_width);

// Pairwise (cascade) summation.
double PairwiseSum(std::span<const double> values);

}  // namespace cubelens

#endif  // CUBELENS_DEVIATION_H_
