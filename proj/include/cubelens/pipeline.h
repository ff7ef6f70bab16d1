// Analysis settings and compositions shared by the command-line tool and the
// HTTP service, so that both produce the same results for the same settings.

#ifndef CUBELENS_PIPELINE_H_
#define CUBELENS_PIPELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "cubelens/cube.h"
#include "cubelens/detect.h"
#include "cubelens/deviation.h"
#include "cubelens/estimator.h"

namespace cubelens {

struct AnalysisConfig {
  HourContext context = HourContext::kMultiAggregative;
  DeviationKind kind = DeviationKind::kPoisson;
  SurvivalMode survival = SurvivalMode::kGreater;
  OutlierPolicy policy;
  LinkPredictionMode linkpred = LinkPredictionMode::kLiteral;

  DrilldownOptions Drilldown() const;
  // Canonical rendering; equal settings give equal keys.
  std::string Key() const;
};

// Settings for event detection: positive side unless requested otherwise.
AnalysisConfig EventDefaults();

// Hour-level evaluation of one of the three hour contexts, or of an estimator
// written in the text form over the (day, hour) cube. The base cuboid is
// available to the text form as cube@base(...).
ContextEvaluation EvaluateHours(const Cube& base, const AnalysisConfig& config,
                                const std::optional<std::string>& spec_text = std::nullopt);

struct EventAnalysis {
  ContextEvaluation hour_eval;
  std::vector<Event> events;
};

// Multi-aggregative (or configured) hour context followed by event grouping.
EventAnalysis AnalyzeEvents(const Cube& base, const AnalysisConfig& config);

// Splits "a,b;c" style lists on ',' and ';', trimming blanks.
std::vector<std::string> SplitList(const std::string& text);

}  // namespace cubelens

#endif  // CUBELENS_PIPELINE_H_
