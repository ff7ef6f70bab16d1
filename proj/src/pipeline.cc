#include "cubelens/pipeline.h"

#include <cstdio>

namespace cubelens {

DrilldownOptions AnalysisConfig::Drilldown() const {
  DrilldownOptions o;
  o.kind = kind;
  o.policy = policy;
  o.survival = survival;
  return o;
}

std::string AnalysisConfig::Key() const {
  char sigma[64];
  std::snprintf(sigma, sizeof sigma, "%.17g", policy.sigma_multiplier);
  std::string key;
  key += "context=" + std::string(HourContextName(context));
  key += ";deviation=" + std::string(DeviationKindName(kind));
  key += ";survival=" + std::string(SurvivalModeName(survival));
  key += ";sigma=" + std::string(sigma);
  key += ";side=" + std::string(OutlierSideName(policy.side));
  key += ";robust=" + std::string(policy.spread == SpreadEstimator::kMedianMad ? "1" : "0");
  key += ";linkpred=" + std::string(LinkPredictionModeName(linkpred));
  return key;
}

AnalysisConfig EventDefaults() {
  AnalysisConfig c;
  c.policy.side = OutlierSide::kPositive;
  return c;
}

ContextEvaluation EvaluateHours(const Cube& base, const AnalysisConfig& config,
                                const std::optional<std::string>& spec_text) {
  config.policy.Validate();
  if (!spec_text) {
    return EvaluateContext(HourExpected(base, config.context), config.kind, config.policy,
                           config.survival);
  }
  Cube hours = HourCube(base);
  NamedCubes named{{"base", base}};
  EstimatorSpec spec = ParseEstimator(*spec_text, hours, named);
  return EvaluateContext(ExpectedRatioProduct(hours, spec), config.kind, config.policy,
                         config.survival);
}

EventAnalysis AnalyzeEvents(const Cube& base, const AnalysisConfig& config) {
  EventAnalysis out;
  out.hour_eval = EvaluateHours(base, config);
  out.events = DetectEvents(out.hour_eval);
  return out;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = cur.find_first_not_of(" \t");
    std::size_t e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

}  // namespace cubelens
