// JSON and text renderings of cubes, evaluations and analysis results.

#ifndef CUBELENS_REPORT_H_
#define CUBELENS_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "cubelens/cube.h"
#include "cubelens/detect.h"
#include "cubelens/deviation.h"
#include "json.hpp"

namespace cubelens {

using Json = nlohmann::ordered_json;

// Serializes with invalid UTF-8 replaced; indent < 0 gives one line.
std::string DumpJson(const Json& j, int indent = -1);

// {"schema": [{"name", "kind"}...], "cells": [[[labels...], count]...],
//  "grand_total", "provenance"}
Json CubeToJson(const Cube& cube);
Cube CubeFromJson(const Json& j);

// One cell: {"coord": [...], "observed", "expected", "deviation" (null when
// not finite), "status", "outlier", "sign"}.
Json CellToJson(const ContextEvaluation& eval, const EvaluatedCell& cell);

// One JSON object per line for every evaluated cell, in key order.
std::string EvaluationJsonLines(const ContextEvaluation& eval);

struct SummaryOptions {
  double bin_width = 0.0;    // <= 0 picks a width from the deviation range
  std::size_t offset = 0;    // cell page
  std::size_t limit = 500;
  bool include_cells = true;
};

// Statistics, histogram, outliers (all), excluded cells and a page of cells.
Json EvaluationSummaryJson(const ContextEvaluation& eval, const SummaryOptions& options = {});

Json HistogramJson(const std::vector<HistogramBin>& bins, double bin_width);

// Width giving about 40 bins over the finite deviation range (at least 1e-6).
double DefaultBinWidth(const ContextEvaluation& eval);

Json RankedJson(const RankedEntity& entity);
Json EventJson(std::size_t id, const Event& event, const ContextEvaluation* hour_eval);
Json EventsJson(const std::vector<Event>& events, const ContextEvaluation* hour_eval);
Json CauseJson(const CauseClassification& cause);
Json RegimeJson(const SpreaderRegime& regime);
Json AuthorExplanationJson(const Event& event, const AuthorExplanation& expl,
                           const SummaryOptions& options = {});
Json SpreaderExplanationJson(const Event& event, const SpreaderExplanation& expl,
                             const SummaryOptions& options = {});
Json HashtagAnomaliesJson(const std::vector<HashtagAnomaly>& anomalies);
Json TopicsJson(const std::vector<Topic>& topics, std::size_t n);
Json PredictionJson(const LinkPrediction& p);

// Aligned-column text table. Numeric-looking cells are right-aligned.
std::string RenderTable(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows);

// Fixed-precision number formatting for tables.
std::string FormatNumber(double value, int precision = 3);

std::string EventsTable(const std::vector<Event>& events, const ContextEvaluation* hour_eval);
std::string OutliersTable(const ContextEvaluation& eval, std::size_t max_rows = 50);
std::string StatsLine(const ContextEvaluation& eval);

}  // namespace cubelens

#endif  // CUBELENS_REPORT_H_
