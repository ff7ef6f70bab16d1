#include "cubelens/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace cubelens {

namespace {

Json NumberOrNull(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json LabelsJson(const std::vector<std::string>& labels) {
  Json arr = Json::array();
  for (const auto& l : labels) arr.push_back(l);
  return arr;
}

Json StatsJson(const DeviationStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.std},
          {"center", s.center}, {"spread", s.spread}};
}

Json PolicyJson(const OutlierPolicy& p) {
  return {{"sigma_multiplier", p.sigma_multiplier},
          {"side", OutlierSideName(p.side)},
          {"spread", p.spread == SpreadEstimator::kMeanStd ? "mean-std" : "median-mad"}};
}

bool LooksNumeric(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' ||
           c == 'e' || c == '%';
  }) && (std::isdigit(static_cast<unsigned char>(s.back())) || s.back() == '%');
}

}  // namespace

std::string DumpJson(const Json& j, int indent) {
  return j.dump(indent, ' ', false, Json::error_handler_t::replace);
}

Json CubeToJson(const Cube& cube) {
  Json schema = Json::array();
  for (const auto& d : cube.schema().dims()) {
    schema.push_back({{"name", d.name}, {"kind", DimensionKindName(d.kind)}});
  }
  Json cells = Json::array();
  for (const auto& c : cube.cells()) {
    cells.push_back(Json::array({LabelsJson(cube.Labels(c.key)), c.count}));
  }
  Json out{{"schema", schema}, {"grand_total", cube.grand_total()}, {"cells", cells}};
  out["provenance"] = Json::parse(DescribeProvenance(cube.provenance()));
  return out;
}

Cube CubeFromJson(const Json& j) {
  std::vector<Dimension> dims;
  for (const auto& d : j.at("schema")) {
    dims.push_back({d.at("name").get<std::string>(),
                    ParseDimensionKind(d.value("kind", std::string("categorical")))});
  }
  CubeBuilder builder{DimensionSchema(std::move(dims))};
  for (const auto& c : j.at("cells")) {
    auto labels = c.at(0).get<std::vector<std::string>>();
    builder.Add(labels, c.at(1).get<std::uint64_t>());
  }
  return std::move(builder).Build();
}

Json CellToJson(const ContextEvaluation& eval, const EvaluatedCell& cell) {
  return {{"coord", LabelsJson(eval.Labels(cell))},
          {"observed", cell.observed},
          {"expected", cell.expected},
          {"deviation", cell.deviation.finite() || cell.deviation.status == DeviationStatus::kCapped
                            ? NumberOrNull(cell.deviation.value)
                            : Json(nullptr)},
          {"status", DeviationStatusName(cell.deviation.status)},
          {"outlier", cell.outlier},
          {"sign", cell.sign}};
}

std::string EvaluationJsonLines(const ContextEvaluation& eval) {
  std::string out;
  for (const auto& c : eval.cells) {
    out += CellToJson(eval, c).dump();
    out += '\n';
  }
  return out;
}

double DefaultBinWidth(const ContextEvaluation& eval) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& c : eval.cells) {
    if (!c.deviation.finite()) continue;
    lo = std::min(lo, c.deviation.value);
    hi = std::max(hi, c.deviation.value);
  }
  if (!(hi > lo)) return 1.0;
  const double raw = (hi - lo) / 40.0;
  // Round to 1, 2 or 5 times a power of ten.
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  double width = p;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    width = m * p;
    if (width >= raw) break;
  }
  return std::max(width, 1e-6);
}

Json HistogramJson(const std::vector<HistogramBin>& bins, double bin_width) {
  Json arr = Json::array();
  for (const auto& b : bins) {
    arr.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count},
                   {"outliers", b.outliers}});
  }
  return {{"bin_width", bin_width}, {"bins", arr}};
}

Json EvaluationSummaryJson(const ContextEvaluation& eval, const SummaryOptions& options) {
  const double width = options.bin_width > 0 ? options.bin_width : DefaultBinWidth(eval);
  Json outliers = Json::array();
  for (std::size_t i : eval.OutlierIndices()) outliers.push_back(CellToJson(eval, eval.cells[i]));
  Json excluded = Json::array();
  for (std::size_t i : eval.excluded) excluded.push_back(CellToJson(eval, eval.cells[i]));
  Json warnings = Json::array();
  for (const auto& w : eval.warnings) warnings.push_back(w);
  Json dims = Json::array();
  for (const auto& d : eval.observed_cube.schema().dims()) dims.push_back(d.name);
  Json out{{"dimensions", dims},
           {"deviation", DeviationKindName(eval.kind)},
           {"survival", SurvivalModeName(eval.survival)},
           {"policy", PolicyJson(eval.policy)},
           {"cell_count", eval.cells.size()},
           {"observed_total", eval.observed_cube.grand_total()},
           {"stats", StatsJson(eval.stats)},
           {"histogram", HistogramJson(DeviationHistogram(eval, width), width)},
           {"outliers", outliers},
           {"excluded", excluded},
           {"warnings", warnings}};
  if (options.include_cells) {
    Json cells = Json::array();
    const std::size_t end = std::min(eval.cells.size(), options.offset + options.limit);
    for (std::size_t i = options.offset; i < end; ++i) cells.push_back(CellToJson(eval, eval.cells[i]));
    out["cells"] = {{"offset", options.offset},
                    {"limit", options.limit},
                    {"total", eval.cells.size()},
                    {"items", cells}};
  }
  return out;
}

Json RankedJson(const RankedEntity& e) {
  return {{"entity", e.label}, {"deviation", NumberOrNull(e.deviation)},
          {"observed", e.observed}, {"expected", e.expected}};
}

Json EventJson(std::size_t id, const Event& event, const ContextEvaluation* hour_eval) {
  std::map<std::pair<std::string, int>, const EvaluatedCell*> lookup;
  if (hour_eval != nullptr) {
    const auto& schema = hour_eval->observed_cube.schema();
    const std::size_t d = schema.IndexOrThrow(kDayDim);
    const std::size_t h = schema.IndexOrThrow(kHourDim);
    for (const auto& c : hour_eval->cells) {
      if (!c.outlier) continue;
      lookup[{hour_eval->observed_cube.dictionary(d).label(c.key[d]),
              std::stoi(hour_eval->observed_cube.dictionary(h).label(c.key[h]))}] = &c;
    }
  }
  Json hours = Json::array();
  std::uint64_t total = 0;
  for (const auto& s : event.hours) {
    Json j{{"day", s.day}, {"hour", s.hour}};
    if (auto it = lookup.find({s.day, s.hour}); it != lookup.end()) {
      j["observed"] = it->second->observed;
      j["expected"] = it->second->expected;
      j["deviation"] = NumberOrNull(it->second->deviation.value);
      total += it->second->observed;
    }
    hours.push_back(std::move(j));
  }
  Json he = Json::array();
  for (int h : event.HourSet()) he.push_back(h);
  Json out{{"id", id}, {"label", event.Label()}, {"hours", hours}, {"hour_set", he}};
  if (hour_eval != nullptr) out["observed_total"] = total;
  return out;
}

Json EventsJson(const std::vector<Event>& events, const ContextEvaluation* hour_eval) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < events.size(); ++i) arr.push_back(EventJson(i, events[i], hour_eval));
  return arr;
}

Json CauseJson(const CauseClassification& cause) {
  Json main = Json::array();
  for (const auto& e : cause.main_entities) main.push_back(RankedJson(e));
  return {{"kind", CauseKindName(cause.kind)}, {"main_entities", main}};
}

Json RegimeJson(const SpreaderRegime& regime) {
  Json group = Json::array();
  for (const auto& e : regime.group) group.push_back(RankedJson(e));
  return {{"kind", RegimeKindName(regime.kind)},
          {"group", group},
          {"share", regime.share},
          {"group_retweets", regime.group_retweets},
          {"event_total", regime.event_total}};
}

Json AuthorExplanationJson(const Event& event, const AuthorExplanation& expl,
                           const SummaryOptions& options) {
  return {{"event", event.Label()},
          {"event_total", expl.event_total},
          {"cause", CauseJson(expl.cause)},
          {"evaluation", EvaluationSummaryJson(expl.eval, options)}};
}

Json SpreaderExplanationJson(const Event& event, const SpreaderExplanation& expl,
                             const SummaryOptions& options) {
  return {{"event", event.Label()},
          {"author", expl.author},
          {"regime", RegimeJson(expl.regime)},
          {"evaluation", EvaluationSummaryJson(expl.eval, options)}};
}

Json HashtagAnomaliesJson(const std::vector<HashtagAnomaly>& anomalies) {
  Json arr = Json::array();
  for (const auto& a : anomalies) {
    arr.push_back({{"hashtag", a.hashtag}, {"day", a.day}, {"hour", a.hour},
                   {"observed", a.observed}, {"expected", a.expected},
                   {"deviation", NumberOrNull(a.deviation)}});
  }
  return arr;
}

Json TopicsJson(const std::vector<Topic>& topics, std::size_t n) {
  Json arr = Json::array();
  for (const auto& t : topics) {
    arr.push_back({{"hashtags", t.hashtags}, {"spreaders", t.spreaders}, {"authors", t.authors}});
  }
  return {{"n", n}, {"count", topics.size()}, {"topics", arr}};
}

Json PredictionJson(const LinkPrediction& p) {
  return {{"expected", p.expected ? Json(*p.expected) : Json(nullptr)},
          {"status", p.expected ? "ok" : "unsupported"},
          {"community_share", p.community_share},
          {"hour_share", p.hour_share},
          {"topic_rate", p.topic_rate}};
}

std::string FormatNumber(double value, int precision) {
  if (std::isnan(value)) return "n/a";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

std::string RenderTable(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], r[i].size());
    }
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells, bool is_header) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < cells.size() ? cells[i] : "";
      const std::size_t pad = width[i] - cell.size();
      if (i > 0) out << "  ";
      if (!is_header && LooksNumeric(cell)) {
        out << std::string(pad, ' ') << cell;
      } else if (i + 1 < width.size()) {
        out << cell << std::string(pad, ' ');
      } else {
        out << cell;
      }
    }
    out << '\n';
  };
  line(header, true);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.push_back(std::string(w, '-'));
  line(rule, true);
  for (const auto& r : rows) line(r, false);
  return out.str();
}

std::string EventsTable(const std::vector<Event>& events, const ContextEvaluation* hour_eval) {
  Json j = EventsJson(events, hour_eval);
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : j) {
    std::string hs;
    for (const auto& h : e["hour_set"]) hs += (hs.empty() ? "" : ",") + std::to_string(h.get<int>());
    rows.push_back({std::to_string(e["id"].get<std::size_t>()), e["label"].get<std::string>(),
                    std::to_string(e["hours"].size()), hs,
                    e.contains("observed_total")
                        ? std::to_string(e["observed_total"].get<std::uint64_t>())
                        : ""});
  }
  return RenderTable({"id", "event", "hours", "H_e", "observed"}, rows);
}

std::string OutliersTable(const ContextEvaluation& eval, std::size_t max_rows) {
  std::vector<std::string> header;
  for (const auto& d : eval.observed_cube.schema().dims()) header.push_back(d.name);
  for (const char* h : {"observed", "expected", "deviation", "sign"}) header.push_back(h);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i : eval.OutlierIndices()) {
    if (rows.size() >= max_rows) break;
    const auto& c = eval.cells[i];
    auto row = eval.Labels(c);
    row.push_back(std::to_string(c.observed));
    row.push_back(FormatNumber(c.expected));
    row.push_back(FormatNumber(c.deviation.value));
    row.push_back(c.sign > 0 ? "+" : "-");
    rows.push_back(std::move(row));
  }
  return RenderTable(header, rows);
}

std::string StatsLine(const ContextEvaluation& eval) {
  std::ostringstream out;
  out << "cells=" << eval.cells.size() << " finite=" << eval.stats.count
      << " mean=" << FormatNumber(eval.stats.mean, 4) << " std=" << FormatNumber(eval.stats.std, 4)
      << " outliers=" << eval.OutlierIndices().size() << " excluded=" << eval.excluded.size();
  return out.str();
}

}  // namespace cubelens
