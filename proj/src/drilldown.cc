#include <algorithm>
#include <string>

#include "cubelens/detect.h"

namespace cubelens {

namespace {

constexpr std::string_view kEventClass = "He";
constexpr std::string_view kOtherClass = "other";

std::string CellLabel(const ContextEvaluation& eval, const EvaluatedCell& cell) {
  auto labels = eval.Labels(cell);
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += '|';
    out += labels[i];
  }
  return out;
}

RankedEntity Rank(const ContextEvaluation& eval, const EvaluatedCell& cell) {
  return {CellLabel(eval, cell), cell.deviation.value, cell.observed, cell.expected};
}

void CheckEventDays(const Cube& cube, const Event& event) {
  if (event.hours.empty()) throw std::invalid_argument("event has no hours");
  const std::size_t day_dim = cube.schema().IndexOrThrow(kDayDim);
  cube.schema().IndexOrThrow(kHourDim);
  for (const auto& slot : event.hours) {
    if (!cube.dictionary(day_dim).Find(slot.day)) {
      throw DataError("event day '" + slot.day + "' is absent from the data");
    }
  }
}

Cube Apex(const Cube& cube) { return KeepDims(cube, std::span<const std::string>()); }

// observed(x) = scope restricted to the event, aggregated onto `dim`;
// expected(x) = v(e) * v(x, H_e) / v(H_e) over the same scope.
ExpectedField LocalShareField(const Cube& scope, const Event& event, std::string_view dim) {
  const std::string keep[] = {std::string(dim)};
  Cube observed = KeepDims(FilterToEvent(scope, event), keep);
  Cube history = KeepDims(FilterToEventHours(scope, event), keep);
  EstimatorSpec spec;
  spec.terms.push_back({history, CoordinateProjection().Copy(std::string(dim)), 1});
  spec.terms.push_back({Apex(observed), {}, 1});
  spec.terms.push_back({Apex(history), {}, -1});
  ExpectedField field = ExpectedRatioProduct(observed, spec);
  if (field.inconsistent_cells > 0) {
    throw DataError("internal consistency error: " + std::to_string(field.inconsistent_cells) +
                    " observed cells have no history");
  }
  return field;
}

}  // namespace

std::string_view CauseKindName(CauseKind kind) {
  switch (kind) {
    case CauseKind::kOneMain:
      return "one-main";
    case CauseKind::kSeveralMain:
      return "several-main";
    case CauseKind::kNoMain:
      return "no-main";
  }
  return "";
}

std::string_view RegimeKindName(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::kGlobalPhenomenon:
      return "global-phenomenon";
    case RegimeKind::kActivistGroup:
      return "activist-group";
    case RegimeKind::kSingleActivist:
      return "single-activist";
  }
  return "";
}

CauseClassification ClassifyCause(const ContextEvaluation& eval, double gap_factor) {
  CauseClassification out;
  const auto positive = eval.PositiveOutliers();
  if (positive.empty()) return out;
  const auto& top = eval.cells[positive[0]];
  if (positive.size() == 1 ||
      top.deviation.value >= gap_factor * eval.cells[positive[1]].deviation.value) {
    out.kind = CauseKind::kOneMain;
    out.main_entities.push_back(Rank(eval, top));
    return out;
  }
  out.kind = CauseKind::kSeveralMain;
  for (std::size_t i : positive) out.main_entities.push_back(Rank(eval, eval.cells[i]));
  return out;
}

SpreaderRegime ClassifyRegime(const ContextEvaluation& eval, std::uint64_t event_total,
                              double share_single, double share_group) {
  SpreaderRegime out;
  out.event_total = event_total;
  for (std::size_t i : eval.PositiveOutliers()) {
    out.group.push_back(Rank(eval, eval.cells[i]));
    out.group_retweets += eval.cells[i].observed;
  }
  out.share = event_total == 0 ? 0.0
                               : static_cast<double>(out.group_retweets) /
                                     static_cast<double>(event_total);
  if (out.group.size() == 1 && out.share >= share_single) {
    out.kind = RegimeKind::kSingleActivist;
  } else if (!out.group.empty() && out.share >= share_group) {
    out.kind = RegimeKind::kActivistGroup;
  }
  return out;
}

Cube FilterToEvent(const Cube& cube, const Event& event) {
  std::vector<std::vector<std::string>> tuples;
  for (const auto& s : event.hours) tuples.push_back({s.day, std::to_string(s.hour)});
  Selector selector;
  selector.KeepTuples({std::string(kDayDim), std::string(kHourDim)}, std::move(tuples));
  return Filter(cube, selector);
}

Cube FilterToEventHours(const Cube& cube, const Event& event) {
  const auto hours = event.HourSet();
  std::vector<std::string> inside;
  std::vector<std::string> outside;
  for (int h = 0; h < kHoursPerDay; ++h) {
    (std::binary_search(hours.begin(), hours.end(), h) ? inside : outside)
        .push_back(std::to_string(h));
  }
  Partition partition{std::string(kHourDim), {{std::string(kEventClass), inside}}};
  if (!outside.empty()) partition.classes.emplace_back(std::string(kOtherClass), outside);
  Selector selector;
  selector.Keep(std::string(kHourDim), {std::string(kEventClass)});
  return Filter(AggregatePartition(cube, partition), selector);
}

AuthorExplanation ExplainEventAuthors(const Cube& base, const Event& event,
                                      const DrilldownOptions& options) {
  CheckEventDays(base, event);
  ExpectedField field = LocalShareField(base, event, kAuthorDim);
  if (field.observed.empty()) {
    throw DataError("event " + event.Label() + " holds no interactions");
  }
  AuthorExplanation out;
  out.event_total = field.observed.grand_total();
  out.eval = EvaluateContext(field, options.kind, options.policy, options.survival);
  out.cause = ClassifyCause(out.eval, options.gap_factor);
  return out;
}

SpreaderExplanation ExplainEventSpreaders(const Cube& base, const Event& event,
                                          std::string_view author,
                                          const DrilldownOptions& options) {
  CheckEventDays(base, event);
  base.schema().IndexOrThrow(kSpreaderDim);
  Selector by_author;
  by_author.Keep(std::string(kAuthorDim), {std::string(author)});
  Cube scope = Filter(base, by_author);
  if (FilterToEventHours(scope, event).empty()) {
    throw DataError("author '" + std::string(author) + "' has no activity during the hours of " +
                    event.Label());
  }
  ExpectedField field = LocalShareField(scope, event, kSpreaderDim);
  SpreaderExplanation out;
  out.author = std::string(author);
  out.eval = EvaluateContext(field, options.kind, options.policy, options.survival);
  out.regime = ClassifyRegime(out.eval, field.observed.grand_total(), options.share_single,
                              options.share_group);
  return out;
}

std::vector<HashtagAnomaly> AbnormalHashtagsGlobal(const Cube& base5,
                                                   const DrilldownOptions& options,
                                                   ContextEvaluation* eval_out) {
  Cube observed = KeepDims(base5, {kHashtagDim, kDayDim, kHourDim});
  std::vector<HashtagAnomaly> out;
  if (observed.empty()) {
    if (eval_out) *eval_out = ContextEvaluation{};
    return out;
  }
  const std::string text = "cube(" + std::string(kHashtagDim) + ", " + std::string(kDayDim) +
                           ") * cube(" + std::string(kHourDim) + ") / cube()";
  ExpectedField field = ExpectedRatioProduct(observed, ParseEstimator(text, observed));
  ContextEvaluation eval = EvaluateContext(field, options.kind, options.policy, options.survival);
  const auto& schema = observed.schema();
  const std::size_t k = schema.IndexOrThrow(kHashtagDim);
  const std::size_t d = schema.IndexOrThrow(kDayDim);
  const std::size_t h = schema.IndexOrThrow(kHourDim);
  for (std::size_t i : eval.PositiveOutliers()) {
    const auto& c = eval.cells[i];
    out.push_back({observed.dictionary(k).label(c.key[k]), observed.dictionary(d).label(c.key[d]),
                   std::stoi(observed.dictionary(h).label(c.key[h])), c.observed, c.expected,
                   c.deviation.value});
  }
  if (eval_out) *eval_out = std::move(eval);
  return out;
}

std::vector<RankedEntity> AbnormalHashtagsForEvent(const Cube& base5, const Event& event,
                                                   const DrilldownOptions& options,
                                                   ContextEvaluation* eval_out) {
  CheckEventDays(base5, event);
  ExpectedField field = LocalShareField(base5, event, kHashtagDim);
  ContextEvaluation eval = EvaluateContext(field, options.kind, options.policy, options.survival);
  std::vector<RankedEntity> out;
  for (std::size_t i : eval.PositiveOutliers()) out.push_back(Rank(eval, eval.cells[i]));
  if (eval_out) *eval_out = std::move(eval);
  return out;
}

}  // namespace cubelens
