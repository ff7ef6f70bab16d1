// Analysis pipeline over interaction cubes: abnormal-hour events, author and
// spreader drill-downs, abnormal hashtags, topics and user-topic prediction.

#ifndef CUBELENS_DETECT_H_
#define CUBELENS_DETECT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cubelens/cube.h"
#include "cubelens/deviation.h"
#include "cubelens/estimator.h"

namespace cubelens {

// ---------------------------------------------------------------------------
// Hour contexts

enum class HourContext { kBasic, kAggregative, kMultiAggregative };

std::string_view HourContextName(HourContext context);
HourContext ParseHourContext(std::string_view name);

// (day, hour) cube of a base cuboid.
Cube HourCube(const Cube& base);

// basic: total / |D x H|; aggregative: day total / 24;
// multi-aggregative: day total * hour total / grand total.
ExpectedField HourExpected(const Cube& base, HourContext context);

// ---------------------------------------------------------------------------
// Events

struct HourSlot {
  std::string day;
  int hour = 0;

  bool operator==(const HourSlot&) const = default;
};

// Ordered day axis. ISO dates (YYYY-MM-DD) and integer labels are expanded to
// their full contiguous range so that missing days break hour runs; any other
// labels are ordered as strings.
class Calendar {
 public:
  Calendar() = default;
  static Calendar FromDays(std::vector<std::string> day_labels);

  std::optional<std::size_t> IndexOf(std::string_view day) const;
  const std::vector<std::string>& days() const { return days_; }

  // Position on the wall-clock hour axis, or nullopt for an unknown day.
  std::optional<std::int64_t> HourIndex(const HourSlot& slot) const;

 private:
  std::vector<std::string> days_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct Event {
  std::vector<HourSlot> hours;  // wall-clock consecutive

  // Distinct hour-of-day values, ascending.
  std::vector<int> HourSet() const;
  // "2016-08-24 20h-22h" or "12 22h - 13 1h" style label.
  std::string Label() const;
};

// Groups abnormal slots into maximal runs of consecutive hours (23h of one
// calendar day followed by 0h of the next is consecutive). Slots whose day is
// not in the calendar are ignored. Events are returned in calendar order.
std::vector<Event> GroupEvents(std::vector<HourSlot> abnormal, const Calendar& calendar);

// Abnormal hours of a (day, hour) evaluation: outlier cells holding at least
// one observation. Hours without data are never abnormal.
std::vector<HourSlot> AbnormalHours(const ContextEvaluation& hour_eval);

// GroupEvents(AbnormalHours(eval)) over the calendar of the evaluated days.
std::vector<Event> DetectEvents(const ContextEvaluation& hour_eval);
std::vector<Event> DetectEvents(const ContextEvaluation& hour_eval, const Calendar& calendar);

// ---------------------------------------------------------------------------
// Cause and regime classification

struct RankedEntity {
  std::string label;
  double deviation = 0.0;
  std::uint64_t observed = 0;
  double expected = 0.0;
};

enum class CauseKind { kOneMain, kSeveralMain, kNoMain };
std::string_view CauseKindName(CauseKind kind);

struct CauseClassification {
  CauseKind kind = CauseKind::kNoMain;
  std::vector<RankedEntity> main_entities;  // positive outliers, most deviant first
};

// no positive outlier: no-main. The top positive outlier is the single main
// entity when it is the only one or its deviation is at least gap_factor times
// the second largest positive outlier deviation; otherwise several-main.
CauseClassification ClassifyCause(const ContextEvaluation& eval, double gap_factor = 3.0);

enum class RegimeKind { kGlobalPhenomenon, kActivistGroup, kSingleActivist };
std::string_view RegimeKindName(RegimeKind kind);

struct SpreaderRegime {
  RegimeKind kind = RegimeKind::kGlobalPhenomenon;
  std::vector<RankedEntity> group;  // positive outliers
  double share = 0.0;               // group retweets / event total
  std::uint64_t group_retweets = 0;
  std::uint64_t event_total = 0;
};

SpreaderRegime ClassifyRegime(const ContextEvaluation& eval, std::uint64_t event_total,
                              double share_single = 0.5, double share_group = 0.10);

// ---------------------------------------------------------------------------
// Drill-downs

struct DrilldownOptions {
  DeviationKind kind = DeviationKind::kPoisson;
  OutlierPolicy policy;
  SurvivalMode survival = SurvivalMode::kGreater;
  double gap_factor = 3.0;
  double share_single = 0.5;
  double share_group = 0.10;
};

// Restricts a cube to the (day, hour) slots of an event.
Cube FilterToEvent(const Cube& cube, const Event& event);

// Restricts a cube to the hours of day H_e of an event, on every day, going
// through the {H_e, other hours} partition of the hour dimension.
Cube FilterToEventHours(const Cube& cube, const Event& event);

struct AuthorExplanation {
  ContextEvaluation eval;
  CauseClassification cause;
  std::uint64_t event_total = 0;
};

// expected(a) = v(e) * v(a, H_e) / v(H_e): every author keeps their usual share
// of the activity at the event's hours of day. Authors active during H_e or
// during the event are scored. Throws DataError when an event day is absent
// from the base or the event holds no data.
AuthorExplanation ExplainEventAuthors(const Cube& base, const Event& event,
                                      const DrilldownOptions& options = {});

struct SpreaderExplanation {
  std::string author;
  ContextEvaluation eval;
  SpreaderRegime regime;
};

// expected(s) = v(a*, e) * v(s, a*, H_e) / v(a*, H_e). Throws DataError when
// the author has no activity during H_e.
SpreaderExplanation ExplainEventSpreaders(const Cube& base, const Event& event,
                                          std::string_view author,
                                          const DrilldownOptions& options = {});

// ---------------------------------------------------------------------------
// Hashtags

struct HashtagAnomaly {
  std::string hashtag;
  std::string day;
  int hour = 0;
  std::uint64_t observed = 0;
  double expected = 0.0;
  double deviation = 0.0;
};

// Over (hashtag, day, hour): expected = v(k, d) * v(h) / v(). Returns
// positive outliers by decreasing deviation (ties by key).
std::vector<HashtagAnomaly> AbnormalHashtagsGlobal(const Cube& base5,
                                                   const DrilldownOptions& options = {},
                                                   ContextEvaluation* eval_out = nullptr);

// Hashtag totals during the event against each hashtag's usual share at the
// event's hours of day: expected(k) = v(e) * v(k, H_e) / v(H_e). Returns the
// positive outliers, most deviant first.
std::vector<RankedEntity> AbnormalHashtagsForEvent(const Cube& base5, const Event& event,
                                                   const DrilldownOptions& options = {},
                                                   ContextEvaluation* eval_out = nullptr);

// ---------------------------------------------------------------------------
// Topics

struct HashtagEntities {
  std::string hashtag;
  std::vector<std::string> spreaders;  // abnormal, sorted
  std::vector<std::string> authors;    // abnormal, sorted
};

// Abnormal spreaders of hashtag k are positive outliers of
// expected(s, d, h) = v(k, d, h) * v(s, h) / v(h) in at least one cell, and
// symmetrically for authors.
std::vector<HashtagEntities> AbnormalEntitiesPerHashtag(const Cube& base5,
                                                        const std::vector<std::string>& hashtags,
                                                        const DrilldownOptions& options = {});

struct Topic {
  std::vector<std::string> hashtags;   // sorted
  std::vector<std::string> spreaders;  // common abnormal spreaders
  std::vector<std::string> authors;    // common abnormal authors

  bool operator==(const Topic&) const = default;
};

// Every N-subset of `groups` whose abnormal spreader sets and abnormal author
// sets both intersect. Subsets are pruned with pairwise intersections before
// the search. Sorted by hashtag list. Throws std::invalid_argument when
// n == 0 or n > groups.size().
std::vector<Topic> EnumerateTopics(const std::vector<HashtagEntities>& groups, std::size_t n);

// Exhaustive enumeration without pruning; reference for tests.
std::vector<Topic> EnumerateTopicsExhaustive(const std::vector<HashtagEntities>& groups,
                                             std::size_t n);

// Candidates default to the hashtags of the global abnormal triplets.
std::vector<Topic> DiscoverTopics(const Cube& base5, const std::vector<std::string>& candidates,
                                  std::size_t n, const DrilldownOptions& options = {});

// ---------------------------------------------------------------------------
// User-topic link prediction

// spreader -> community
using CommunityAssignment = std::map<std::string, std::string, std::less<>>;

enum class LinkPredictionMode {
  kLiteral,  // v(K, d, h) / |D|
  kMeanDay,  // v(K, *, h) / |D|
};

std::string_view LinkPredictionModeName(LinkPredictionMode mode);
LinkPredictionMode ParseLinkPredictionMode(std::string_view name);

struct LinkPrediction {
  std::optional<double> expected;  // nullopt when a denominator is 0
  double community_share = 0.0;    // v(c_s, K) / v(K)
  double hour_share = 0.0;         // v(s, h) / v(c_s, h)
  double topic_rate = 0.0;         // v(K, d, h) / |D| (or the mean-day form)
};

// [v(c_s, K) / v(K)] * [v(s, h) / v(c_s, h)] * [v(K, d, h) / |D|], where K
// stands for the sum over the listed hashtags. Throws std::invalid_argument
// when the spreader has no community, a hashtag is unknown or the hour is
// outside 0..23.
LinkPrediction PredictUserTopic(const Cube& base5, const CommunityAssignment& communities,
                                std::string_view spreader,
                                const std::vector<std::string>& hashtags, std::string_view day,
                                int hour, LinkPredictionMode mode = LinkPredictionMode::kLiteral);

}  // namespace cubelens

#endif  // CUBELENS_DETECT_H_
