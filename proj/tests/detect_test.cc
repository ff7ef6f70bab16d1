#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cubelens/detect.h"
#include "support.h"

namespace cubelens {
namespace {

using testing::DayLabel;
using testing::HandCell;
using testing::HandEvaluation;

// ---------------------------------------------------------------------------
// Calendar and grouping

TEST(Calendar, FillsMissingIsoDays) {
  Calendar c = Calendar::FromDays({"2016-08-03", "2016-07-30", "2016-08-01"});
  ASSERT_EQ(c.days().size(), 5u);
  EXPECT_EQ(c.days().front(), "2016-07-30");
  EXPECT_EQ(c.days()[2], "2016-08-01");
  EXPECT_EQ(*c.IndexOf("2016-08-02"), 3u);
  EXPECT_FALSE(c.IndexOf("2016-08-04").has_value());
}

TEST(Calendar, IntegerAndFreeLabels) {
  Calendar ints = Calendar::FromDays({"12", "9", "10"});
  EXPECT_EQ(ints.days(), (std::vector<std::string>{"9", "10", "11", "12"}));
  Calendar free = Calendar::FromDays({"mon", "fri", "mon"});
  EXPECT_EQ(free.days(), (std::vector<std::string>{"fri", "mon"}));
}

TEST(Events, CrossMidnightRun) {
  Calendar cal = Calendar::FromDays({"2016-08-12", "2016-08-13"});
  auto events = GroupEvents({{"2016-08-13", 1}, {"2016-08-12", 22}, {"2016-08-13", 0}, {"2016-08-12", 23}}, cal);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].hours.size(), 4u);
  EXPECT_EQ(events[0].Label(), "2016-08-12 22h - 2016-08-13 1h");
  EXPECT_EQ(events[0].HourSet(), (std::vector<int>{0, 1, 22, 23}));
}

TEST(Events, ThreeSeparateEvents) {
  Calendar cal = Calendar::FromDays({"2016-08-01", "2016-08-05"});
  auto events = GroupEvents(
      {{"2016-08-01", 3}, {"2016-08-01", 5}, {"2016-08-01", 6}, {"2016-08-04", 20}, {"2016-08-04", 21}}, cal);
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0].Label(), "2016-08-01 3h");
  EXPECT_EQ(events[1].Label(), "2016-08-01 5h-6h");
  EXPECT_EQ(events[2].Label(), "2016-08-04 20h-21h");
}

TEST(Events, MissingDayBreaksRun) {
  // 2016-08-02 is absent from the data but still on the calendar.
  Calendar cal = Calendar::FromDays({"2016-08-01", "2016-08-03"});
  auto events = GroupEvents({{"2016-08-01", 23}, {"2016-08-03", 0}}, cal);
  EXPECT_EQ(events.size(), 2u);
}

TEST(Events, DuplicatesAndUnknownDaysIgnored) {
  Calendar cal = Calendar::FromDays({"2016-08-01"});
  auto events = GroupEvents({{"2016-08-01", 4}, {"2016-08-01", 4}, {"2017-01-01", 5}}, cal);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].hours.size(), 1u);
  EXPECT_TRUE(GroupEvents({}, cal).empty());
}

TEST(Events, GroupingProperties) {
  std::mt19937_64 rng(21);
  std::vector<std::string> days;
  for (int d = 1; d <= 10; ++d) days.push_back(DayLabel(d));
  Calendar cal = Calendar::FromDays(days);
  for (int trial = 0; trial < 300; ++trial) {
    std::bernoulli_distribution pick(0.05 + 0.002 * trial);
    std::set<std::int64_t> chosen;
    std::vector<HourSlot> slots;
    for (int d = 1; d <= 10; ++d) {
      for (int h = 0; h < 24; ++h) {
        if (pick(rng)) {
          slots.push_back({DayLabel(d), h});
          chosen.insert((d - 1) * 24 + h);
        }
      }
    }
    std::shuffle(slots.begin(), slots.end(), rng);
    auto events = GroupEvents(slots, cal);
    std::set<std::int64_t> covered;
    std::int64_t prev_end = -10;
    for (const auto& e : events) {
      ASSERT_FALSE(e.hours.empty());
      std::int64_t prev = -1;
      for (const auto& s : e.hours) {
        const std::int64_t idx = *cal.HourIndex(s);
        if (prev >= 0) {
          ASSERT_EQ(idx, prev + 1);
        }
        ASSERT_TRUE(covered.insert(idx).second);
        prev = idx;
      }
      // Maximal: neighbours just outside the run are not abnormal.
      const std::int64_t first = *cal.HourIndex(e.hours.front());
      EXPECT_FALSE(chosen.count(first - 1));
      EXPECT_FALSE(chosen.count(prev + 1));
      EXPECT_GT(first, prev_end + 1);
      prev_end = prev;
    }
    EXPECT_EQ(covered, chosen);
  }
}

Cube FlatInteractions(int days, std::uint64_t per_hour,
                      const std::vector<std::tuple<int, int, std::uint64_t>>& extra) {
  CubeBuilder b(DimensionSchema::Interactions());
  for (int d = 1; d <= days; ++d) {
    for (int h = 0; h < 24; ++h) b.Add({"s", "a", DayLabel(d), std::to_string(h)}, per_hour);
  }
  for (const auto& [d, h, n] : extra) b.Add({"s2", "a2", DayLabel(d), std::to_string(h)}, n);
  return std::move(b).Build();
}

TEST(Events, DetectedFromHourEvaluation) {
  Cube base = FlatInteractions(10, 50, {{3, 23, 400}, {4, 0, 400}, {7, 12, 500}});
  ContextEvaluation eval = EvaluateContext(HourExpected(base, HourContext::kMultiAggregative),
                                           DeviationKind::kPoisson, OutlierPolicy{});
  auto events = DetectEvents(eval);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].Label(), "2016-08-03 23h - 2016-08-04 0h");
  EXPECT_EQ(events[1].Label(), "2016-08-07 12h");
}

TEST(Events, EmptyHoursAreNeverAbnormal) {
  CubeBuilder b(DimensionSchema::Interactions());
  for (int d = 1; d <= 5; ++d) {
    for (int h = 0; h < 24; ++h) {
      if (h != 4) b.Add({"s", "a", DayLabel(d), std::to_string(h)}, 200);
    }
  }
  Cube base = std::move(b).Build();
  OutlierPolicy p;
  p.sigma_multiplier = 0.5;
  ContextEvaluation eval = EvaluateContext(HourExpected(base, HourContext::kBasic), DeviationKind::kPoisson, p);
  for (const auto& s : AbnormalHours(eval)) EXPECT_NE(s.hour, 4);
}

TEST(HourContexts, ExpectedValues) {
  // Day 1: 10 per hour; day 2: 30 at hour 0 only.
  CubeBuilder b(DimensionSchema::Interactions());
  for (int h = 0; h < 24; ++h) b.Add({"s", "a", DayLabel(1), std::to_string(h)}, 10);
  b.Add({"s", "a", DayLabel(2), "0"}, 30);
  Cube base = std::move(b).Build();
  auto lookup = [&](const ExpectedField& f, const std::string& day, int hour) {
    for (const auto& c : f.cells) {
      auto l = f.observed.Labels(c.key);
      if (l[0] == day && l[1] == std::to_string(hour)) return c.expected;
    }
    return -1.0;
  };
  const double total = 270.0;
  ExpectedField basic = HourExpected(base, HourContext::kBasic);
  EXPECT_NEAR(lookup(basic, DayLabel(2), 5), total / 48.0, 1e-12);
  ExpectedField agg = HourExpected(base, HourContext::kAggregative);
  EXPECT_NEAR(lookup(agg, DayLabel(2), 0), 30.0 / 24.0, 1e-12);
  ExpectedField multi = HourExpected(base, HourContext::kMultiAggregative);
  EXPECT_NEAR(lookup(multi, DayLabel(2), 0), 30.0 * 40.0 / total, 1e-12);
  EXPECT_NEAR(lookup(multi, DayLabel(1), 0), 240.0 * 40.0 / total, 1e-12);
  EXPECT_NEAR(lookup(multi, DayLabel(1), 7), 240.0 * 10.0 / total, 1e-12);
}

// ---------------------------------------------------------------------------
// Cause and regime

TEST(Cause, OneMainByGap) {
  auto eval = HandEvaluation({{"a1", 1200, true}, {"a2", 80, true}, {"a3", -1, false}});
  CauseClassification c = ClassifyCause(eval);
  EXPECT_EQ(c.kind, CauseKind::kOneMain);
  ASSERT_EQ(c.main_entities.size(), 1u);
  EXPECT_EQ(c.main_entities[0].label, "a1");
}

TEST(Cause, SeveralMain) {
  auto eval = HandEvaluation(
      {{"a1", 300, true}, {"a2", 280, true}, {"a3", 260, true}, {"a4", 250, true}, {"a5", 240, true}, {"x", 0, false}});
  CauseClassification c = ClassifyCause(eval);
  EXPECT_EQ(c.kind, CauseKind::kSeveralMain);
  ASSERT_EQ(c.main_entities.size(), 5u);
  EXPECT_EQ(c.main_entities[0].label, "a1");
  EXPECT_EQ(c.main_entities[4].label, "a5");
}

TEST(Cause, GapBoundary) {
  EXPECT_EQ(ClassifyCause(HandEvaluation({{"a", 30, true}, {"b", 10, true}})).kind, CauseKind::kOneMain);
  EXPECT_EQ(ClassifyCause(HandEvaluation({{"a", 29.9, true}, {"b", 10, true}})).kind, CauseKind::kSeveralMain);
  EXPECT_EQ(ClassifyCause(HandEvaluation({{"a", 29.9, true}, {"b", 10, true}}), 2.0).kind, CauseKind::kOneMain);
}

TEST(Cause, NoMain) {
  EXPECT_EQ(ClassifyCause(HandEvaluation({{"a", 1, false}, {"b", -40, true}})).kind, CauseKind::kNoMain);
  EXPECT_EQ(ClassifyCause(HandEvaluation({})).kind, CauseKind::kNoMain);
}

TEST(Regime, Kinds) {
  SpreaderRegime single = ClassifyRegime(HandEvaluation({{"s1", 50, true, 60}, {"s2", 0, false, 40}}), 100);
  EXPECT_EQ(single.kind, RegimeKind::kSingleActivist);
  EXPECT_DOUBLE_EQ(single.share, 0.6);

  SpreaderRegime group = ClassifyRegime(
      HandEvaluation({{"s1", 20, true, 10}, {"s2", 18, true, 10}, {"s3", 0, false, 80}}), 100);
  EXPECT_EQ(group.kind, RegimeKind::kActivistGroup);
  EXPECT_EQ(group.group_retweets, 20u);

  // One outlier under the single threshold but above the group threshold.
  SpreaderRegime lone = ClassifyRegime(HandEvaluation({{"s1", 20, true, 30}, {"s2", 0, false, 70}}), 100);
  EXPECT_EQ(lone.kind, RegimeKind::kActivistGroup);

  SpreaderRegime global = ClassifyRegime(HandEvaluation({{"s1", 20, true, 5}, {"s2", 0, false, 95}}), 100);
  EXPECT_EQ(global.kind, RegimeKind::kGlobalPhenomenon);

  SpreaderRegime none = ClassifyRegime(HandEvaluation({{"s1", 0, false, 100}}), 100);
  EXPECT_EQ(none.kind, RegimeKind::kGlobalPhenomenon);
  EXPECT_TRUE(none.group.empty());
}

// ---------------------------------------------------------------------------
// Drill-downs

// Authors a1..a3 with 10 retweets each at 20h on days 1..10; on day 11 at 20h
// a2 jumps to 60.
Cube AuthorBase() {
  CubeBuilder b(DimensionSchema::Interactions());
  for (int d = 1; d <= 10; ++d) {
    for (const char* a : {"a1", "a2", "a3"}) b.Add({"s", a, DayLabel(d), "20"}, 10);
    b.Add({"s", "a1", DayLabel(d), "9"}, 7);
  }
  b.Add({"s", "a1", DayLabel(11), "20"}, 10);
  b.Add({"s", "a2", DayLabel(11), "20"}, 60);
  b.Add({"s", "a3", DayLabel(11), "20"}, 10);
  return std::move(b).Build();
}

TEST(Authors, ExpectedFollowsLocalShare) {
  Cube base = AuthorBase();
  Event e{{{DayLabel(11), 20}}};
  DrilldownOptions opts;
  opts.policy.sigma_multiplier = 1.0;
  AuthorExplanation x = ExplainEventAuthors(base, e, opts);
  EXPECT_EQ(x.event_total, 80u);
  const std::map<std::string, double> history{{"a1", 110}, {"a2", 160}, {"a3", 110}};
  ASSERT_EQ(x.eval.cells.size(), 3u);
  double sum = 0;
  for (const auto& c : x.eval.cells) {
    const std::string a = x.eval.Labels(c)[0];
    EXPECT_NEAR(c.expected, 80.0 * history.at(a) / 380.0, 1e-9) << a;
    sum += c.expected;
  }
  EXPECT_NEAR(sum, 80.0, 1e-9);
  EXPECT_EQ(x.cause.kind, CauseKind::kOneMain);
  ASSERT_EQ(x.cause.main_entities.size(), 1u);
  EXPECT_EQ(x.cause.main_entities[0].label, "a2");
}

TEST(Authors, ThreeCellsCannotReachThreeSigma) {
  // With n finite values no |z| exceeds sqrt(n - 1).
  AuthorExplanation x = ExplainEventAuthors(AuthorBase(), Event{{{DayLabel(11), 20}}});
  EXPECT_EQ(x.cause.kind, CauseKind::kNoMain);
}

TEST(Authors, UnknownDayIsDataError) {
  EXPECT_THROW(ExplainEventAuthors(AuthorBase(), Event{{{DayLabel(20), 20}}}), DataError);
}

TEST(Spreaders, ExpectedAndRegime) {
  // 30 spreaders retweet "a" twice at 20h on days 1..11; s1 adds 100 on day 11.
  CubeBuilder b(DimensionSchema::Interactions());
  for (int d = 1; d <= 11; ++d) {
    for (int s = 1; s <= 30; ++s) b.Add({"s" + std::to_string(s), "a", DayLabel(d), "20"}, 2);
  }
  b.Add({"s1", "a", DayLabel(11), "20"}, 100);
  b.Add({"x", "b", DayLabel(11), "20"}, 5);
  Cube base = std::move(b).Build();
  SpreaderExplanation x = ExplainEventSpreaders(base, Event{{{DayLabel(11), 20}}}, "a");
  // v(a, e) = 160, v(a, H_e) = 760, v(s1, a, H_e) = 122, others 22.
  double sum = 0;
  for (const auto& c : x.eval.cells) {
    const std::string s = x.eval.Labels(c)[0];
    EXPECT_NEAR(c.expected, 160.0 * (s == "s1" ? 122.0 : 22.0) / 760.0, 1e-9) << s;
    sum += c.expected;
  }
  EXPECT_NEAR(sum, 160.0, 1e-9);
  EXPECT_EQ(x.regime.kind, RegimeKind::kSingleActivist);
  EXPECT_EQ(x.regime.event_total, 160u);
  ASSERT_EQ(x.regime.group.size(), 1u);
  EXPECT_EQ(x.regime.group[0].label, "s1");
  EXPECT_NEAR(x.regime.share, 102.0 / 160.0, 1e-12);
  EXPECT_THROW(ExplainEventSpreaders(base, Event{{{DayLabel(11), 20}}}, "nobody"), DataError);
}

TEST(Drilldown, MassIsConservedOnRandomBases) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    auto rb = testing::MakeRandomBase(rng, 20000);
    Cube base = KeepDims(rb.cube, {"spreader", "author", "day", "hour"});
    Event e{{{DayLabel(2), 22}, {DayLabel(2), 23}, {DayLabel(3), 0}}};
    AuthorExplanation x = ExplainEventAuthors(base, e);
    double exp_sum = 0;
    std::uint64_t obs_sum = 0;
    for (const auto& c : x.eval.cells) {
      exp_sum += c.expected;
      obs_sum += c.observed;
    }
    EXPECT_EQ(obs_sum, x.event_total);
    EXPECT_NEAR(exp_sum, static_cast<double>(x.event_total), 1e-9 * x.event_total);
  }
}

// ---------------------------------------------------------------------------
// Hashtags

TEST(Hashtags, GlobalFindsPlantedTriplet) {
  CubeBuilder b(DimensionSchema::HashtagInteractions());
  for (int d = 1; d <= 10; ++d) {
    for (int h = 0; h < 24; ++h) {
      for (const char* k : {"b1", "b2", "b3", "b4"}) {
        std::uint64_t n = 10;
        if (std::string(k) == "b1" && h == 12 && d >= 2 && d <= 9) n = 4;
        b.Add({"s", "a", k, DayLabel(d), std::to_string(h)}, n);
      }
    }
  }
  b.Add({"s", "a", "k", DayLabel(1), "12"}, 48);
  Cube base = std::move(b).Build();
  ContextEvaluation eval;
  auto found = AbnormalHashtagsGlobal(base, {}, &eval);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].hashtag, "k");
  EXPECT_EQ(found[0].day, DayLabel(1));
  EXPECT_EQ(found[0].hour, 12);
  EXPECT_EQ(found[0].observed, 48u);
  EXPECT_NEAR(found[0].expected, 2.0, 1e-12);
  EXPECT_NEAR(found[0].deviation, DeviationPoisson(48, 2.0).value, 1e-12);
}

TEST(Hashtags, EventLocalShare) {
  CubeBuilder b(DimensionSchema::HashtagInteractions());
  for (int d = 1; d <= 20; ++d) {
    for (int k = 1; k <= 20; ++k) b.Add({"s", "a", "k" + std::to_string(k), DayLabel(d), "12"}, 5);
  }
  b.Add({"s", "a", "k1", DayLabel(21), "12"}, 90);
  for (int k = 2; k <= 11; ++k) b.Add({"s", "a", "k" + std::to_string(k), DayLabel(21), "12"}, 1);
  Cube base = std::move(b).Build();
  ContextEvaluation eval;
  auto found = AbnormalHashtagsForEvent(base, Event{{{DayLabel(21), 12}}}, {}, &eval);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].label, "k1");
  EXPECT_NEAR(found[0].expected, 100.0 * 190.0 / 2100.0, 1e-9);
}

// ---------------------------------------------------------------------------
// Topics

HashtagEntities Group(std::string k, std::vector<std::string> s, std::vector<std::string> a) {
  return {std::move(k), std::move(s), std::move(a)};
}

TEST(Topics, SharedSpreadersAndAuthors) {
  std::vector<HashtagEntities> g{Group("k1", {"s1"}, {"a1"}), Group("k2", {"s2"}, {"a1"}),
                                 Group("k3", {"s2", "s3"}, {"a1"})};
  EXPECT_TRUE(EnumerateTopics(g, 3).empty());
  auto pairs = EnumerateTopics(g, 2);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].hashtags, (std::vector<std::string>{"k2", "k3"}));
  EXPECT_EQ(pairs[0].spreaders, (std::vector<std::string>{"s2"}));
  EXPECT_EQ(pairs[0].authors, (std::vector<std::string>{"a1"}));
  EXPECT_EQ(EnumerateTopics(g, 1).size(), 3u);
  EXPECT_THROW(EnumerateTopics(g, 0), std::invalid_argument);
  EXPECT_THROW(EnumerateTopics(g, 4), std::invalid_argument);
}

TEST(Topics, EmptyEntitySetsNeverFormTopics) {
  std::vector<HashtagEntities> g{Group("k1", {}, {"a1"}), Group("k2", {"s1"}, {"a1"})};
  auto singles = EnumerateTopics(g, 1);
  ASSERT_EQ(singles.size(), 1u);
  EXPECT_EQ(singles[0].hashtags[0], "k2");
}

// Bitmask enumeration over all subsets.
std::vector<Topic> OracleTopics(const std::vector<HashtagEntities>& g, std::size_t n) {
  std::vector<Topic> out;
  const std::size_t m = g.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
    std::set<std::string> s, a;
    bool first = true;
    Topic t;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      t.hashtags.push_back(g[i].hashtag);
      std::set<std::string> si(g[i].spreaders.begin(), g[i].spreaders.end());
      std::set<std::string> ai(g[i].authors.begin(), g[i].authors.end());
      if (first) {
        s = si;
        a = ai;
        first = false;
      } else {
        std::set<std::string> s2, a2;
        std::set_intersection(s.begin(), s.end(), si.begin(), si.end(), std::inserter(s2, s2.end()));
        std::set_intersection(a.begin(), a.end(), ai.begin(), ai.end(), std::inserter(a2, a2.end()));
        s = s2;
        a = a2;
      }
    }
    if (s.empty() || a.empty()) continue;
    std::sort(t.hashtags.begin(), t.hashtags.end());
    t.spreaders.assign(s.begin(), s.end());
    t.authors.assign(a.begin(), a.end());
    out.push_back(t);
  }
  std::sort(out.begin(), out.end(), [](const Topic& x, const Topic& y) { return x.hashtags < y.hashtags; });
  return out;
}

TEST(Topics, MatchesSubsetOracle) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 4 + trial % 9;
    std::bernoulli_distribution has(0.35 + 0.01 * (trial % 30));
    std::vector<HashtagEntities> g;
    for (std::size_t i = 0; i < m; ++i) {
      HashtagEntities h;
      h.hashtag = "k" + std::to_string(i);
      for (int s = 0; s < 6; ++s) {
        if (has(rng)) h.spreaders.push_back("s" + std::to_string(s));
      }
      for (int a = 0; a < 5; ++a) {
        if (has(rng)) h.authors.push_back("a" + std::to_string(a));
      }
      g.push_back(h);
    }
    for (std::size_t n = 1; n <= std::min<std::size_t>(m, 5); ++n) {
      auto oracle = OracleTopics(g, n);
      ASSERT_EQ(EnumerateTopics(g, n), oracle) << "trial " << trial << " n " << n;
      ASSERT_EQ(EnumerateTopicsExhaustive(g, n), oracle);
    }
  }
}

TEST(Topics, AbnormalEntitiesFromCube) {
  // Hashtag k is carried once a day by every pair at 12h, then s1 -> a1
  // bursts on day 5.
  CubeBuilder b(DimensionSchema::HashtagInteractions());
  for (int d = 1; d <= 10; ++d) {
    for (int h = 8; h < 20; ++h) {
      for (int s = 1; s <= 5; ++s) {
        b.Add({"s" + std::to_string(s), "a" + std::to_string(s), "bg", DayLabel(d), std::to_string(h)}, 3);
      }
    }
  }
  for (int d = 1; d <= 10; ++d) {
    for (int s = 1; s <= 5; ++s) b.Add({"s" + std::to_string(s), "a" + std::to_string(s), "k", DayLabel(d), "12"}, 1);
  }
  b.Add({"s1", "a1", "k", DayLabel(5), "12"}, 60);
  Cube base = std::move(b).Build();
  auto groups = AbnormalEntitiesPerHashtag(base, {"k"});
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].hashtag, "k");
  EXPECT_EQ(groups[0].spreaders, (std::vector<std::string>{"s1"}));
  EXPECT_EQ(groups[0].authors, (std::vector<std::string>{"a1"}));
}

// ---------------------------------------------------------------------------
// Link prediction

Cube LinkBase() {
  CubeBuilder b(DimensionSchema::HashtagInteractions());
  b.Add({"s", "x", "k", DayLabel(1), "5"}, 3);
  b.Add({"t", "x", "k", DayLabel(1), "5"}, 12);
  b.Add({"u", "x", "k", DayLabel(1), "5"}, 15);
  b.Add({"u", "x", "z", DayLabel(2), "7"}, 1);
  b.Add({"u", "x", "z", DayLabel(3), "7"}, 1);
  return std::move(b).Build();
}

TEST(LinkPrediction, Factors) {
  CommunityAssignment comm{{"s", "c"}, {"t", "c"}, {"u", "other"}};
  LinkPrediction p = PredictUserTopic(LinkBase(), comm, "s", {"k"}, DayLabel(1), 5);
  ASSERT_TRUE(p.expected.has_value());
  EXPECT_NEAR(p.community_share, 0.5, 1e-15);
  EXPECT_NEAR(p.hour_share, 0.2, 1e-15);
  EXPECT_NEAR(p.topic_rate, 10.0, 1e-12);
  EXPECT_NEAR(*p.expected, 1.0, 1e-12);
  LinkPrediction mean = PredictUserTopic(LinkBase(), comm, "s", {"k"}, DayLabel(1), 5, LinkPredictionMode::kMeanDay);
  EXPECT_NEAR(*mean.expected, 1.0, 1e-12);
}

TEST(LinkPrediction, ZeroDenominators) {
  CommunityAssignment comm{{"s", "c"}, {"t", "c"}, {"u", "other"}};
  // No activity of the community at 7h.
  LinkPrediction p = PredictUserTopic(LinkBase(), comm, "s", {"k"}, DayLabel(2), 7);
  EXPECT_FALSE(p.expected.has_value());
  EXPECT_THROW(PredictUserTopic(LinkBase(), comm, "s", {"nope"}, DayLabel(1), 5), std::invalid_argument);
  EXPECT_THROW(PredictUserTopic(LinkBase(), comm, "s", {"k"}, DayLabel(1), 24), std::invalid_argument);
  EXPECT_THROW(PredictUserTopic(LinkBase(), comm, "ghost", {"k"}, DayLabel(1), 5), std::invalid_argument);
}

TEST(LinkPrediction, SumOverHashtagList) {
  CommunityAssignment comm{{"s", "c"}, {"t", "c"}, {"u", "other"}};
  LinkPrediction p = PredictUserTopic(LinkBase(), comm, "u", {"k", "z"}, DayLabel(2), 7);
  // v(other, K) / v(K) = 17 / 32; v(u, 7) / v(other, 7) = 1; v(K, d2, 7) / 3.
  ASSERT_TRUE(p.expected.has_value());
  EXPECT_NEAR(*p.expected, 17.0 / 32.0 * 1.0 / 3.0, 1e-12);
}

}  // namespace
}  // namespace cubelens
