#include <gtest/gtest.h>

#include <sstream>

#include "cubelens/synth.h"
#include "json.hpp"

namespace cubelens {
namespace {

std::string LogText(const SynthResult& r) {
  std::ostringstream out;
  WriteLog(out, r.entries);
  return out.str();
}

TEST(Synth, DeterministicForSeed) {
  const auto spec = PresetScenario("fixture", 7);
  EXPECT_EQ(LogText(Generate(spec)), LogText(Generate(spec)));
  EXPECT_NE(LogText(Generate(spec)), LogText(Generate(PresetScenario("fixture", 8))));
}

TEST(Synth, EntriesSortedAndInRange) {
  const auto spec = PresetScenario("fixture", 1);
  SynthResult r = Generate(spec);
  ASSERT_FALSE(r.entries.empty());
  const std::int64_t lo = SlotTimestamp(spec, 1, 0);
  const std::int64_t hi = SlotTimestamp(spec, spec.days, 23) + 3600;
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    if (i > 0) {
      ASSERT_LE(r.entries[i - 1].timestamp, r.entries[i].timestamp);
    }
    ASSERT_GE(r.entries[i].timestamp, lo);
    ASSERT_LT(r.entries[i].timestamp, hi);
  }
  EXPECT_EQ(SlotTimestamp(spec, 1, 0), 1470009600);
}

TEST(Synth, ManifestAccountsForEveryRecord) {
  SynthResult r = Generate(PresetScenario("fixture", 3));
  auto m = nlohmann::json::parse(ManifestJson(r));
  std::uint64_t planted = 0;
  for (const auto& p : m.at("plants")) planted += p.at("records").get<std::uint64_t>();
  EXPECT_EQ(m.at("baseline_records").get<std::uint64_t>() + planted, r.entries.size());
  EXPECT_EQ(m.at("total_records").get<std::size_t>(), r.entries.size());
  ASSERT_EQ(m.at("plants").size(), 3u);
  EXPECT_EQ(m.at("plants")[2].at("actors").size(), 12u);
}

TEST(Synth, PlantVolumes) {
  SynthResult r = Generate(PresetScenario("single-activist", 2));
  ASSERT_EQ(r.plants.size(), 1u);
  EXPECT_EQ(r.plants[0].records, 120u);
  std::uint64_t by_pair = 0;
  for (const auto& e : r.entries) {
    if (e.spreader == UserName(777) && e.author == UserName(1)) ++by_pair;
  }
  EXPECT_GE(by_pair, 120u);
}

TEST(Synth, ScenarioJsonRoundTrip) {
  ScenarioSpec spec = PresetScenario("activist-group", 5);
  ScenarioSpec again = ScenarioFromJson(ScenarioToJson(spec));
  EXPECT_EQ(ScenarioToJson(again), ScenarioToJson(spec));
  EXPECT_EQ(LogText(Generate(again)), LogText(Generate(spec)));
}

TEST(Synth, Validation) {
  ScenarioSpec spec = PresetScenario("hour-spikes", 1);
  spec.plants[0].factor = 1.0;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
  spec = PresetScenario("hour-spikes", 1);
  spec.plants[0].day = 40;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
  spec = PresetScenario("hour-spikes", 1);
  spec.profile.fill(0.0);
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
  EXPECT_THROW(PresetScenario("nope"), std::invalid_argument);
  EXPECT_THROW(ScenarioFromJson("{not json"), std::invalid_argument);
  EXPECT_THROW(ParsePlantKind("meteor"), std::invalid_argument);
}

TEST(Synth, PresetNamesResolve) {
  for (const auto& name : PresetNames()) EXPECT_NO_THROW(PresetScenario(name, 1).Validate()) << name;
  EXPECT_EQ(UserName(12), "user-12");
}

}  // namespace
}  // namespace cubelens
