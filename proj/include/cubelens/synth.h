// Synthetic interaction logs with planted anomalies.
//
// Baseline counts are Poisson per (day, hour), scaled by a diurnal profile and
// attributed to random (spreader, author) pairs: spreaders uniform, authors
// Zipf-distributed over the user population. Plants add records on top and
// are listed in a ground-truth manifest. Generation is deterministic given
// the seed.

#ifndef CUBELENS_SYNTH_H_
#define CUBELENS_SYNTH_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cubelens/ingest.h"

namespace cubelens {

enum class PlantKind {
  kHourSpike,       // (day, hour) count multiplied by `factor` on average
  kActivistGroup,   // `spreaders` users retweet `author` `volume` times in total
  kSingleActivist,  // `spreader` retweets `author` `volume` times
  kCrowdBurst,      // `volume` retweets of `author` by uniformly drawn users
  kHotHashtag,      // `volume` records carrying hashtag `key`
};

std::string_view PlantKindName(PlantKind kind);
PlantKind ParsePlantKind(std::string_view name);

struct Plant {
  PlantKind kind = PlantKind::kHourSpike;
  int day = 1;    // 1-based
  int hour = 0;   // first hour
  int hours = 1;  // window length, may cross midnight
  double factor = 5.0;
  std::string author;
  std::string spreader;
  int spreaders = 0;
  std::uint64_t volume = 0;
  std::string key;      // hot-hashtag key
  std::string hashtag;  // optional hashtag carried by activist and crowd records
};

struct ScenarioSpec {
  int days = 31;
  int users = 2000;
  std::array<double, 24> profile{};  // relative weights per hour of day
  double baseline = 40.0;            // mean records per hour over the day
  std::uint64_t seed = 1;
  std::string start_date = "2016-08-01";
  double author_zipf = 1.0;
  int hashtag_vocabulary = 200;
  double hashtag_rate = 0.3;  // probability that a baseline record carries a hashtag
  std::vector<Plant> plants;

  // Throws std::invalid_argument on factor <= 1, windows outside the
  // scenario, an all-zero profile or inconsistent plant fields.
  void Validate() const;
};

// Typical day: quiet at night, busy in the evening.
std::array<double, 24> DiurnalProfile();
std::array<double, 24> FlatProfile();

struct PlantOutcome {
  Plant plant;
  std::uint64_t records = 0;            // records added by this plant
  std::vector<std::string> spreaders;   // users acting in the plant
  std::vector<DayHour> slots;           // hours touched
};

struct SynthResult {
  ScenarioSpec spec;
  std::vector<LogEntry> entries;  // sorted by timestamp
  std::uint64_t baseline_records = 0;
  std::vector<PlantOutcome> plants;
};

SynthResult Generate(const ScenarioSpec& spec);

// Name of user n (1-based).
std::string UserName(int n);

// Presets: "fixture", "hour-spikes", "single-activist", "activist-group",
// "global-burst". Throws std::invalid_argument for other names.
ScenarioSpec PresetScenario(std::string_view name, std::uint64_t seed = 1);
std::vector<std::string> PresetNames();

std::string ScenarioToJson(const ScenarioSpec& spec);
ScenarioSpec ScenarioFromJson(std::string_view text);

// Ground truth as JSON.
std::string ManifestJson(const SynthResult& result);

// Epoch seconds of (day, hour) of the scenario, in UTC.
std::int64_t SlotTimestamp(const ScenarioSpec& spec, int day, int hour);

}  // namespace cubelens

#endif  // CUBELENS_SYNTH_H_
