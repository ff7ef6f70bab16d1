#include "cubelens/synth.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cubelens {

namespace {

using nlohmann::json;

constexpr std::int64_t kSecondsPerHour = 3600;

std::chrono::sys_days ParseStartDate(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char dash1 = 0;
  char dash2 = 0;
  std::istringstream in(text);
  in >> y >> dash1 >> m >> dash2 >> d;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!in || dash1 != '-' || dash2 != '-' || !ymd.ok()) {
    throw std::invalid_argument("malformed start date '" + text + "' (expected YYYY-MM-DD)");
  }
  return std::chrono::sys_days{ymd};
}

class Generator {
 public:
  explicit Generator(const ScenarioSpec& spec)
      : spec_(spec),
        rng_(spec.seed),
        spreader_dist_(1, spec.users),
        author_dist_(Zipf(spec.users, spec.author_zipf)),
        hashtag_dist_(Zipf(std::max(1, spec.hashtag_vocabulary), 1.0)) {}

  SynthResult Run() {
    SynthResult result;
    result.spec = spec_;
    const double weight_sum = std::accumulate(spec_.profile.begin(), spec_.profile.end(), 0.0);

    std::map<std::pair<int, int>, double> spike_factor;
    for (const auto& p : spec_.plants) {
      if (p.kind == PlantKind::kHourSpike) spike_factor[{p.day, p.hour}] = p.factor;
    }
    std::map<std::pair<int, int>, std::uint64_t> spike_records;

    for (int day = 1; day <= spec_.days; ++day) {
      for (int hour = 0; hour < kHoursPerDay; ++hour) {
        const double lambda = spec_.baseline * kHoursPerDay * spec_.profile[hour] / weight_sum;
        const std::uint64_t n = Poisson(lambda);
        for (std::uint64_t i = 0; i < n; ++i) AddRandom(day, hour, BaselineHashtags());
        result.baseline_records += n;
        auto spike = spike_factor.find({day, hour});
        if (spike != spike_factor.end()) {
          const std::uint64_t extra = Poisson((spike->second - 1.0) * lambda);
          for (std::uint64_t i = 0; i < extra; ++i) AddRandom(day, hour, BaselineHashtags());
          spike_records[{day, hour}] = extra;
        }
      }
    }

    for (const auto& p : spec_.plants) {
      PlantOutcome outcome;
      outcome.plant = p;
      const auto slots = Slots(p);
      for (const auto& [d, h] : slots) {
        outcome.slots.push_back(BinTime(SlotTimestamp(spec_, d, h)));
      }
      switch (p.kind) {
        case PlantKind::kHourSpike:
          outcome.records = spike_records[{p.day, p.hour}];
          break;
        case PlantKind::kSingleActivist:
          outcome.spreaders = {p.spreader};
          outcome.records = Spread(slots, outcome.spreaders, p);
          break;
        case PlantKind::kActivistGroup:
          outcome.spreaders = DistinctUsers(p.spreaders, p.author);
          outcome.records = Spread(slots, outcome.spreaders, p);
          break;
        case PlantKind::kCrowdBurst:
          for (std::uint64_t i = 0; i < p.volume; ++i) {
            const auto& [d, h] = slots[i % slots.size()];
            Add(d, h, RandomSpreader(p.author), p.author, Carried(p));
          }
          outcome.records = p.volume;
          break;
        case PlantKind::kHotHashtag:
          for (std::uint64_t i = 0; i < p.volume; ++i) {
            const auto& [d, h] = slots[i % slots.size()];
            AddRandom(d, h, {p.key});
          }
          outcome.records = p.volume;
          break;
      }
      result.plants.push_back(std::move(outcome));
    }

    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const LogEntry& a, const LogEntry& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i].line = i + 1;
    result.entries = std::move(entries_);
    return result;
  }

 private:
  static std::discrete_distribution<int> Zipf(int n, double exponent) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int r = 1; r <= n; ++r) w[r - 1] = 1.0 / std::pow(static_cast<double>(r), exponent);
    return std::discrete_distribution<int>(w.begin(), w.end());
  }

  std::uint64_t Poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(lambda)(rng_);
  }

  std::string RandomSpreader(const std::string& author) {
    while (true) {
      std::string s = UserName(spreader_dist_(rng_));
      if (s != author || spec_.users < 2) return s;
    }
  }

  std::vector<std::string> BaselineHashtags() {
    std::vector<std::string> tags;
    if (spec_.hashtag_vocabulary <= 0 || spec_.hashtag_rate <= 0.0) return tags;
    if (std::bernoulli_distribution(spec_.hashtag_rate)(rng_)) {
      tags.push_back("tag" + std::to_string(hashtag_dist_(rng_) + 1));
    }
    return tags;
  }

  static std::vector<std::string> Carried(const Plant& p) {
    if (p.hashtag.empty()) return {};
    return {p.hashtag};
  }

  void AddRandom(int day, int hour, std::vector<std::string> hashtags) {
    const std::string author = UserName(static_cast<int>(author_dist_(rng_)) + 1);
    Add(day, hour, RandomSpreader(author), author, std::move(hashtags));
  }

  void Add(int day, int hour, std::string spreader, std::string author,
           std::vector<std::string> hashtags) {
    LogEntry e;
    e.timestamp = SlotTimestamp(spec_, day, hour) +
                  std::uniform_int_distribution<std::int64_t>(0, kSecondsPerHour - 1)(rng_);
    e.spreader = std::move(spreader);
    e.author = std::move(author);
    e.hashtags = std::move(hashtags);
    entries_.push_back(std::move(e));
  }

  std::vector<std::pair<int, int>> Slots(const Plant& p) const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < p.hours; ++i) {
      const int t = (p.day - 1) * kHoursPerDay + p.hour + i;
      out.emplace_back(t / kHoursPerDay + 1, t % kHoursPerDay);
    }
    return out;
  }

  std::vector<std::string> DistinctUsers(int count, const std::string& exclude) {
    std::set<int> picked;
    std::vector<std::string> out;
    while (static_cast<int>(out.size()) < count) {
      const int n = spreader_dist_(rng_);
      if (UserName(n) == exclude || !picked.insert(n).second) continue;
      out.push_back(UserName(n));
    }
    return out;
  }

  // Splits the plant volume evenly over (spreader, slot) pairs; the first
  // pairs take the remainder.
  std::uint64_t Spread(const std::vector<std::pair<int, int>>& slots,
                       const std::vector<std::string>& spreaders, const Plant& p) {
    const std::uint64_t cells = slots.size() * spreaders.size();
    std::uint64_t k = 0;
    for (const auto& s : spreaders) {
      for (const auto& [d, h] : slots) {
        const std::uint64_t n = p.volume / cells + (k < p.volume % cells ? 1 : 0);
        for (std::uint64_t i = 0; i < n; ++i) Add(d, h, s, p.author, Carried(p));
        ++k;
      }
    }
    return p.volume;
  }

  const ScenarioSpec& spec_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<int> spreader_dist_;
  std::discrete_distribution<int> author_dist_;
  std::discrete_distribution<int> hashtag_dist_;
  std::vector<LogEntry> entries_;
};

Plant HourSpike(int day, int hour, double factor) {
  Plant p;
  p.kind = PlantKind::kHourSpike;
  p.day = day;
  p.hour = hour;
  p.factor = factor;
  return p;
}

Plant Window(PlantKind kind, int day, int hour, int hours, std::string author,
             std::uint64_t volume) {
  Plant p;
  p.kind = kind;
  p.day = day;
  p.hour = hour;
  p.hours = hours;
  p.author = std::move(author);
  p.volume = volume;
  return p;
}

json PlantToJson(const Plant& p) {
  json j{{"kind", PlantKindName(p.kind)}, {"day", p.day}, {"hour", p.hour}};
  switch (p.kind) {
    case PlantKind::kHourSpike:
      j["factor"] = p.factor;
      break;
    case PlantKind::kActivistGroup:
      j["spreaders"] = p.spreaders;
      [[fallthrough]];
    case PlantKind::kSingleActivist:
      if (p.kind == PlantKind::kSingleActivist) j["spreader"] = p.spreader;
      [[fallthrough]];
    case PlantKind::kCrowdBurst:
      j["author"] = p.author;
      j["hours"] = p.hours;
      j["volume"] = p.volume;
      if (!p.hashtag.empty()) j["hashtag"] = p.hashtag;
      break;
    case PlantKind::kHotHashtag:
      j["key"] = p.key;
      j["hours"] = p.hours;
      j["volume"] = p.volume;
      break;
  }
  return j;
}

Plant PlantFromJson(const json& j) {
  Plant p;
  p.kind = ParsePlantKind(j.at("kind").get<std::string>());
  p.day = j.value("day", 1);
  p.hour = j.value("hour", 0);
  p.hours = j.value("hours", 1);
  p.factor = j.value("factor", 5.0);
  p.author = j.value("author", std::string());
  p.spreader = j.value("spreader", std::string());
  p.spreaders = j.value("spreaders", 0);
  p.volume = j.value("volume", std::uint64_t{0});
  p.key = j.value("key", std::string());
  p.hashtag = j.value("hashtag", std::string());
  return p;
}

}  // namespace

std::string_view PlantKindName(PlantKind kind) {
  switch (kind) {
    case PlantKind::kHourSpike:
      return "hour-spike";
    case PlantKind::kActivistGroup:
      return "activist-group";
    case PlantKind::kSingleActivist:
      return "single-activist";
    case PlantKind::kCrowdBurst:
      return "crowd-burst";
    case PlantKind::kHotHashtag:
      return "hot-hashtag";
  }
  return "";
}

PlantKind ParsePlantKind(std::string_view name) {
  for (auto k : {PlantKind::kHourSpike, PlantKind::kActivistGroup, PlantKind::kSingleActivist,
                 PlantKind::kCrowdBurst, PlantKind::kHotHashtag}) {
    if (PlantKindName(k) == name) return k;
  }
  throw std::invalid_argument("unknown plant kind: " + std::string(name));
}

std::string UserName(int n) { return "user-" + std::to_string(n); }

std::array<double, 24> DiurnalProfile() {
  return {0.90, 0.65, 0.45, 0.45, 0.45, 0.45, 0.60, 0.80, 1.00, 1.00, 1.00, 1.00,
          1.00, 1.00, 1.00, 1.00, 1.00, 1.20, 1.50, 1.90, 2.10, 2.10, 1.70, 1.20};
}

std::array<double, 24> FlatProfile() {
  std::array<double, 24> p;
  p.fill(1.0);
  return p;
}

void ScenarioSpec::Validate() const {
  if (days < 1) throw std::invalid_argument("scenario needs at least one day");
  if (users < 2) throw std::invalid_argument("scenario needs at least two users");
  if (!(baseline >= 0.0)) throw std::invalid_argument("baseline intensity must be >= 0");
  double sum = 0.0;
  for (double w : profile) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("profile weights must be finite and non-negative");
    }
    sum += w;
  }
  if (sum <= 0.0) throw std::invalid_argument("profile is all zero");
  ParseStartDate(start_date);
  auto user_id = [&](const std::string& name) {
    if (!name.starts_with("user-")) return 0;
    try {
      return std::stoi(name.substr(5));
    } catch (const std::exception&) {
      return 0;
    }
  };
  for (const auto& p : plants) {
    const std::string what = std::string(PlantKindName(p.kind)) + " plant";
    if (p.hours < 1) throw std::invalid_argument(what + ": window must span at least one hour");
    if (p.day < 1 || p.hour < 0 || p.hour >= kHoursPerDay ||
        (p.day - 1) * kHoursPerDay + p.hour + p.hours > days * kHoursPerDay) {
      throw std::invalid_argument(what + ": window outside the scenario");
    }
    switch (p.kind) {
      case PlantKind::kHourSpike:
        if (!(p.factor > 1.0)) throw std::invalid_argument(what + ": factor must exceed 1");
        if (p.hours != 1) throw std::invalid_argument(what + ": spans exactly one hour");
        break;
      case PlantKind::kSingleActivist:
        if (user_id(p.spreader) < 1 || user_id(p.spreader) > users || p.spreader == p.author) {
          throw std::invalid_argument(what + ": spreader must be another scenario user");
        }
        [[fallthrough]];
      case PlantKind::kActivistGroup:
        if (p.kind == PlantKind::kActivistGroup && (p.spreaders < 1 || p.spreaders >= users)) {
          throw std::invalid_argument(what + ": spreader count out of range");
        }
        [[fallthrough]];
      case PlantKind::kCrowdBurst:
        if (user_id(p.author) < 1 || user_id(p.author) > users) {
          throw std::invalid_argument(what + ": author must be a scenario user (user-n)");
        }
        if (p.volume == 0) throw std::invalid_argument(what + ": volume must be positive");
        break;
      case PlantKind::kHotHashtag:
        if (p.key.empty() || p.volume == 0) {
          throw std::invalid_argument(what + ": needs a key and a positive volume");
        }
        break;
    }
  }
}

std::int64_t SlotTimestamp(const ScenarioSpec& spec, int day, int hour) {
  const auto start = ParseStartDate(spec.start_date);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(
      (start + std::chrono::days{day - 1}).time_since_epoch());
  return seconds.count() + static_cast<std::int64_t>(hour) * kSecondsPerHour;
}

SynthResult Generate(const ScenarioSpec& spec) {
  spec.Validate();
  return Generator(spec).Run();
}

std::vector<std::string> PresetNames() {
  return {"fixture", "hour-spikes", "single-activist", "activist-group", "global-burst"};
}

ScenarioSpec PresetScenario(std::string_view name, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.profile = DiurnalProfile();
  if (name == "fixture") {
    spec.baseline = 40.0;
    Plant single = Window(PlantKind::kSingleActivist, 9, 3, 1, UserName(3), 120);
    single.spreader = UserName(1500);
    Plant crowd = Window(PlantKind::kCrowdBurst, 16, 23, 2, UserName(2), 260);
    crowd.hashtag = "debate";
    Plant group = Window(PlantKind::kActivistGroup, 24, 19, 3, UserName(1), 360);
    group.spreaders = 12;
    group.hashtag = "rally";
    spec.plants = {single, crowd, group};
  } else if (name == "hour-spikes") {
    spec.baseline = 50.0;
    spec.hashtag_rate = 0.0;
    spec.plants = {HourSpike(2, 3, 5.0),   HourSpike(5, 13, 5.0),  HourSpike(8, 9, 5.0),
                   HourSpike(11, 4, 5.0),  HourSpike(14, 10, 5.0), HourSpike(17, 16, 5.0),
                   HourSpike(20, 2, 5.0),  HourSpike(23, 15, 5.0), HourSpike(26, 14, 5.0),
                   HourSpike(29, 11, 5.0)};
  } else if (name == "single-activist") {
    spec.baseline = 330.0;
    spec.hashtag_rate = 0.0;
    Plant p = Window(PlantKind::kSingleActivist, 15, 14, 1, UserName(1), 120);
    p.spreader = UserName(777);
    spec.plants = {p};
  } else if (name == "activist-group") {
    spec.baseline = 330.0;
    spec.hashtag_rate = 0.0;
    Plant group = Window(PlantKind::kActivistGroup, 15, 14, 1, UserName(1), 150);
    group.spreaders = 15;
    Plant crowd = Window(PlantKind::kCrowdBurst, 15, 14, 1, UserName(1), 240);
    spec.plants = {group, crowd};
  } else if (name == "global-burst") {
    spec.baseline = 330.0;
    spec.hashtag_rate = 0.0;
    spec.plants = {Window(PlantKind::kCrowdBurst, 15, 14, 1, UserName(1), 300)};
  } else {
    throw std::invalid_argument("unknown scenario preset: " + std::string(name));
  }
  return spec;
}

std::string ScenarioToJson(const ScenarioSpec& spec) {
  json plants = json::array();
  for (const auto& p : spec.plants) plants.push_back(PlantToJson(p));
  json j{{"days", spec.days},
         {"users", spec.users},
         {"profile", spec.profile},
         {"baseline", spec.baseline},
         {"seed", spec.seed},
         {"start_date", spec.start_date},
         {"author_zipf", spec.author_zipf},
         {"hashtag_vocabulary", spec.hashtag_vocabulary},
         {"hashtag_rate", spec.hashtag_rate},
         {"plants", plants}};
  return j.dump(2);
}

ScenarioSpec ScenarioFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario JSON: ") + e.what());
  }
  ScenarioSpec spec;
  spec.profile = DiurnalProfile();
  try {
    spec.days = j.value("days", spec.days);
    spec.users = j.value("users", spec.users);
    if (j.contains("profile")) {
      auto p = j.at("profile").get<std::vector<double>>();
      if (p.size() != 24) throw std::invalid_argument("profile must have 24 weights");
      std::copy(p.begin(), p.end(), spec.profile.begin());
    }
    spec.baseline = j.value("baseline", spec.baseline);
    spec.seed = j.value("seed", spec.seed);
    spec.start_date = j.value("start_date", spec.start_date);
    spec.author_zipf = j.value("author_zipf", spec.author_zipf);
    spec.hashtag_vocabulary = j.value("hashtag_vocabulary", spec.hashtag_vocabulary);
    spec.hashtag_rate = j.value("hashtag_rate", spec.hashtag_rate);
    if (j.contains("plants")) {
      for (const auto& p : j.at("plants")) spec.plants.push_back(PlantFromJson(p));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario JSON: ") + e.what());
  }
  spec.Validate();
  return spec;
}

std::string ManifestJson(const SynthResult& result) {
  json plants = json::array();
  for (const auto& o : result.plants) {
    json j = PlantToJson(o.plant);
    j["records"] = o.records;
    if (!o.spreaders.empty()) j["actors"] = o.spreaders;
    json slots = json::array();
    for (const auto& s : o.slots) slots.push_back({{"day", s.day}, {"hour", s.hour}});
    j["slots"] = slots;
    plants.push_back(std::move(j));
  }
  json j{{"seed", result.spec.seed},
         {"days", result.spec.days},
         {"start_date", result.spec.start_date},
         {"baseline_records", result.baseline_records},
         {"total_records", result.entries.size()},
         {"plants", plants}};
  return j.dump(2);
}

}  // namespace cubelens
