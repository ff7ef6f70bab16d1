#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>

#include "cubelens/detect.h"

namespace cubelens {

namespace {

constexpr std::size_t kMaxCalendarDays = 200000;

std::optional<std::chrono::sys_days> ParseIsoDate(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && ptr == part.data() + part.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

std::string FormatIsoDate(std::chrono::sys_days day) {
  std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<long long> ParseCanonicalInt(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || std::to_string(v) != s) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

std::string_view HourContextName(HourContext context) {
  switch (context) {
    case HourContext::kBasic:
      return "basic";
    case HourContext::kAggregative:
      return "aggregative";
    case HourContext::kMultiAggregative:
      return "multiagg";
  }
  return "";
}

HourContext ParseHourContext(std::string_view name) {
  if (name == "basic") return HourContext::kBasic;
  if (name == "aggregative") return HourContext::kAggregative;
  if (name == "multiagg") return HourContext::kMultiAggregative;
  throw std::invalid_argument("unknown hour context: " + std::string(name));
}

Cube HourCube(const Cube& base) { return KeepDims(base, {kDayDim, kHourDim}); }

ExpectedField HourExpected(const Cube& base, HourContext context) {
  Cube hours = HourCube(base);
  switch (context) {
    case HourContext::kBasic:
      return ExpectedBasic(hours);
    case HourContext::kAggregative: {
      const std::string agg[] = {std::string(kHourDim)};
      return ExpectedAggregative(hours, agg);
    }
    case HourContext::kMultiAggregative:
      break;
  }
  if (hours.empty()) throw std::invalid_argument("hour context needs a non-empty cube");
  const std::string text = "cube(" + std::string(kDayDim) + ") * cube(" +
                           std::string(kHourDim) + ") / cube()";
  return ExpectedRatioProduct(hours, ParseEstimator(text, hours));
}

// ---------------------------------------------------------------------------
// Calendar

Calendar Calendar::FromDays(std::vector<std::string> day_labels) {
  std::sort(day_labels.begin(), day_labels.end());
  day_labels.erase(std::unique(day_labels.begin(), day_labels.end()), day_labels.end());
  Calendar cal;
  if (!day_labels.empty()) {
    bool iso = true;
    bool integer = true;
    std::vector<std::chrono::sys_days> dates;
    std::vector<long long> ints;
    for (const auto& d : day_labels) {
      if (iso) {
        if (auto date = ParseIsoDate(d)) {
          dates.push_back(*date);
        } else {
          iso = false;
        }
      }
      if (integer) {
        if (auto v = ParseCanonicalInt(d)) {
          ints.push_back(*v);
        } else {
          integer = false;
        }
      }
    }
    if (iso) {
      auto [lo, hi] = std::minmax_element(dates.begin(), dates.end());
      if (static_cast<std::size_t>((*hi - *lo).count()) < kMaxCalendarDays) {
        for (auto d = *lo; d <= *hi; d += std::chrono::days{1}) {
          cal.days_.push_back(FormatIsoDate(d));
        }
      } else {
        iso = false;
      }
    } else if (integer) {
      auto [lo, hi] = std::minmax_element(ints.begin(), ints.end());
      if (static_cast<unsigned long long>(*hi - *lo) < kMaxCalendarDays) {
        for (long long v = *lo; v <= *hi; ++v) cal.days_.push_back(std::to_string(v));
      } else {
        integer = false;
      }
    }
    if (!iso && !integer) cal.days_ = std::move(day_labels);
  }
  for (std::size_t i = 0; i < cal.days_.size(); ++i) cal.index_.emplace(cal.days_[i], i);
  return cal;
}

std::optional<std::size_t> Calendar::IndexOf(std::string_view day) const {
  auto it = index_.find(day);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> Calendar::HourIndex(const HourSlot& slot) const {
  auto day = IndexOf(slot.day);
  if (!day || slot.hour < 0 || slot.hour >= kHoursPerDay) return std::nullopt;
  return static_cast<std::int64_t>(*day) * kHoursPerDay + slot.hour;
}

// ---------------------------------------------------------------------------
// Events

std::vector<int> Event::HourSet() const {
  std::vector<int> out;
  for (const auto& s : hours) out.push_back(s.hour);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string Event::Label() const {
  if (hours.empty()) return "";
  const auto& first = hours.front();
  const auto& last = hours.back();
  if (hours.size() == 1) return first.day + " " + std::to_string(first.hour) + "h";
  if (first.day == last.day) {
    return first.day + " " + std::to_string(first.hour) + "h-" + std::to_string(last.hour) + "h";
  }
  return first.day + " " + std::to_string(first.hour) + "h - " + last.day + " " +
         std::to_string(last.hour) + "h";
}

std::vector<Event> GroupEvents(std::vector<HourSlot> abnormal, const Calendar& calendar) {
  std::vector<std::pair<std::int64_t, HourSlot>> indexed;
  for (auto& s : abnormal) {
    if (auto idx = calendar.HourIndex(s)) indexed.emplace_back(*idx, std::move(s));
  }
  std::sort(indexed.begin(), indexed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  indexed.erase(std::unique(indexed.begin(), indexed.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                indexed.end());
  std::vector<Event> events;
  std::int64_t previous = 0;
  for (auto& [idx, slot] : indexed) {
    if (events.empty() || idx != previous + 1) events.emplace_back();
    events.back().hours.push_back(std::move(slot));
    previous = idx;
  }
  return events;
}

std::vector<HourSlot> AbnormalHours(const ContextEvaluation& hour_eval) {
  const auto& schema = hour_eval.observed_cube.schema();
  const std::size_t day_dim = schema.IndexOrThrow(kDayDim);
  const std::size_t hour_dim = schema.IndexOrThrow(kHourDim);
  std::vector<HourSlot> out;
  for (const auto& c : hour_eval.cells) {
    if (!c.outlier || c.observed == 0) continue;
    const auto& cube = hour_eval.observed_cube;
    out.push_back({cube.dictionary(day_dim).label(c.key[day_dim]),
                   std::stoi(cube.dictionary(hour_dim).label(c.key[hour_dim]))});
  }
  return out;
}

std::vector<Event> DetectEvents(const ContextEvaluation& hour_eval, const Calendar& calendar) {
  return GroupEvents(AbnormalHours(hour_eval), calendar);
}

std::vector<Event> DetectEvents(const ContextEvaluation& hour_eval) {
  const auto& cube = hour_eval.observed_cube;
  const std::size_t day_dim = cube.schema().IndexOrThrow(kDayDim);
  std::vector<std::string> days;
  for (std::uint32_t id : cube.ObservedValues(day_dim)) {
    days.push_back(cube.dictionary(day_dim).label(id));
  }
  return DetectEvents(hour_eval, Calendar::FromDays(std::move(days)));
}

}  // namespace cubelens
