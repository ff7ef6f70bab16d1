#include "cubelens/ingest.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cubelens {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> ParseNumber(std::string_view s) {
  T v{};
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<LogEntry> ParseLine(std::string_view line, std::size_t number, std::string& error) {
  auto fields = Split(line, ',');
  if (fields.size() != 3 && fields.size() != 4) {
    error = "expected 3 or 4 comma-separated fields, found " + std::to_string(fields.size());
    return std::nullopt;
  }
  LogEntry entry;
  entry.line = number;
  const auto ts_text = Trim(fields[0]);
  auto ts = ParseNumber<std::int64_t>(ts_text);
  if (!ts) {
    error = "unparseable timestamp '" + std::string(ts_text) + "'";
    return std::nullopt;
  }
  if (*ts < kMinTimestamp || *ts > kMaxTimestamp) {
    error = "timestamp out of range: " + std::string(ts_text);
    return std::nullopt;
  }
  entry.timestamp = *ts;
  entry.spreader = std::string(Trim(fields[1]));
  entry.author = std::string(Trim(fields[2]));
  if (entry.spreader.empty() || entry.author.empty()) {
    error = "empty spreader or author key";
    return std::nullopt;
  }
  if (fields.size() == 4) {
    for (auto raw : Split(fields[3], ';')) {
      std::string key = NormalizeHashtag(raw);
      if (!key.empty()) entry.hashtags.push_back(std::move(key));
    }
  }
  return entry;
}

std::uint64_t Fnv1a(std::string_view salt, std::string_view key) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  mix(salt);
  mix(std::string_view("\x1f", 1));
  mix(key);
  return h;
}

}  // namespace

int ParseUtcOffset(std::string_view text) {
  text = Trim(text);
  if (text.empty() || text == "UTC" || text == "utc" || text == "Z") return 0;
  if (text.starts_with("UTC") || text.starts_with("utc")) text.remove_prefix(3);
  auto fail = [&]() -> int {
    throw std::invalid_argument("malformed UTC offset '" + std::string(text) +
                                "' (expected +HH:MM)");
  };
  if (text.empty() || (text[0] != '+' && text[0] != '-')) return fail();
  const int sign = text[0] == '-' ? -1 : 1;
  std::string_view rest = text.substr(1);
  std::string_view hh = rest;
  std::string_view mm;
  if (auto colon = rest.find(':'); colon != std::string_view::npos) {
    hh = rest.substr(0, colon);
    mm = rest.substr(colon + 1);
  } else if (rest.size() == 4) {
    hh = rest.substr(0, 2);
    mm = rest.substr(2);
  }
  auto h = ParseNumber<int>(hh);
  std::optional<int> m = mm.empty() ? std::optional<int>(0) : ParseNumber<int>(mm);
  if (!h || !m || hh.size() > 2 || *h > 14 || *m > 59 || (!mm.empty() && mm.size() != 2)) {
    return fail();
  }
  return sign * (*h * 60 + *m);
}

std::string FormatUtcOffset(int minutes) {
  char buf[16];
  const int a = minutes < 0 ? -minutes : minutes;
  std::snprintf(buf, sizeof buf, "%c%02d:%02d", minutes < 0 ? '-' : '+', a / 60, a % 60);
  return buf;
}

DayHour BinTime(std::int64_t timestamp, int offset_minutes) {
  using namespace std::chrono;
  const sys_seconds local{seconds{timestamp + static_cast<std::int64_t>(offset_minutes) * 60}};
  const sys_days day = floor<days>(local);
  const year_month_day ymd{day};
  const auto hour = duration_cast<hours>(local - day).count();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return {buf, static_cast<int>(hour)};
}

ParsedLog ParseLog(std::istream& in) {
  ParsedLog log;
  std::string line;
  std::string error;
  while (std::getline(in, line)) {
    ++log.lines;
    std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (auto entry = ParseLine(view, log.lines, error)) {
      log.entries.push_back(std::move(*entry));
    } else {
      log.errors.push_back({log.lines, error});
    }
  }
  return log;
}

ParsedLog ParseLogText(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseLog(in);
}

std::string_view LogFormatName(LogFormat format) {
  return format == LogFormat::kTriplet ? "triplet" : "quad";
}

LogFormat ParseLogFormat(std::string_view name) {
  if (name == "triplet") return LogFormat::kTriplet;
  if (name == "quad") return LogFormat::kQuad;
  throw std::invalid_argument("unknown log format: " + std::string(name));
}

std::vector<InteractionRecord> ToRecords(const std::vector<LogEntry>& entries, LogFormat format,
                                         int offset_minutes) {
  std::vector<InteractionRecord> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    DayHour t = BinTime(e.timestamp, offset_minutes);
    if (format == LogFormat::kTriplet) {
      out.push_back({e.spreader, e.author, std::nullopt, t.day, t.hour});
      continue;
    }
    for (const auto& k : e.hashtags) out.push_back({e.spreader, e.author, k, t.day, t.hour});
  }
  return out;
}

ParsedInteractions ParseInteractions(std::string_view text, LogFormat format,
                                     int offset_minutes) {
  ParsedLog log = ParseLogText(text);
  return {ToRecords(log.entries, format, offset_minutes), std::move(log.errors)};
}

Cube BuildInteractionCube(const std::vector<InteractionRecord>& records) {
  CubeBuilder builder(DimensionSchema::Interactions());
  for (const auto& r : records) {
    const std::string hour = std::to_string(r.hour);
    builder.Add({r.spreader, r.author, r.day, hour});
  }
  return std::move(builder).Build();
}

Cube BuildHashtagCube(const std::vector<InteractionRecord>& records) {
  CubeBuilder builder(DimensionSchema::HashtagInteractions());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.hashtag) {
      throw DataError("record " + std::to_string(i) + " has no value for dimension 'hashtag'");
    }
    const std::string hour = std::to_string(r.hour);
    builder.Add({r.spreader, r.author, *r.hashtag, r.day, hour});
  }
  return std::move(builder).Build();
}

Dataset BuildDataset(const ParsedLog& log, int offset_minutes) {
  Dataset ds;
  ds.lines = log.lines;
  ds.entries = log.entries.size();
  ds.errors = log.errors;
  ds.offset_minutes = offset_minutes;
  CubeBuilder triplets(DimensionSchema::Interactions());
  CubeBuilder quads(DimensionSchema::HashtagInteractions());
  for (const auto& e : log.entries) {
    DayHour t = BinTime(e.timestamp, offset_minutes);
    const std::string hour = std::to_string(t.hour);
    triplets.Add({e.spreader, e.author, t.day, hour});
    for (const auto& k : e.hashtags) quads.Add({e.spreader, e.author, k, t.day, hour});
  }
  ds.interactions = std::move(triplets).Build();
  ds.hashtags = std::move(quads).Build();
  return ds;
}

std::string ReadMaybeGzip(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open '" + path + "'");
  unsigned char magic[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(magic), 2);
  const bool gzip = probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
  if (!gzip) {
    probe.clear();
    probe.seekg(0);
    std::ostringstream buf;
    buf << probe.rdbuf();
    return buf.str();
  }
  probe.close();
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw DataError("cannot open '" + path + "'");
  std::string out;
  char chunk[1 << 16];
  while (true) {
    const int n = gzread(file, chunk, sizeof chunk);
    if (n < 0) {
      int code = 0;
      std::string message = gzerror(file, &code);
      gzclose(file);
      throw DataError("corrupt gzip input '" + path + "': " + message);
    }
    if (n == 0) break;
    out.append(chunk, static_cast<std::size_t>(n));
  }
  int code = Z_OK;
  std::string message = gzerror(file, &code);
  gzclose(file);
  if (code != Z_OK) throw DataError("corrupt gzip input '" + path + "': " + message);
  return out;
}

Dataset LoadDataset(const std::string& path, int offset_minutes) {
  return BuildDataset(ParseLogText(ReadMaybeGzip(path)), offset_minutes);
}

CommunityAssignment ParseCommunities(std::string_view text, std::vector<ParseError>* errors) {
  CommunityAssignment out;
  std::size_t number = 0;
  auto report = [&](std::string message) {
    if (errors == nullptr) {
      throw DataError("communities line " + std::to_string(number) + ": " + message);
    }
    errors->push_back({number, std::move(message)});
  };
  for (auto raw : Split(text, '\n')) {
    ++number;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = Split(line, ',');
    if (fields.size() != 2 || Trim(fields[0]).empty() || Trim(fields[1]).empty()) {
      report("expected 'spreader,community'");
      continue;
    }
    std::string spreader(Trim(fields[0]));
    std::string community(Trim(fields[1]));
    auto [it, inserted] = out.emplace(spreader, community);
    if (!inserted && it->second != community) {
      report("spreader '" + spreader + "' assigned to both '" + it->second + "' and '" +
             community + "'");
    }
  }
  return out;
}

CommunityAssignment LoadCommunities(const std::string& path) {
  return ParseCommunities(ReadMaybeGzip(path));
}

std::vector<LogEntry> AnonymizeUsers(const std::vector<LogEntry>& entries,
                                     std::string_view salt) {
  std::set<std::string> keys;
  for (const auto& e : entries) {
    keys.insert(e.spreader);
    keys.insert(e.author);
  }
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  ranked.reserve(keys.size());
  for (const auto& k : keys) ranked.emplace_back(Fnv1a(salt, k), k);
  std::sort(ranked.begin(), ranked.end());
  std::unordered_map<std::string, std::string> alias;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    alias.emplace(ranked[i].second, "user-" + std::to_string(i + 1));
  }
  std::vector<LogEntry> out = entries;
  for (auto& e : out) {
    e.spreader = alias.at(e.spreader);
    e.author = alias.at(e.author);
  }
  return out;
}

void WriteLog(std::ostream& out, const std::vector<LogEntry>& entries) {
  for (const auto& e : entries) {
    out << e.timestamp << ',' << e.spreader << ',' << e.author;
    if (!e.hashtags.empty()) {
      out << ',';
      for (std::size_t i = 0; i < e.hashtags.size(); ++i) {
        if (i > 0) out << ';';
        out << e.hashtags[i];
      }
    }
    out << '\n';
  }
}

}  // namespace cubelens
