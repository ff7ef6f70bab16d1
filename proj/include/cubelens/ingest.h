// Interaction logs: parsing, hour binning, hashtag normalization, community
// files and cube construction.
//
// Log grammar (one interaction per line, '#' comments and blank lines skipped):
//   timestamp,spreader,author[,hashtag{;hashtag}]
// timestamp is integer epoch seconds.

#ifndef CUBELENS_INGEST_H_
#define CUBELENS_INGEST_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cubelens/cube.h"
#include "cubelens/detect.h"

namespace cubelens {

// Lowercase, canonical decomposition, combining marks removed, recomposed.
// A leading '#' and surrounding whitespace are dropped. Idempotent.
std::string NormalizeHashtag(std::string_view raw);

// Fixed UTC offset in minutes. Accepts "UTC", "Z", "+02:00", "-0530", "+2".
int ParseUtcOffset(std::string_view text);
std::string FormatUtcOffset(int minutes);

struct DayHour {
  std::string day;  // YYYY-MM-DD
  int hour = 0;

  bool operator==(const DayHour&) const = default;
};

// Calendar day and hour of day of an epoch timestamp in a fixed-offset zone.
DayHour BinTime(std::int64_t timestamp, int offset_minutes = 0);

inline constexpr std::int64_t kMinTimestamp = -62135596800;  // 0001-01-01T00:00Z
inline constexpr std::int64_t kMaxTimestamp = 253402300799;  // 9999-12-31T23:59:59Z

struct LogEntry {
  std::size_t line = 0;  // 1-based
  std::int64_t timestamp = 0;
  std::string spreader;
  std::string author;
  std::vector<std::string> hashtags;  // normalized, in input order, empty ones dropped
};

struct ParseError {
  std::size_t line = 0;
  std::string message;
};

struct ParsedLog {
  std::vector<LogEntry> entries;  // input order
  std::vector<ParseError> errors;
  std::size_t lines = 0;
};

// Malformed lines are reported and skipped; parsing continues.
ParsedLog ParseLog(std::istream& in);
ParsedLog ParseLogText(std::string_view text);

enum class LogFormat {
  kTriplet,  // one record per line, hashtags ignored
  kQuad,     // one record per hashtag; lines without hashtags give none
};

std::string_view LogFormatName(LogFormat format);
LogFormat ParseLogFormat(std::string_view name);

struct InteractionRecord {
  std::string spreader;
  std::string author;
  std::optional<std::string> hashtag;
  std::string day;
  int hour = 0;

  bool operator==(const InteractionRecord&) const = default;
};

std::vector<InteractionRecord> ToRecords(const std::vector<LogEntry>& entries, LogFormat format,
                                         int offset_minutes = 0);

struct ParsedInteractions {
  std::vector<InteractionRecord> records;
  std::vector<ParseError> errors;
};

ParsedInteractions ParseInteractions(std::string_view text, LogFormat format,
                                     int offset_minutes = 0);

// (spreader, author, day, hour) cube of the records.
Cube BuildInteractionCube(const std::vector<InteractionRecord>& records);
// (spreader, author, hashtag, day, hour) cube; records without a hashtag are
// rejected with their index.
Cube BuildHashtagCube(const std::vector<InteractionRecord>& records);

struct Dataset {
  Cube interactions;  // one record per line
  Cube hashtags;      // one record per hashtag occurrence
  std::size_t lines = 0;
  std::size_t entries = 0;
  std::vector<ParseError> errors;
  int offset_minutes = 0;
};

Dataset BuildDataset(const ParsedLog& log, int offset_minutes = 0);

// Reads a plain or gzip-compressed file (detected from its magic bytes).
// Throws DataError when the file cannot be read.
std::string ReadMaybeGzip(const std::string& path);

Dataset LoadDataset(const std::string& path, int offset_minutes = 0);

// Lines "spreader,community"; '#' comments and blank lines skipped. A
// spreader listed twice with different communities is an error.
CommunityAssignment ParseCommunities(std::string_view text,
                                     std::vector<ParseError>* errors = nullptr);
CommunityAssignment LoadCommunities(const std::string& path);

// Replaces every user key (spreader or author) by "user-n". Aliases are
// assigned by ranking the keys on a salted FNV-1a hash, so the mapping is
// stable for a given salt and key set.
std::vector<LogEntry> AnonymizeUsers(const std::vector<LogEntry>& entries, std::string_view salt);

// Writes entries in the log grammar.
void WriteLog(std::ostream& out, const std::vector<LogEntry>& entries);

}  // namespace cubelens

#endif  // CUBELENS_INGEST_H_
