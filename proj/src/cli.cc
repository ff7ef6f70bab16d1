#include "cubelens/cli.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cubelens/ingest.h"
#include "cubelens/pipeline.h"
#include "cubelens/report.h"
#include "cubelens/service.h"
#include "cubelens/synth.h"

namespace cubelens {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string tz = "UTC";
  std::string format = "table";
  std::string out;

  std::string context;
  std::string spec;
  std::string deviation = "poisson";
  double sigma = 3.0;
  std::string side;
  bool robust = false;
  std::string survival = "gt";
  std::string linkpred = "literal";
  double bin_width = 0.0;
  std::size_t limit = 500;
  std::size_t offset = 0;

  int event = -1;
  std::string author;
  bool with_hashtags = false;
  std::string hashtags;
  std::size_t n = 0;
  std::string communities;
  std::string spreader;
  std::string day;
  int hour = -1;

  std::string write;
  std::string anonymize;
  bool strict = false;

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string ui;

  std::string preset;
  std::string scenario;
  std::uint64_t seed = 1;
  std::string manifest;
  bool list_presets = false;
};

template <typename F>
auto ParseFlag(const std::string& flag, const std::string& value, F parse) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--" + flag + ": " + e.what());
  }
}

AnalysisConfig ConfigFrom(const Options& o, AnalysisConfig c) {
  if (!o.context.empty()) c.context = ParseFlag("context", o.context, ParseHourContext);
  c.kind = ParseFlag("deviation", o.deviation, ParseDeviationKind);
  c.survival = ParseFlag("survival", o.survival, ParseSurvivalMode);
  if (!o.side.empty()) c.policy.side = ParseFlag("side", o.side, ParseOutlierSide);
  c.linkpred = ParseFlag("linkpred", o.linkpred, ParseLinkPredictionMode);
  c.policy.sigma_multiplier = o.sigma;
  if (o.robust) c.policy.spread = SpreadEstimator::kMedianMad;
  ParseFlag("sigma", "", [&](const std::string&) {
    c.policy.Validate();
    return 0;
  });
  return c;
}

SummaryOptions SummaryFrom(const Options& o) {
  SummaryOptions s;
  s.bin_width = o.bin_width;
  s.limit = o.limit;
  s.offset = o.offset;
  return s;
}

int Offset(const Options& o) { return ParseFlag("tz", o.tz, ParseUtcOffset); }

Dataset Load(const Options& o, std::ostream& err) {
  Dataset ds = LoadDataset(o.input, Offset(o));
  if (!ds.errors.empty()) {
    err << o.input << ": " << ds.errors.size() << " malformed line(s) skipped";
    const auto& first = ds.errors.front();
    err << " (first at line " << first.line << ": " << first.message << ")\n";
  }
  return ds;
}

std::string JsonText(const Json& j) { return DumpJson(j, 2) + "\n"; }

const Event& EventAt(const EventAnalysis& a, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= a.events.size()) {
    throw DataError("event " + std::to_string(id) + " does not exist (" +
                    std::to_string(a.events.size()) + " events detected)");
  }
  return a.events[static_cast<std::size_t>(id)];
}

std::string RankedTable(const std::vector<RankedEntity>& entities, const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : entities) {
    rows.push_back({e.label, std::to_string(e.observed), FormatNumber(e.expected),
                    FormatNumber(e.deviation)});
  }
  return RenderTable({name, "observed", "expected", "deviation"}, rows);
}

std::string HistogramTable(const ContextEvaluation& eval, double width) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : DeviationHistogram(eval, width)) {
    rows.push_back({FormatNumber(b.lower, 4), FormatNumber(b.upper, 4), std::to_string(b.count),
                    std::to_string(b.outliers)});
  }
  return RenderTable({"lower", "upper", "count", "outliers"}, rows);
}

std::string HistogramCsv(const ContextEvaluation& eval, double width) {
  std::ostringstream out;
  out << "lower,upper,count,outliers\n";
  for (const auto& b : DeviationHistogram(eval, width)) {
    out << FormatNumber(b.lower, 6) << ',' << FormatNumber(b.upper, 6) << ',' << b.count << ','
        << b.outliers << '\n';
  }
  return out.str();
}

void RequireFormat(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (o.format == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw UsageError("--format must be one of " + list);
}

std::string CmdIngest(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json"});
  const int offset = Offset(o);
  ParsedLog log = ParseLogText(ReadMaybeGzip(o.input));
  Dataset ds = BuildDataset(log, offset);
  if (!o.write.empty()) {
    std::vector<LogEntry> entries =
        o.anonymize.empty() ? log.entries : AnonymizeUsers(log.entries, o.anonymize);
    std::ofstream f(o.write, std::ios::binary);
    if (!f) throw DataError("cannot write '" + o.write + "'");
    WriteLog(f, entries);
  }
  std::set<std::string> days;
  if (!ds.interactions.empty()) {
    const std::size_t d = ds.interactions.schema().IndexOrThrow(kDayDim);
    for (auto id : ds.interactions.ObservedValues(d)) days.insert(ds.interactions.dictionary(d).label(id));
  }
  auto distinct = [&](const Cube& c, std::string_view dim) -> std::size_t {
    return c.empty() ? 0 : c.ObservedValues(c.schema().IndexOrThrow(dim)).size();
  };
  Json errors = Json::array();
  for (const auto& e : log.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  Json j{{"input", o.input},
         {"timezone", FormatUtcOffset(offset)},
         {"lines", log.lines},
         {"entries", log.entries.size()},
         {"records", ds.interactions.grand_total()},
         {"hashtag_records", ds.hashtags.grand_total()},
         {"spreaders", distinct(ds.interactions, kSpreaderDim)},
         {"authors", distinct(ds.interactions, kAuthorDim)},
         {"hashtags", distinct(ds.hashtags, kHashtagDim)},
         {"days", days.size()},
         {"first_day", days.empty() ? Json(nullptr) : Json(*days.begin())},
         {"last_day", days.empty() ? Json(nullptr) : Json(*days.rbegin())},
         {"error_count", log.errors.size()},
         {"errors", errors}};
  for (const auto& e : log.errors) err << o.input << ":" << e.line << ": " << e.message << "\n";
  if (o.strict && !log.errors.empty()) {
    throw DataError(std::to_string(log.errors.size()) + " malformed line(s)");
  }
  if (o.format == "json") return JsonText(j);
  std::vector<std::vector<std::string>> rows;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "errors") continue;
    rows.push_back({it.key(), it.value().is_string() ? it.value().get<std::string>() : it.value().dump()});
  }
  return RenderTable({"field", "value"}, rows);
}

std::string CmdHours(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json", "jsonl", "csv"});
  if (!o.context.empty() && !o.spec.empty()) {
    throw UsageError("--context and --spec are exclusive");
  }
  AnalysisConfig config = ConfigFrom(o, AnalysisConfig{});
  Dataset ds = Load(o, err);
  if (ds.interactions.empty()) throw DataError("no interactions in '" + o.input + "'");
  std::optional<std::string> spec;
  if (!o.spec.empty()) spec = o.spec;
  ContextEvaluation eval;
  try {
    eval = EvaluateHours(ds.interactions, config, spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (const auto& w : eval.warnings) err << "warning: " << w << "\n";
  SummaryOptions summary = SummaryFrom(o);
  const double width = summary.bin_width > 0 ? summary.bin_width : DefaultBinWidth(eval);
  if (o.format == "jsonl") return EvaluationJsonLines(eval);
  if (o.format == "csv") return HistogramCsv(eval, width);
  const std::string estimator = spec ? *spec : std::string(HourContextName(config.context));
  if (o.format == "json") {
    Json j{{"context", spec ? "spec" : HourContextName(config.context)}, {"estimator", estimator}};
    const Json parts = EvaluationSummaryJson(eval, summary);
    for (auto& [k, v] : parts.items()) j[k] = v;
    return JsonText(j);
  }
  std::ostringstream out;
  out << "context: " << estimator << " (" << DeviationKindName(eval.kind) << ", "
      << eval.policy.sigma_multiplier << " sigma, " << OutlierSideName(eval.policy.side) << ")\n";
  out << StatsLine(eval) << "\n\n" << HistogramTable(eval, width) << "\n" << OutliersTable(eval);
  return out.str();
}

std::string CmdEvents(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json"});
  AnalysisConfig config = ConfigFrom(o, EventDefaults());
  Dataset ds = Load(o, err);
  if (ds.interactions.empty()) throw DataError("no interactions in '" + o.input + "'");
  EventAnalysis a = AnalyzeEvents(ds.interactions, config);
  if (o.format == "json") {
    return JsonText({{"settings", config.Key()}, {"events", EventsJson(a.events, &a.hour_eval)}});
  }
  return EventsTable(a.events, &a.hour_eval);
}

std::string CmdExplain(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json"});
  AnalysisConfig config = ConfigFrom(o, EventDefaults());
  Dataset ds = Load(o, err);
  if (ds.interactions.empty()) throw DataError("no interactions in '" + o.input + "'");
  EventAnalysis a = AnalyzeEvents(ds.interactions, config);
  const Event& e = EventAt(a, o.event);
  const DrilldownOptions dd = config.Drilldown();
  SummaryOptions summary = SummaryFrom(o);

  AuthorExplanation authors = ExplainEventAuthors(ds.interactions, e, dd);
  std::optional<SpreaderExplanation> spreaders;
  std::string author = o.author;
  if (author.empty() && authors.cause.kind == CauseKind::kOneMain) {
    author = authors.cause.main_entities.front().label;
  }
  if (!author.empty()) spreaders = ExplainEventSpreaders(ds.interactions, e, author, dd);
  std::optional<std::vector<RankedEntity>> tags;
  if (o.with_hashtags && !ds.hashtags.empty()) tags = AbnormalHashtagsForEvent(ds.hashtags, e, dd);

  if (o.format == "json") {
    Json j{{"settings", config.Key()},
           {"event", EventJson(static_cast<std::size_t>(o.event), e, &a.hour_eval)},
           {"authors", AuthorExplanationJson(e, authors, summary)},
           {"spreaders", spreaders ? SpreaderExplanationJson(e, *spreaders, summary) : Json(nullptr)}};
    if (o.with_hashtags) {
      Json arr = Json::array();
      if (tags) {
        for (const auto& t : *tags) arr.push_back(RankedJson(t));
      }
      j["hashtags"] = arr;
    }
    return JsonText(j);
  }
  std::ostringstream out;
  out << "event " << o.event << ": " << e.Label() << " (" << authors.event_total
      << " interactions)\n";
  out << "cause: " << CauseKindName(authors.cause.kind) << "\n\n";
  std::vector<RankedEntity> top;
  for (std::size_t i : authors.eval.PositiveOutliers()) {
    const auto& c = authors.eval.cells[i];
    top.push_back({authors.eval.Labels(c).front(), c.deviation.value, c.observed, c.expected});
  }
  out << RankedTable(top, "author");
  if (spreaders) {
    out << "\nauthor " << spreaders->author << ": " << RegimeKindName(spreaders->regime.kind)
        << " (group " << spreaders->regime.group.size() << ", share "
        << FormatNumber(spreaders->regime.share) << ")\n\n"
        << RankedTable(spreaders->regime.group, "spreader");
  }
  if (tags) out << "\n" << RankedTable(*tags, "hashtag");
  return out.str();
}

std::string CmdHashtags(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json"});
  AnalysisConfig config = ConfigFrom(o, EventDefaults());
  Dataset ds = Load(o, err);
  const DrilldownOptions dd = config.Drilldown();
  if (o.event >= 0) {
    if (ds.interactions.empty()) throw DataError("no interactions in '" + o.input + "'");
    EventAnalysis a = AnalyzeEvents(ds.interactions, config);
    const Event& e = EventAt(a, o.event);
    std::vector<RankedEntity> tags;
    if (!ds.hashtags.empty()) tags = AbnormalHashtagsForEvent(ds.hashtags, e, dd);
    if (o.format == "json") {
      Json arr = Json::array();
      for (const auto& t : tags) arr.push_back(RankedJson(t));
      return JsonText({{"settings", config.Key()}, {"event", e.Label()}, {"hashtags", arr}});
    }
    return RankedTable(tags, "hashtag");
  }
  std::vector<HashtagAnomaly> triplets;
  if (!ds.hashtags.empty()) triplets = AbnormalHashtagsGlobal(ds.hashtags, dd);
  if (o.format == "json") {
    return JsonText({{"settings", config.Key()}, {"triplets", HashtagAnomaliesJson(triplets)}});
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : triplets) {
    rows.push_back({t.hashtag, t.day, std::to_string(t.hour), std::to_string(t.observed),
                    FormatNumber(t.expected), FormatNumber(t.deviation)});
  }
  return RenderTable({"hashtag", "day", "hour", "observed", "expected", "deviation"}, rows);
}

std::string CmdTopics(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json"});
  if (o.n < 1) throw UsageError("--n must be at least 1");
  AnalysisConfig config = ConfigFrom(o, EventDefaults());
  Dataset ds = Load(o, err);
  std::vector<std::string> candidates;
  for (const auto& k : SplitList(o.hashtags)) candidates.push_back(NormalizeHashtag(k));
  std::vector<Topic> topics;
  if (!ds.hashtags.empty()) {
    try {
      topics = DiscoverTopics(ds.hashtags, candidates, o.n, config.Drilldown());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (o.format == "json") return JsonText(TopicsJson(topics, o.n));
  std::vector<std::vector<std::string>> rows;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
    return s;
  };
  for (const auto& t : topics) {
    rows.push_back({join(t.hashtags), std::to_string(t.spreaders.size()),
                    std::to_string(t.authors.size())});
  }
  return RenderTable({"hashtags", "spreaders", "authors"}, rows);
}

std::string CmdPredict(const Options& o, std::ostream& err) {
  RequireFormat(o, {"table", "json"});
  AnalysisConfig config = ConfigFrom(o, AnalysisConfig{});
  if (o.hour < 0 || o.hour >= kHoursPerDay) throw UsageError("--hour must be in 0..23");
  std::vector<std::string> hashtags;
  for (const auto& k : SplitList(o.hashtags)) hashtags.push_back(NormalizeHashtag(k));
  if (hashtags.empty()) throw UsageError("--hashtags needs at least one hashtag");
  CommunityAssignment communities = LoadCommunities(o.communities);
  Dataset ds = Load(o, err);
  if (ds.hashtags.empty()) throw DataError("no hashtag records in '" + o.input + "'");
  if (!communities.contains(o.spreader)) {
    throw DataError("spreader '" + o.spreader + "' has no community");
  }
  const std::size_t kd = ds.hashtags.schema().IndexOrThrow(kHashtagDim);
  for (const auto& k : hashtags) {
    if (!ds.hashtags.dictionary(kd).Find(k)) throw DataError("unknown hashtag '" + k + "'");
  }
  LinkPrediction p;
  try {
    p = PredictUserTopic(ds.hashtags, communities, o.spreader, hashtags, o.day, o.hour,
                         config.linkpred);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  Json j{{"spreader", o.spreader}, {"community", communities.find(o.spreader)->second},
         {"hashtags", hashtags}, {"day", o.day}, {"hour", o.hour},
         {"mode", LinkPredictionModeName(config.linkpred)}};
  const Json parts = PredictionJson(p);
  for (auto& [k, v] : parts.items()) j[k] = v;
  if (o.format == "json") return JsonText(j);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"expected", p.expected ? FormatNumber(*p.expected, 6) : "unsupported"});
  rows.push_back({"community_share", FormatNumber(p.community_share, 6)});
  rows.push_back({"hour_share", FormatNumber(p.hour_share, 6)});
  rows.push_back({"topic_rate", FormatNumber(p.topic_rate, 6)});
  return RenderTable({"factor", "value"}, rows);
}

int CmdServe(const Options& o, std::ostream& out, std::ostream& err) {
  ServiceOptions so;
  so.ui_dir = o.ui;
  so.linkpred = ParseFlag("linkpred", o.linkpred, ParseLinkPredictionMode);
  std::optional<CommunityAssignment> communities;
  if (!o.communities.empty()) communities = LoadCommunities(o.communities);
  Dataset ds = Load(o, err);
  Service service(std::move(ds), std::move(communities), so);
  bool ok = service.Serve(o.host, o.port, [&](int port) {
    out << "listening on http://" << o.host << ":" << port << "\n" << std::flush;
  });
  if (!ok) {
    err << "cannot listen on " << o.host << ":" << o.port << "\n";
    return kExitData;
  }
  return kExitOk;
}

std::string CmdSynth(const Options& o, std::ostream& out) {
  if (o.list_presets) {
    std::string s;
    for (const auto& p : PresetNames()) s += p + "\n";
    return s;
  }
  if (!o.preset.empty() && !o.scenario.empty()) {
    throw UsageError("--preset and --scenario are exclusive");
  }
  if (o.out.empty()) throw UsageError("--out is required");
  ScenarioSpec spec;
  if (!o.scenario.empty()) {
    std::ifstream f(o.scenario, std::ios::binary);
    if (!f) throw DataError("cannot read '" + o.scenario + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    try {
      spec = ScenarioFromJson(buf.str());
    } catch (const std::invalid_argument& e) {
      throw DataError(o.scenario + ": " + e.what());
    }
  } else {
    spec = ParseFlag("preset", o.preset.empty() ? "fixture" : o.preset,
                     [&](const std::string& name) { return PresetScenario(name, o.seed); });
  }
  SynthResult result = Generate(spec);
  {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw DataError("cannot write '" + o.out + "'");
    WriteLog(f, result.entries);
  }
  const std::string manifest = ManifestJson(result);
  if (!o.manifest.empty()) {
    std::ofstream f(o.manifest, std::ios::binary);
    if (!f) throw DataError("cannot write '" + o.manifest + "'");
    f << manifest;
    return {};
  }
  (void)out;
  return manifest;
}

void WriteReport(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty() || o.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw DataError("cannot write '" + o.out + "'");
  f << text;
}

}  // namespace

int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multidimensional anomaly analysis of interaction logs", "cubelens"};
  app.require_subcommand(1);
  Options o;

  auto add_input = [&](CLI::App* c) {
    c->add_option("--input,--data", o.input, "Interaction log (csv, optionally gzip)")->required();
    c->add_option("--tz", o.tz, "Fixed UTC offset for hour binning")->capture_default_str();
  };
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->capture_default_str();
    c->add_option("--out", o.out, "Write the report to a file");
  };
  auto add_policy = [&](CLI::App* c) {
    c->add_option("--deviation", o.deviation, "ratio or poisson")->capture_default_str();
    c->add_option("--sigma", o.sigma, "Outlier threshold in spreads")->capture_default_str();
    c->add_option("--side", o.side, "both, positive or negative");
    c->add_flag("--robust", o.robust, "Median and MAD instead of mean and std");
    c->add_option("--survival", o.survival, "gt or geq upper tail")->capture_default_str();
    c->add_option("--context,--preset", o.context, "basic, aggregative or multiagg");
    c->add_option("--bin-width", o.bin_width, "Histogram bin width");
    c->add_option("--limit", o.limit, "Cells per page")->capture_default_str();
    c->add_option("--offset", o.offset, "First cell of the page");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "Parse a log and report its contents");
  add_input(ingest);
  add_format(ingest);
  ingest->add_option("--write", o.write, "Write the normalized log");
  ingest->add_option("--anonymize", o.anonymize, "Salt for user-n aliases in --write output");
  ingest->add_flag("--strict", o.strict, "Fail on malformed lines");

  CLI::App* hours = app.add_subcommand("hours", "Evaluate an hour-level context");
  add_input(hours);
  add_format(hours);
  add_policy(hours);
  hours->add_option("--spec", o.spec, "Estimator in text form");

  CLI::App* events = app.add_subcommand("events", "Detect abnormal-hour events");
  add_input(events);
  add_format(events);
  add_policy(events);

  CLI::App* explain = app.add_subcommand("explain", "Author and spreader drill-down of an event");
  add_input(explain);
  add_format(explain);
  add_policy(explain);
  explain->add_option("--event", o.event, "Event id")->required();
  explain->add_option("--author", o.author, "Author for the spreader drill-down");
  explain->add_flag("--hashtags", o.with_hashtags, "Add event-local abnormal hashtags");

  CLI::App* hashtags = app.add_subcommand("hashtags", "Abnormal hashtags");
  add_input(hashtags);
  add_format(hashtags);
  add_policy(hashtags);
  hashtags->add_option("--event", o.event, "Restrict to an event");

  CLI::App* topics = app.add_subcommand("topics", "Topics of N abnormal hashtags");
  add_input(topics);
  add_format(topics);
  add_policy(topics);
  topics->add_option("--n", o.n, "Hashtags per topic")->required();
  topics->add_option("--hashtags", o.hashtags, "Candidate hashtags (default: abnormal ones)");

  CLI::App* predict = app.add_subcommand("predict", "User-topic link prediction");
  add_input(predict);
  add_format(predict);
  predict->add_option("--communities", o.communities, "spreader,community file")->required();
  predict->add_option("--spreader", o.spreader, "Spreader")->required();
  predict->add_option("--hashtags", o.hashtags, "Topic hashtags")->required();
  predict->add_option("--day", o.day, "Day")->required();
  predict->add_option("--hour", o.hour, "Hour of day")->required();
  predict->add_option("--linkpred", o.linkpred, "literal or mean-day")->capture_default_str();

  CLI::App* serve = app.add_subcommand("serve", "Serve the JSON API");
  add_input(serve);
  serve->add_option("--port", o.port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--communities", o.communities, "spreader,community file");
  serve->add_option("--ui", o.ui, "Directory served under /ui");
  serve->add_option("--linkpred", o.linkpred, "literal or mean-day")->capture_default_str();

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic log with planted anomalies");
  synth->add_option("--preset", o.preset, "Scenario preset (default fixture)");
  synth->add_option("--scenario", o.scenario, "Scenario JSON file");
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", o.out, "Log output path");
  synth->add_option("--manifest", o.manifest, "Ground-truth output path (default stdout)");
  synth->add_flag("--list-presets", o.list_presets, "Print preset names");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*serve) return CmdServe(o, out, err);
    std::string text;
    if (*ingest) text = CmdIngest(o, err);
    if (*hours) text = CmdHours(o, err);
    if (*events) text = CmdEvents(o, err);
    if (*explain) text = CmdExplain(o, err);
    if (*hashtags) text = CmdHashtags(o, err);
    if (*topics) text = CmdTopics(o, err);
    if (*predict) text = CmdPredict(o, err);
    if (*synth) {
      out << CmdSynth(o, out);
      return kExitOk;
    }
    WriteReport(o, text, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace cubelens
