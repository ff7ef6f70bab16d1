#include "cubelens/service.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <thread>

#include "cubelens/report.h"
#include "httplib.h"

namespace cubelens {

namespace {

struct HttpError {
  int status;
  std::string message;
};

[[noreturn]] void Fail(int status, std::string message) {
  throw HttpError{status, std::move(message)};
}

ServiceResponse JsonResponse(int status, const Json& j) {
  return {status, DumpJson(j), "application/json"};
}

ServiceResponse ErrorResponse(int status, const std::string& message) {
  return JsonResponse(status, Json{{"error", {{"status", status}, {"message", message}}}});
}

std::optional<std::string> Param(const QueryParams& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ListParam(const QueryParams& params, const std::string& name) {
  std::vector<std::string> out;
  auto [b, e] = params.equal_range(name);
  for (auto it = b; it != e; ++it) {
    for (auto& v : SplitList(it->second)) out.push_back(std::move(v));
  }
  return out;
}

long long ParseInteger(const std::string& text, const std::string& what) {
  long long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    Fail(400, "parameter '" + what + "' must be an integer, got '" + text + "'");
  }
  return v;
}

double ParseReal(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(400, "parameter '" + what + "' must be a number, got '" + text + "'");
}

bool ParseBool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes" || text.empty()) return true;
  if (text == "0" || text == "false" || text == "no") return false;
  Fail(400, "parameter '" + what + "' must be a boolean, got '" + text + "'");
}

template <typename F>
auto ParseNamed(const std::string& text, const std::string& what, F parse) {
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    Fail(400, "parameter '" + what + "': " + e.what());
  }
}

// Reads settings from a flat string map (query parameters or JSON fields).
AnalysisConfig ConfigFrom(const std::map<std::string, std::string>& values, AnalysisConfig c) {
  auto get = [&](const char* k) -> const std::string* {
    auto it = values.find(k);
    return it == values.end() ? nullptr : &it->second;
  };
  if (auto v = get("context")) c.context = ParseNamed(*v, "context", ParseHourContext);
  if (auto v = get("deviation")) c.kind = ParseNamed(*v, "deviation", ParseDeviationKind);
  if (auto v = get("survival")) c.survival = ParseNamed(*v, "survival", ParseSurvivalMode);
  if (auto v = get("side")) c.policy.side = ParseNamed(*v, "side", ParseOutlierSide);
  if (auto v = get("linkpred")) c.linkpred = ParseNamed(*v, "linkpred", ParseLinkPredictionMode);
  if (auto v = get("sigma")) {
    c.policy.sigma_multiplier = ParseReal(*v, "sigma");
    if (!(c.policy.sigma_multiplier > 0) || !std::isfinite(c.policy.sigma_multiplier)) {
      Fail(400, "parameter 'sigma' must be positive");
    }
  }
  if (auto v = get("robust")) {
    c.policy.spread = ParseBool(*v, "robust") ? SpreadEstimator::kMedianMad : SpreadEstimator::kMeanStd;
  }
  return c;
}

std::map<std::string, std::string> FirstValues(const QueryParams& params) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : params) out.emplace(k, v);
  return out;
}

SummaryOptions SummaryFrom(const std::map<std::string, std::string>& values, std::size_t limit) {
  SummaryOptions s;
  s.limit = limit;
  if (auto it = values.find("offset"); it != values.end()) {
    long long v = ParseInteger(it->second, "offset");
    if (v < 0) Fail(400, "parameter 'offset' must be non-negative");
    s.offset = static_cast<std::size_t>(v);
  }
  if (auto it = values.find("limit"); it != values.end()) {
    long long v = ParseInteger(it->second, "limit");
    if (v < 0) Fail(400, "parameter 'limit' must be non-negative");
    s.limit = static_cast<std::size_t>(v);
  }
  if (auto it = values.find("bin_width"); it != values.end()) {
    s.bin_width = ParseReal(it->second, "bin_width");
    if (!(s.bin_width > 0) || !std::isfinite(s.bin_width)) {
      Fail(400, "parameter 'bin_width' must be positive");
    }
  }
  if (auto it = values.find("cells"); it != values.end()) s.include_cells = ParseBool(it->second, "cells");
  return s;
}

std::vector<std::string> SplitPath(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

Json SchemaOf(const Cube& cube) {
  Json dims = Json::array();
  for (std::size_t i = 0; i < cube.schema().size(); ++i) {
    const auto& d = cube.schema()[i];
    dims.push_back({{"name", d.name},
                    {"kind", DimensionKindName(d.kind)},
                    {"values", cube.ObservedValues(i).size()}});
  }
  return {{"dimensions", dims}, {"grand_total", cube.grand_total()}, {"cells", cube.size()}};
}

std::string CanonicalRequest(std::string_view method, std::string_view path,
                             const QueryParams& params, std::string_view body) {
  std::string key(method);
  key += ' ';
  key += path;
  for (const auto& [k, v] : params) {
    key += '\x1f';
    key += k;
    key += '=';
    key += v;
  }
  key += '\x1e';
  if (!body.empty()) {
    Json j = Json::parse(body, nullptr, false);
    key += j.is_discarded() ? std::string(body) : DumpJson(j);
  }
  return key;
}

}  // namespace

struct Service::State {
  Dataset dataset;
  std::optional<CommunityAssignment> communities;
  ServiceOptions options;

  mutable std::mutex mu;
  mutable std::map<std::string, std::shared_ptr<const EventAnalysis>> events;
  mutable std::map<std::string, std::shared_ptr<const std::string>> responses;

  std::unique_ptr<httplib::Server> server;

  std::shared_ptr<const EventAnalysis> Events(const AnalysisConfig& config) const {
    const std::string key = config.Key();
    {
      std::lock_guard lock(mu);
      if (auto it = events.find(key); it != events.end()) return it->second;
    }
    auto computed = std::make_shared<const EventAnalysis>(AnalyzeEvents(dataset.interactions, config));
    std::lock_guard lock(mu);
    events[key] = computed;
    return computed;
  }

  const Event& EventAt(const EventAnalysis& a, const std::string& id_text) const {
    long long id = -1;
    auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc() || p != id_text.data() + id_text.size() || id < 0 ||
        static_cast<std::size_t>(id) >= a.events.size()) {
      Fail(404, "unknown event '" + id_text + "'");
    }
    return a.events[static_cast<std::size_t>(id)];
  }

  void RequireInteractions() const {
    if (dataset.interactions.empty()) Fail(409, "the loaded dataset holds no interactions");
  }
  void RequireHashtags() const {
    if (dataset.hashtags.empty()) Fail(409, "the loaded dataset holds no hashtag records");
  }

  Json Schema() const {
    Json days = Json::array();
    if (!dataset.interactions.empty()) {
      const Cube hours = HourCube(dataset.interactions);
      const std::size_t d = hours.schema().IndexOrThrow(kDayDim);
      for (std::uint32_t id : hours.ObservedValues(d)) days.push_back(hours.dictionary(d).label(id));
    }
    Json contexts = Json::array();
    for (auto c : {HourContext::kBasic, HourContext::kAggregative, HourContext::kMultiAggregative}) {
      contexts.push_back(HourContextName(c));
    }
    return {{"loaded", true},
            {"timezone", FormatUtcOffset(dataset.offset_minutes)},
            {"lines", dataset.lines},
            {"entries", dataset.entries},
            {"parse_errors", dataset.errors.size()},
            {"cubes",
             {{"interactions", SchemaOf(dataset.interactions)},
              {"hashtags", SchemaOf(dataset.hashtags)}}},
            {"days", days},
            {"contexts", contexts},
            {"deviations", {"ratio", "poisson"}},
            {"communities", communities ? Json(communities->size()) : Json(nullptr)},
            {"page_limit", options.page_limit}};
  }

  Json Evaluate(std::string_view body) const {
    Json req = body.empty() ? Json::object() : Json::parse(body, nullptr, false);
    if (req.is_discarded() || !req.is_object()) Fail(400, "request body must be a JSON object");

    std::map<std::string, std::string> flat;
    for (auto it = req.begin(); it != req.end(); ++it) {
      if (it.value().is_string()) {
        flat[it.key()] = it.value().get<std::string>();
      } else if (it.value().is_number() || it.value().is_boolean()) {
        flat[it.key()] = it.value().dump();
      }
    }
    AnalysisConfig config = ConfigFrom(flat, AnalysisConfig{});
    SummaryOptions summary = SummaryFrom(flat, options.page_limit);

    auto string_list = [&](const char* key) -> std::optional<std::vector<std::string>> {
      if (!req.contains(key)) return std::nullopt;
      const Json& v = req[key];
      if (!v.is_array()) Fail(400, std::string("field '") + key + "' must be an array of strings");
      std::vector<std::string> out;
      for (const auto& e : v) {
        if (!e.is_string()) Fail(400, std::string("field '") + key + "' must be an array of strings");
        out.push_back(e.get<std::string>());
      }
      return out;
    };

    const std::string cube_name = flat.count("cube") ? flat["cube"] : "interactions";
    const Cube* base = nullptr;
    if (cube_name == "interactions") {
      base = &dataset.interactions;
    } else if (cube_name == "hashtags") {
      base = &dataset.hashtags;
    } else {
      Fail(400, "field 'cube' must be 'interactions' or 'hashtags'");
    }

    Cube source = *base;
    if (req.contains("filter")) {
      const Json& f = req["filter"];
      if (!f.is_object()) Fail(400, "field 'filter' must map dimensions to label arrays");
      Selector sel;
      for (auto it = f.begin(); it != f.end(); ++it) {
        if (!source.schema().Contains(it.key())) Fail(400, "unknown dimension '" + it.key() + "'");
        std::vector<std::string> labels;
        if (!it.value().is_array() || it.value().empty()) {
          Fail(400, "filter on '" + it.key() + "' must be a non-empty array");
        }
        for (const auto& l : it.value()) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
        sel.Keep(it.key(), std::move(labels));
      }
      source = Filter(source, sel);
    }

    std::vector<std::string> dims = string_list("dims").value_or(
        std::vector<std::string>{std::string(kDayDim), std::string(kHourDim)});
    for (const auto& d : dims) {
      if (!source.schema().Contains(d)) Fail(400, "unknown dimension '" + d + "'");
    }
    Cube observed = KeepDims(source, dims);
    if (observed.empty()) Fail(409, "the selected cube is empty");

    const bool has_spec = flat.count("spec") > 0;
    const bool has_preset = flat.count("preset") > 0;
    if (has_spec && has_preset) Fail(400, "give either 'spec' or 'preset', not both");

    EnumerationPolicy enumeration = EnumerationPolicy::kSupportUnionFirstTerm;
    if (auto it = flat.find("enumeration"); it != flat.end()) {
      if (it->second == "observed") {
        enumeration = EnumerationPolicy::kObservedOnly;
      } else if (it->second == "support") {
        enumeration = EnumerationPolicy::kSupportUnionFirstTerm;
      } else if (it->second == "full") {
        enumeration = EnumerationPolicy::kFullDomain;
      } else {
        Fail(400, "field 'enumeration' must be observed, support or full");
      }
    }

    ExpectedField field;
    std::string estimator_text;
    try {
      if (has_spec) {
        estimator_text = flat["spec"];
        NamedCubes named{{"base", source},
                         {"interactions", dataset.interactions},
                         {"hashtags", dataset.hashtags}};
        field = ExpectedRatioProduct(observed, ParseEstimator(estimator_text, observed, named),
                                     enumeration);
      } else {
        const std::string preset = has_preset ? flat["preset"] : "multiagg";
        HourContext ctx = ParseNamed(preset, "preset", ParseHourContext);
        estimator_text = std::string(HourContextName(ctx));
        if (ctx == HourContext::kBasic) {
          field = ExpectedBasic(observed);
        } else if (ctx == HourContext::kAggregative) {
          std::vector<std::string> agg = string_list("agg_dims").value_or(std::vector<std::string>{});
          if (agg.empty()) {
            agg.push_back(observed.schema().Contains(kHourDim) ? std::string(kHourDim)
                                                                : dims.back());
          }
          field = ExpectedAggregative(observed, agg);
        } else {
          std::string text = "expect = ";
          for (std::size_t i = 0; i < dims.size(); ++i) {
            if (i > 0) text += " * ";
            text += "cube(" + dims[i] + ")";
          }
          for (std::size_t i = 1; i < dims.size(); ++i) text += " / cube()";
          field = ExpectedRatioProduct(observed, ParseEstimator(text, observed), enumeration);
        }
      }
    } catch (const std::invalid_argument& e) {
      Fail(400, e.what());
    }

    ContextEvaluation eval = EvaluateContext(field, config.kind, config.policy, config.survival);
    Json out{{"cube", cube_name}, {"estimator", estimator_text},
             {"enumeration", EnumerationPolicyName(field.policy)}};
    const Json summary_json = EvaluationSummaryJson(eval, summary);
    for (auto& [k, v] : summary_json.items()) out[k] = v;
    return out;
  }

  Json EventsList(const AnalysisConfig& config) const {
    auto a = Events(config);
    return {{"settings", config.Key()},
            {"stats", {{"mean", a->hour_eval.stats.mean},
                       {"std", a->hour_eval.stats.std},
                       {"count", a->hour_eval.stats.count}}},
            {"events", EventsJson(a->events, &a->hour_eval)}};
  }

  Json Authors(const AnalysisConfig& config, const std::string& id,
               const SummaryOptions& summary) const {
    auto a = Events(config);
    const Event& e = EventAt(*a, id);
    try {
      AuthorExplanation expl = ExplainEventAuthors(dataset.interactions, e, config.Drilldown());
      Json out = AuthorExplanationJson(e, expl, summary);
      out["id"] = std::stoul(id);
      return out;
    } catch (const DataError& err) {
      Fail(409, err.what());
    }
  }

  Json Spreaders(const AnalysisConfig& config, const std::string& id,
                 std::optional<std::string> author, const SummaryOptions& summary) const {
    auto a = Events(config);
    const Event& e = EventAt(*a, id);
    if (!author) {
      AuthorExplanation expl = ExplainEventAuthors(dataset.interactions, e, config.Drilldown());
      if (expl.cause.kind != CauseKind::kOneMain) {
        Fail(400, "event has no single main author; pass the 'author' parameter");
      }
      author = expl.cause.main_entities.front().label;
    }
    const std::size_t ad = dataset.interactions.schema().IndexOrThrow(kAuthorDim);
    if (!dataset.interactions.dictionary(ad).Find(*author)) Fail(404, "unknown author '" + *author + "'");
    try {
      SpreaderExplanation expl = ExplainEventSpreaders(dataset.interactions, e, *author, config.Drilldown());
      Json out = SpreaderExplanationJson(e, expl, summary);
      out["id"] = std::stoul(id);
      return out;
    } catch (const DataError& err) {
      Fail(404, err.what());
    }
  }

  Json EventHashtags(const AnalysisConfig& config, const std::string& id,
                     const SummaryOptions& summary) const {
    auto a = Events(config);
    const Event& e = EventAt(*a, id);
    RequireHashtags();
    ContextEvaluation eval;
    std::vector<RankedEntity> ranked;
    try {
      ranked = AbnormalHashtagsForEvent(dataset.hashtags, e, config.Drilldown(), &eval);
    } catch (const DataError& err) {
      Fail(409, err.what());
    }
    Json arr = Json::array();
    for (const auto& r : ranked) arr.push_back(RankedJson(r));
    return {{"id", std::stoul(id)},
            {"event", e.Label()},
            {"hashtags", arr},
            {"evaluation", EvaluationSummaryJson(eval, summary)}};
  }

  Json Predict(const AnalysisConfig& config, const QueryParams& params) const {
    if (!communities) Fail(409, "no community file was loaded");
    RequireHashtags();
    auto s = Param(params, "s");
    auto d = Param(params, "d");
    auto h = Param(params, "h");
    std::vector<std::string> k = ListParam(params, "k");
    if (!s || !d || !h || k.empty()) Fail(400, "parameters s, k, d and h are required");
    long long hour = ParseInteger(*h, "h");
    if (hour < 0 || hour >= kHoursPerDay) Fail(400, "parameter 'h' must be in 0..23");
    if (!communities->contains(*s)) Fail(404, "spreader '" + *s + "' has no community");
    const Cube& base5 = dataset.hashtags;
    const std::size_t kd = base5.schema().IndexOrThrow(kHashtagDim);
    for (auto& tag : k) {
      tag = NormalizeHashtag(tag);
      if (!base5.dictionary(kd).Find(tag)) Fail(404, "unknown hashtag '" + tag + "'");
    }
    const std::size_t dd = base5.schema().IndexOrThrow(kDayDim);
    if (!base5.dictionary(dd).Find(*d)) Fail(404, "unknown day '" + *d + "'");
    try {
      LinkPrediction p = PredictUserTopic(base5, *communities, *s, k, *d, static_cast<int>(hour),
                                          config.linkpred);
      Json out{{"spreader", *s}, {"community", communities->find(*s)->second},
               {"hashtags", k}, {"day", *d}, {"hour", hour},
               {"mode", LinkPredictionModeName(config.linkpred)}};
      const Json parts = PredictionJson(p);
      for (auto& [key, v] : parts.items()) out[key] = v;
      return out;
    } catch (const std::invalid_argument& e) {
      Fail(400, e.what());
    }
  }

  Json Dispatch(std::string_view method, std::string_view path, const QueryParams& params,
                std::string_view body) const {
    const std::vector<std::string> parts = SplitPath(path);
    auto values = FirstValues(params);
    auto require_get = [&] {
      if (method != "GET" && method != "HEAD") Fail(405, "method not allowed");
    };
    if (parts.size() == 1 && parts[0] == "schema") {
      require_get();
      return Schema();
    }
    if (parts.size() == 1 && parts[0] == "evaluate") {
      if (method != "POST") Fail(405, "use POST for /evaluate");
      RequireInteractions();
      return Evaluate(body);
    }
    if (!parts.empty() && parts[0] == "events" && parts.size() <= 3) {
      require_get();
      RequireInteractions();
      AnalysisConfig config = ConfigFrom(values, EventDefaults());
      if (parts.size() == 1) return EventsList(config);
      SummaryOptions summary = SummaryFrom(values, options.page_limit);
      if (parts.size() == 3 && parts[2] == "authors") return Authors(config, parts[1], summary);
      if (parts.size() == 3 && parts[2] == "spreaders") {
        return Spreaders(config, parts[1], Param(params, "author"), summary);
      }
      if (parts.size() == 3 && parts[2] == "hashtags") return EventHashtags(config, parts[1], summary);
      Fail(404, "unknown endpoint");
    }
    if (parts.size() == 1 && parts[0] == "hashtags") {
      require_get();
      RequireHashtags();
      AnalysisConfig config = ConfigFrom(values, EventDefaults());
      return {{"settings", config.Key()},
              {"triplets", HashtagAnomaliesJson(AbnormalHashtagsGlobal(dataset.hashtags,
                                                                       config.Drilldown()))}};
    }
    if (parts.size() == 1 && parts[0] == "topics") {
      require_get();
      auto n = Param(params, "n");
      if (!n) Fail(400, "parameter 'n' is required");
      long long count = ParseInteger(*n, "n");
      if (count < 1) Fail(400, "parameter 'n' must be at least 1");
      AnalysisConfig config = ConfigFrom(values, EventDefaults());
      if (dataset.hashtags.empty()) return TopicsJson({}, static_cast<std::size_t>(count));
      std::vector<std::string> candidates;
      for (const auto& k : ListParam(params, "k")) candidates.push_back(NormalizeHashtag(k));
      try {
        return TopicsJson(DiscoverTopics(dataset.hashtags, candidates,
                                         static_cast<std::size_t>(count), config.Drilldown()),
                          static_cast<std::size_t>(count));
      } catch (const std::invalid_argument& e) {
        Fail(400, e.what());
      }
    }
    if (parts.size() == 1 && parts[0] == "predict") {
      require_get();
      AnalysisConfig config = ConfigFrom(values, AnalysisConfig{});
      if (!values.count("linkpred")) config.linkpred = options.linkpred;
      return Predict(config, params);
    }
    Fail(404, "unknown endpoint '" + std::string(path) + "'");
  }
};

Service::Service() : state_(std::make_unique<State>()) {}

Service::Service(Dataset dataset, std::optional<CommunityAssignment> communities,
                 ServiceOptions options)
    : loaded_(true), state_(std::make_unique<State>()) {
  state_->dataset = std::move(dataset);
  state_->communities = std::move(communities);
  state_->options = std::move(options);
}

Service::~Service() = default;

ServiceResponse Service::HandleQuery(std::string_view method, std::string_view path,
                                     const QueryParams& params, std::string_view body) const {
  if (!loaded_) {
    if (SplitPath(path) == std::vector<std::string>{"schema"}) {
      return JsonResponse(200, Json{{"loaded", false}});
    }
    return ErrorResponse(409, "no dataset loaded");
  }
  const std::string key = CanonicalRequest(method, path, params, body);
  {
    std::lock_guard lock(state_->mu);
    if (auto it = state_->responses.find(key); it != state_->responses.end()) {
      return {200, *it->second, "application/json"};
    }
  }
  try {
    auto text = std::make_shared<const std::string>(DumpJson(state_->Dispatch(method, path, params, body)));
    std::lock_guard lock(state_->mu);
    state_->responses[key] = text;
    return {200, *text, "application/json"};
  } catch (const HttpError& e) {
    return ErrorResponse(e.status, e.message);
  } catch (const DataError& e) {
    return ErrorResponse(409, e.what());
  } catch (const std::invalid_argument& e) {
    return ErrorResponse(400, e.what());
  } catch (const std::exception& e) {
    return ErrorResponse(500, e.what());
  }
}

bool Service::Serve(const std::string& host, int port, std::function<void(int)> on_ready) {
  state_->server = std::make_unique<httplib::Server>();
  httplib::Server& srv = *state_->server;
  if (!state_->options.ui_dir.empty() && std::filesystem::is_directory(state_->options.ui_dir)) {
    srv.set_mount_point("/ui", state_->options.ui_dir);
  }
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    ServiceResponse r = HandleQuery(req.method, req.path, params, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  srv.Get(".*", handler);
  srv.Post(".*", handler);
  if (port == 0) {
    port = srv.bind_to_any_port(host);
    if (port < 0) return false;
  } else if (!srv.bind_to_port(host, port)) {
    return false;
  }
  std::thread notifier;
  if (on_ready) {
    notifier = std::thread([&srv, port, on_ready] {
      srv.wait_until_ready();
      on_ready(port);
    });
  }
  bool ok = srv.listen_after_bind();
  if (notifier.joinable()) notifier.join();
  return ok;
}

void Service::Stop() {
  if (state_->server) state_->server->stop();
}

}  // namespace cubelens
