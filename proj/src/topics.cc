#include <algorithm>
#include <iterator>
#include <set>
#include <string>

#include "cubelens/detect.h"
#include "cubelens/parallel.h"

namespace cubelens {

namespace {

constexpr std::string_view kTopicClass = "K";
constexpr std::string_view kRestClass = "rest";
constexpr std::string_view kUnassignedCommunity = "__unassigned__";

using Names = std::vector<std::string>;

Names Intersect(const Names& a, const Names& b) {
  Names out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool Intersects(const Names& a, const Names& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

std::vector<HashtagEntities> Normalized(const std::vector<HashtagEntities>& groups,
                                        std::size_t n) {
  if (n == 0) throw std::invalid_argument("topic size must be at least 1");
  if (n > groups.size()) {
    throw std::invalid_argument("topic size " + std::to_string(n) + " exceeds the " +
                                std::to_string(groups.size()) + " candidate hashtags");
  }
  std::vector<HashtagEntities> sorted = groups;
  for (auto& g : sorted) {
    std::sort(g.spreaders.begin(), g.spreaders.end());
    g.spreaders.erase(std::unique(g.spreaders.begin(), g.spreaders.end()), g.spreaders.end());
    std::sort(g.authors.begin(), g.authors.end());
    g.authors.erase(std::unique(g.authors.begin(), g.authors.end()), g.authors.end());
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.hashtag < b.hashtag; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].hashtag == sorted[i - 1].hashtag) {
      throw std::invalid_argument("duplicate candidate hashtag '" + sorted[i].hashtag + "'");
    }
  }
  return sorted;
}

class TopicSearch {
 public:
  TopicSearch(std::vector<HashtagEntities> items, std::size_t n)
      : items_(std::move(items)), n_(n) {
    const std::size_t m = items_.size();
    adjacent_.assign(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const bool ok = Intersects(items_[i].spreaders, items_[j].spreaders) &&
                        Intersects(items_[i].authors, items_[j].authors);
        adjacent_[i][j] = adjacent_[j][i] = ok;
      }
    }
  }

  std::vector<Topic> Run() {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i].spreaders.empty() || items_[i].authors.empty()) continue;
      chosen_ = {i};
      Extend(i + 1, items_[i].spreaders, items_[i].authors);
    }
    return std::move(out_);
  }

 private:
  void Extend(std::size_t from, const Names& spreaders, const Names& authors) {
    if (chosen_.size() == n_) {
      Topic t;
      for (std::size_t i : chosen_) t.hashtags.push_back(items_[i].hashtag);
      t.spreaders = spreaders;
      t.authors = authors;
      out_.push_back(std::move(t));
      return;
    }
    for (std::size_t j = from; j + (n_ - chosen_.size()) <= items_.size(); ++j) {
      if (!std::all_of(chosen_.begin(), chosen_.end(),
                       [&](std::size_t c) { return adjacent_[c][j]; })) {
        continue;
      }
      Names s = Intersect(spreaders, items_[j].spreaders);
      if (s.empty()) continue;
      Names a = Intersect(authors, items_[j].authors);
      if (a.empty()) continue;
      chosen_.push_back(j);
      Extend(j + 1, s, a);
      chosen_.pop_back();
    }
  }

  std::vector<HashtagEntities> items_;
  std::size_t n_;
  std::vector<std::vector<bool>> adjacent_;
  std::vector<std::size_t> chosen_;
  std::vector<Topic> out_;
};

// Entities that are positive outliers of
// expected(x, d, h) = v(k, d, h) * v(x, h) / v(h) for a fixed hashtag k.
struct EntityContext {
  std::string dim;
  Cube profile;  // (dim, hour)
};

Names AbnormalEntities(const Cube& base5, const std::string& hashtag,
                       const EntityContext& context, const Cube& hashtag_slots,
                       const Cube& hour_totals, const DrilldownOptions& options) {
  Selector selector;
  selector.Keep(std::string(kHashtagDim), {hashtag});
  const std::string keep[] = {context.dim, std::string(kDayDim), std::string(kHourDim)};
  Cube observed = KeepDims(Filter(base5, selector), keep);
  if (observed.empty()) return {};
  EstimatorSpec spec;
  spec.terms.push_back({hashtag_slots,
                        CoordinateProjection().Fix(hashtag).Copy(std::string(kDayDim)).Copy(
                            std::string(kHourDim)),
                        1});
  spec.terms.push_back({context.profile,
                        CoordinateProjection().Copy(context.dim).Copy(std::string(kHourDim)), 1});
  spec.terms.push_back({hour_totals, CoordinateProjection().Copy(std::string(kHourDim)), -1});
  ContextEvaluation eval = EvaluateContext(ExpectedRatioProduct(observed, spec), options.kind,
                                           options.policy, options.survival);
  const std::size_t dim = observed.schema().IndexOrThrow(context.dim);
  std::set<std::string> names;
  for (std::size_t i : eval.PositiveOutliers()) {
    names.insert(observed.dictionary(dim).label(eval.cells[i].key[dim]));
  }
  return {names.begin(), names.end()};
}

}  // namespace

std::vector<HashtagEntities> AbnormalEntitiesPerHashtag(const Cube& base5,
                                                        const std::vector<std::string>& hashtags,
                                                        const DrilldownOptions& options) {
  Cube hashtag_slots = KeepDims(base5, {kHashtagDim, kDayDim, kHourDim});
  Cube hour_totals = KeepDims(base5, {kHourDim});
  const EntityContext spreaders{std::string(kSpreaderDim),
                                KeepDims(base5, {kSpreaderDim, kHourDim})};
  const EntityContext authors{std::string(kAuthorDim), KeepDims(base5, {kAuthorDim, kHourDim})};
  std::vector<HashtagEntities> out(hashtags.size());
  ParallelFor(hashtags.size(), [&](std::size_t i) {
    out[i].hashtag = hashtags[i];
    out[i].spreaders =
        AbnormalEntities(base5, hashtags[i], spreaders, hashtag_slots, hour_totals, options);
    out[i].authors =
        AbnormalEntities(base5, hashtags[i], authors, hashtag_slots, hour_totals, options);
  });
  return out;
}

std::vector<Topic> EnumerateTopics(const std::vector<HashtagEntities>& groups, std::size_t n) {
  return TopicSearch(Normalized(groups, n), n).Run();
}

std::vector<Topic> EnumerateTopicsExhaustive(const std::vector<HashtagEntities>& groups,
                                             std::size_t n) {
  const auto items = Normalized(groups, n);
  std::vector<Topic> out;
  std::vector<bool> mask(items.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), true);
  do {
    Topic t;
    bool first = true;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!mask[i]) continue;
      t.hashtags.push_back(items[i].hashtag);
      if (first) {
        t.spreaders = items[i].spreaders;
        t.authors = items[i].authors;
        first = false;
      } else {
        t.spreaders = Intersect(t.spreaders, items[i].spreaders);
        t.authors = Intersect(t.authors, items[i].authors);
      }
    }
    if (!t.spreaders.empty() && !t.authors.empty()) out.push_back(std::move(t));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  std::sort(out.begin(), out.end(),
            [](const Topic& a, const Topic& b) { return a.hashtags < b.hashtags; });
  return out;
}

std::vector<Topic> DiscoverTopics(const Cube& base5, const std::vector<std::string>& candidates,
                                  std::size_t n, const DrilldownOptions& options) {
  std::vector<std::string> hashtags = candidates;
  if (hashtags.empty()) {
    for (const auto& a : AbnormalHashtagsGlobal(base5, options)) hashtags.push_back(a.hashtag);
  }
  std::sort(hashtags.begin(), hashtags.end());
  hashtags.erase(std::unique(hashtags.begin(), hashtags.end()), hashtags.end());
  if (n == 0) throw std::invalid_argument("topic size must be at least 1");
  if (n > hashtags.size()) {
    if (candidates.empty()) return {};
    throw std::invalid_argument("topic size " + std::to_string(n) + " exceeds the " +
                                std::to_string(hashtags.size()) + " candidate hashtags");
  }
  return EnumerateTopics(AbnormalEntitiesPerHashtag(base5, hashtags, options), n);
}

// ---------------------------------------------------------------------------
// Link prediction

std::string_view LinkPredictionModeName(LinkPredictionMode mode) {
  return mode == LinkPredictionMode::kLiteral ? "literal" : "mean-day";
}

LinkPredictionMode ParseLinkPredictionMode(std::string_view name) {
  if (name == "literal") return LinkPredictionMode::kLiteral;
  if (name == "mean-day") return LinkPredictionMode::kMeanDay;
  throw std::invalid_argument("unknown link prediction mode: " + std::string(name));
}

LinkPrediction PredictUserTopic(const Cube& base5, const CommunityAssignment& communities,
                                std::string_view spreader,
                                const std::vector<std::string>& hashtags, std::string_view day,
                                int hour, LinkPredictionMode mode) {
  auto community = communities.find(spreader);
  if (community == communities.end()) {
    throw std::invalid_argument("spreader '" + std::string(spreader) + "' has no community");
  }
  if (hashtags.empty()) throw std::invalid_argument("topic has no hashtags");
  if (hour < 0 || hour >= kHoursPerDay) {
    throw std::invalid_argument("hour out of range: " + std::to_string(hour));
  }
  const auto& schema = base5.schema();
  const std::size_t s_dim = schema.IndexOrThrow(kSpreaderDim);
  const std::size_t k_dim = schema.IndexOrThrow(kHashtagDim);
  const std::size_t d_dim = schema.IndexOrThrow(kDayDim);
  for (const auto& k : hashtags) {
    if (!base5.dictionary(k_dim).Find(k)) {
      throw std::invalid_argument("unknown hashtag '" + k + "'");
    }
  }

  std::map<std::string, std::vector<std::string>> members;
  for (const auto& [s, c] : communities) members[c].push_back(s);
  std::vector<std::string> unassigned;
  for (std::uint32_t id : base5.ObservedValues(s_dim)) {
    const auto& label = base5.dictionary(s_dim).label(id);
    if (!communities.contains(label)) unassigned.push_back(label);
  }
  Partition by_community{std::string(kSpreaderDim), {}};
  for (auto& [c, m] : members) by_community.classes.emplace_back(c, std::move(m));
  if (!unassigned.empty()) {
    by_community.classes.emplace_back(std::string(kUnassignedCommunity), std::move(unassigned));
  }

  std::set<std::string> topic(hashtags.begin(), hashtags.end());
  std::vector<std::string> rest;
  for (std::uint32_t id : base5.ObservedValues(k_dim)) {
    const auto& label = base5.dictionary(k_dim).label(id);
    if (!topic.contains(label)) rest.push_back(label);
  }
  Partition by_topic{std::string(kHashtagDim),
                     {{std::string(kTopicClass), {topic.begin(), topic.end()}}}};
  if (!rest.empty()) by_topic.classes.emplace_back(std::string(kRestClass), std::move(rest));

  Cube grouped = AggregatePartition(
      AggregatePartition(KeepDims(base5, {kSpreaderDim, kHashtagDim, kDayDim, kHourDim}),
                         by_community),
      by_topic);
  const std::string c = community->second;
  const std::string h = std::to_string(hour);
  const std::string K(kTopicClass);

  const double community_topic =
      static_cast<double>(KeepDims(grouped, {kSpreaderDim, kHashtagDim}).CellValue({c, K}));
  const double topic_total = static_cast<double>(KeepDims(grouped, {kHashtagDim}).CellValue({K}));
  const double user_hour = static_cast<double>(
      KeepDims(base5, {kSpreaderDim, kHourDim}).CellValue({spreader, h}));
  const double community_hour =
      static_cast<double>(KeepDims(grouped, {kSpreaderDim, kHourDim}).CellValue({c, h}));
  const double topic_slot =
      mode == LinkPredictionMode::kLiteral
          ? static_cast<double>(
                KeepDims(grouped, {kHashtagDim, kDayDim, kHourDim}).CellValue({K, day, h}))
          : static_cast<double>(KeepDims(grouped, {kHashtagDim, kHourDim}).CellValue({K, h}));
  const double days = static_cast<double>(DimensionDomain(base5, d_dim).size());

  LinkPrediction out;
  if (topic_total > 0) out.community_share = community_topic / topic_total;
  if (community_hour > 0) out.hour_share = user_hour / community_hour;
  if (days > 0) out.topic_rate = topic_slot / days;
  if (topic_total > 0 && community_hour > 0 && days > 0) {
    out.expected = out.community_share * out.hour_share * out.topic_rate;
  }
  return out;
}

}  // namespace cubelens
