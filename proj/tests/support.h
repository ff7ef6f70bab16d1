// Test helpers: random bases with their raw records, a record-level oracle
// for operation sequences, and hand-built evaluations.

#ifndef CUBELENS_TESTS_SUPPORT_H_
#define CUBELENS_TESTS_SUPPORT_H_

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cubelens/cube.h"
#include "cubelens/deviation.h"

namespace cubelens::testing {

// Records over (spreader, author, hashtag, day, hour) as per-dimension codes.
struct RandomBase {
  static constexpr std::size_t kDims = 5;
  std::vector<std::array<std::uint32_t, kDims>> records;
  std::array<std::vector<std::string>, kDims> labels;
  Cube cube;
};

inline std::string DayLabel(int day) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "2016-08-%02d", day);
  return buf;
}

// `sizes` gives the number of distinct values of the first four dimensions;
// hours always range over 0..23. Records are drawn with skewed weights so
// that some cells repeat.
inline RandomBase MakeRandomBase(std::mt19937_64& rng, std::size_t n,
                                 std::array<std::uint32_t, 4> sizes = {40, 30, 12, 20}) {
  RandomBase b;
  const char* prefix[] = {"s", "a", "k"};
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::uint32_t i = 0; i < sizes[d]; ++i) b.labels[d].push_back(prefix[d] + std::to_string(i));
  }
  for (std::uint32_t i = 0; i < sizes[3]; ++i) b.labels[3].push_back(DayLabel(static_cast<int>(i) + 1));
  for (int h = 0; h < kHoursPerDay; ++h) b.labels[4].push_back(std::to_string(h));

  std::array<std::discrete_distribution<std::uint32_t>, RandomBase::kDims> dist;
  for (std::size_t d = 0; d < RandomBase::kDims; ++d) {
    std::vector<double> w;
    for (std::size_t i = 0; i < b.labels[d].size(); ++i) w.push_back(1.0 / (1.0 + static_cast<double>(i % 7)));
    dist[d] = std::discrete_distribution<std::uint32_t>(w.begin(), w.end());
  }
  CubeBuilder builder(DimensionSchema::HashtagInteractions());
  std::vector<std::string> row(RandomBase::kDims);
  b.records.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::array<std::uint32_t, RandomBase::kDims> rec{};
    for (std::size_t d = 0; d < RandomBase::kDims; ++d) {
      rec[d] = dist[d](rng);
      row[d] = b.labels[d][rec[d]];
    }
    b.records.push_back(rec);
    builder.Add(row);
  }
  b.cube = std::move(builder).Build();
  return b;
}

// Direct count of the records under an operation trace, keyed by labels.
// Tracks for every surviving dimension the source column and a relabeling
// built from partitions; filters are evaluated on current labels.
inline std::map<std::vector<std::string>, std::uint64_t> OracleCounts(
    const RandomBase& base, const Provenance& trace) {
  struct Column {
    std::string name;
    std::size_t source;
    std::map<std::string, std::string> relabel;  // empty: identity
  };
  const auto& schema = base.cube.schema();
  struct Step {
    std::vector<std::size_t> cols;
    std::set<std::vector<std::string>> allowed;
    std::vector<std::map<std::string, std::string>> relabels;
  };
  std::vector<Step> steps;

  // Filters see labels as they are at the time of filtering, so each step
  // snapshots the relabeling then in force.
  std::vector<Column> all;
  for (std::size_t d = 0; d < schema.size(); ++d) all.push_back({schema[d].name, d, {}});
  std::vector<std::size_t> current;  // indices into `all`
  for (std::size_t i = 0; i < all.size(); ++i) current.push_back(i);
  auto find_current = [&](const std::string& name) -> std::size_t {
    for (std::size_t i : current) {
      if (all[i].name == name) return i;
    }
    throw std::logic_error("oracle: unknown dimension " + name);
  };

  for (const auto& op : trace) {
    if (const auto* a = std::get_if<AggregateOp>(&op)) {
      for (const auto& name : a->dims) {
        std::size_t c = find_current(name);
        current.erase(std::find(current.begin(), current.end(), c));
      }
    } else if (const auto* p = std::get_if<PartitionOp>(&op)) {
      std::size_t c = find_current(p->partition.dim);
      std::map<std::string, std::string> next;
      std::map<std::string, std::string> cls;
      for (const auto& [label, members] : p->partition.classes) {
        for (const auto& m : members) cls[m] = label;
      }
      for (const auto& src : base.labels[all[c].source]) {
        std::string cur = all[c].relabel.empty() ? src : all[c].relabel.at(src);
        auto it = cls.find(cur);
        next[src] = it == cls.end() ? std::string("\x01unclassified") : it->second;
      }
      all[c].relabel = std::move(next);
    } else if (const auto* f = std::get_if<FilterOp>(&op)) {
      for (const auto& vs : f->selector.value_sets()) {
        Step s{{find_current(vs.dim)}, {}, {}};
        for (const auto& l : vs.labels) s.allowed.insert({l});
        s.relabels.push_back(all[s.cols[0]].relabel);
        steps.push_back(std::move(s));
      }
      for (const auto& ts : f->selector.tuple_sets()) {
        Step s;
        for (const auto& d : ts.dims) {
          s.cols.push_back(find_current(d));
          s.relabels.push_back(all[s.cols.back()].relabel);
        }
        for (const auto& t : ts.tuples) s.allowed.insert(t);
        steps.push_back(std::move(s));
      }
    }
  }

  std::map<std::vector<std::string>, std::uint64_t> out;
  std::vector<std::string> key(current.size());
  std::vector<std::string> probe;
  for (const auto& rec : base.records) {
    bool keep = true;
    for (const auto& s : steps) {
      probe.clear();
      for (std::size_t j = 0; j < s.cols.size(); ++j) {
        const std::string& src = base.labels[all[s.cols[j]].source][rec[all[s.cols[j]].source]];
        probe.push_back(s.relabels[j].empty() ? src : s.relabels[j].at(src));
      }
      if (!s.allowed.count(probe)) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    for (std::size_t j = 0; j < current.size(); ++j) {
      const Column& c = all[current[j]];
      const std::string& src = base.labels[c.source][rec[c.source]];
      key[j] = c.relabel.empty() ? src : c.relabel.at(src);
    }
    ++out[key];
  }
  return out;
}

// Cube contents keyed by labels.
inline std::map<std::vector<std::string>, std::uint64_t> CubeCounts(const Cube& cube) {
  std::map<std::vector<std::string>, std::uint64_t> out;
  for (const auto& c : cube.cells()) out[cube.Labels(c.key)] = c.count;
  return out;
}

// Evaluation over a one-dimensional "entity" cube whose cells carry the given
// deviations and outlier flags; observed counts default to 1.
struct HandCell {
  std::string label;
  double deviation;
  bool outlier;
  std::uint64_t observed = 1;
};

inline ContextEvaluation HandEvaluation(const std::vector<HandCell>& cells) {
  CubeBuilder builder(DimensionSchema({{"entity", DimensionKind::kCategorical}}));
  for (const auto& c : cells) builder.Add({c.label}, c.observed);
  ContextEvaluation eval;
  eval.observed_cube = std::move(builder).Build();
  for (const auto& c : cells) {
    EvaluatedCell e;
    e.key = *eval.observed_cube.KeyFor(std::vector<std::string>{c.label});
    e.observed = c.observed;
    e.expected = 1.0;
    e.deviation = {c.deviation, DeviationStatus::kFinite};
    e.outlier = c.outlier;
    e.sign = c.outlier ? (c.deviation >= 0 ? 1 : -1) : 0;
    eval.cells.push_back(e);
  }
  std::sort(eval.cells.begin(), eval.cells.end(),
            [](const EvaluatedCell& a, const EvaluatedCell& b) { return a.key < b.key; });
  return eval;
}

}  // namespace cubelens::testing

#endif  // CUBELENS_TESTS_SUPPORT_H_
