#include "cubelens/cube.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <memory>
#include <numeric>
#include <set>
#include <unordered_set>
#include <utility>

#include "json.hpp"

namespace cubelens {

namespace {

std::vector<std::string> ToStrings(std::initializer_list<std::string_view> list) {
  return {list.begin(), list.end()};
}

// Sorts cells by key, merges equal keys and drops zero counts, using 64-bit
// packed keys and an LSD radix sort. Returns false when the ids do not fit in
// 64 bits.
bool RadixSortAndMerge(std::vector<Cube::Cell>& cells) {
  const std::size_t arity = cells.front().key.arity;
  std::array<std::uint32_t, kMaxArity> max_id{};
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < arity; ++i) max_id[i] = std::max(max_id[i], c.key[i]);
  }
  std::array<int, kMaxArity> width{};
  int total = 0;
  for (std::size_t i = 0; i < arity; ++i) {
    width[i] = std::bit_width(max_id[i]);
    total += width[i];
  }
  if (total > 64) return false;

  struct Packed {
    std::uint64_t key;
    std::uint64_t count;
  };
  const std::size_t n = cells.size();
  std::unique_ptr<Packed[]> a(new Packed[n]);
  std::unique_ptr<Packed[]> b(new Packed[n]);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < arity; ++i) k = (k << width[i]) | cells[j].key[i];
    a[j] = {k, cells[j].count};
  }
  constexpr int kDigit = 12;
  constexpr std::size_t kBuckets = std::size_t{1} << kDigit;
  std::vector<std::uint32_t> offsets(kBuckets);
  for (int shift = 0; shift < total; shift += kDigit) {
    std::fill(offsets.begin(), offsets.end(), 0);
    for (std::size_t j = 0; j < n; ++j) ++offsets[(a[j].key >> shift) & (kBuckets - 1)];
    std::uint32_t sum = 0;
    for (auto& o : offsets) sum += std::exchange(o, sum);
    for (std::size_t j = 0; j < n; ++j) b[offsets[(a[j].key >> shift) & (kBuckets - 1)]++] = a[j];
    a.swap(b);
  }
  std::size_t out = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (a[j].count == 0) continue;
    if (out > 0 && a[out - 1].key == a[j].key) {
      a[out - 1].count += a[j].count;
    } else {
      a[out++] = a[j];
    }
  }
  cells.resize(out);
  for (std::size_t j = 0; j < out; ++j) {
    std::uint64_t k = a[j].key;
    CellKey key;
    key.arity = static_cast<std::uint8_t>(arity);
    for (std::size_t i = arity; i-- > 0;) {
      key[i] = static_cast<std::uint32_t>(k & ((std::uint64_t{1} << width[i]) - 1));
      k >>= width[i];
    }
    cells[j] = {key, a[j].count};
  }
  return true;
}

void SortAndMerge(std::vector<Cube::Cell>& cells, bool sorted) {
  if (cells.empty()) return;
  if (!sorted) {
    if (cells.size() <= UINT32_MAX && RadixSortAndMerge(cells)) return;
    std::sort(cells.begin(), cells.end(),
              [](const Cube::Cell& a, const Cube::Cell& b) { return a.key < b.key; });
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].count == 0) continue;
    if (out > 0 && cells[out - 1].key == cells[i].key) {
      cells[out - 1].count += cells[i].count;
    } else {
      cells[out++] = cells[i];
    }
  }
  cells.resize(out);
}

std::optional<int> ParseHour(std::string_view text) {
  int hour = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), hour);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (hour < 0 || hour >= kHoursPerDay) return std::nullopt;
  return hour;
}

nlohmann::json OpToJson(const CubeOp& op) {
  using nlohmann::json;
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, AggregateOp>) {
          auto dims = o.dims;
          std::sort(dims.begin(), dims.end());
          return json{{"aggregate", dims}};
        } else if constexpr (std::is_same_v<T, PartitionOp>) {
          json classes = json::array();
          for (const auto& [label, members] : o.partition.classes) {
            auto sorted = members;
            std::sort(sorted.begin(), sorted.end());
            classes.push_back(json::array({label, sorted}));
          }
          return json{{"partition", {{"dim", o.partition.dim}, {"classes", classes}}}};
        } else {
          json values = json::array();
          for (const auto& vs : o.selector.value_sets()) {
            auto sorted = vs.labels;
            std::sort(sorted.begin(), sorted.end());
            values.push_back(json::array({vs.dim, sorted}));
          }
          json tuples = json::array();
          for (const auto& ts : o.selector.tuple_sets()) {
            auto sorted = ts.tuples;
            std::sort(sorted.begin(), sorted.end());
            tuples.push_back(json::array({ts.dims, sorted}));
          }
          return json{{"filter", {{"values", values}, {"tuples", tuples}}}};
        }
      },
      op);
}

}  // namespace

std::string_view DimensionKindName(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::kCategorical:
      return "categorical";
    case DimensionKind::kDay:
      return "day";
    case DimensionKind::kHourOfDay:
      return "hour-of-day";
  }
  return "categorical";
}

DimensionKind ParseDimensionKind(std::string_view name) {
  if (name == "categorical") return DimensionKind::kCategorical;
  if (name == "day") return DimensionKind::kDay;
  if (name == "hour-of-day") return DimensionKind::kHourOfDay;
  throw std::invalid_argument("unknown dimension kind: " + std::string(name));
}

// ---------------------------------------------------------------------------
// DimensionSchema

DimensionSchema::DimensionSchema(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  if (dims_.size() > kMaxArity) {
    throw std::invalid_argument("schema has more than " + std::to_string(kMaxArity) +
                                " dimensions");
  }
  std::set<std::string_view> names;
  int days = 0;
  int hours = 0;
  for (const auto& d : dims_) {
    if (d.name.empty()) throw std::invalid_argument("dimension name is empty");
    if (!names.insert(d.name).second) {
      throw std::invalid_argument("duplicate dimension name: " + d.name);
    }
    days += d.kind == DimensionKind::kDay;
    hours += d.kind == DimensionKind::kHourOfDay;
  }
  if (days > 1) throw std::invalid_argument("schema has more than one day dimension");
  if (hours > 1) throw std::invalid_argument("schema has more than one hour-of-day dimension");
}

DimensionSchema DimensionSchema::Interactions() {
  return DimensionSchema({{std::string(kSpreaderDim), DimensionKind::kCategorical},
                          {std::string(kAuthorDim), DimensionKind::kCategorical},
                          {std::string(kDayDim), DimensionKind::kDay},
                          {std::string(kHourDim), DimensionKind::kHourOfDay}});
}

DimensionSchema DimensionSchema::HashtagInteractions() {
  return DimensionSchema({{std::string(kSpreaderDim), DimensionKind::kCategorical},
                          {std::string(kAuthorDim), DimensionKind::kCategorical},
                          {std::string(kHashtagDim), DimensionKind::kCategorical},
                          {std::string(kDayDim), DimensionKind::kDay},
                          {std::string(kHourDim), DimensionKind::kHourOfDay}});
}

std::optional<std::size_t> DimensionSchema::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t DimensionSchema::IndexOrThrow(std::string_view name) const {
  auto idx = IndexOf(name);
  if (!idx) throw std::invalid_argument("unknown dimension: " + std::string(name));
  return *idx;
}

// ---------------------------------------------------------------------------
// CellKey

CellKey::CellKey(std::span<const std::uint32_t> values) {
  if (values.size() > kMaxArity) throw std::invalid_argument("cell key arity too large");
  arity = static_cast<std::uint8_t>(values.size());
  std::copy(values.begin(), values.end(), ids.begin());
}

std::size_t CellKeyHash::operator()(const CellKey& key) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ key.arity;
  for (std::size_t i = 0; i < key.arity; ++i) {
    h ^= key.ids[i] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

// ---------------------------------------------------------------------------
// ValueDictionary

ValueDictionary::ValueDictionary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<std::uint32_t>(i)).second) {
      throw std::invalid_argument("duplicate dictionary label: " + labels_[i]);
    }
  }
}

DictionaryPtr ValueDictionary::Hours() {
  static const DictionaryPtr hours = [] {
    std::vector<std::string> labels;
    for (int h = 0; h < kHoursPerDay; ++h) labels.push_back(std::to_string(h));
    return std::make_shared<const ValueDictionary>(std::move(labels));
  }();
  return hours;
}

std::optional<std::uint32_t> ValueDictionary::Find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Selector

Selector& Selector::Keep(std::string dim, std::vector<std::string> labels) {
  if (labels.empty()) {
    throw std::invalid_argument("value-set selector on '" + dim + "' is empty");
  }
  value_sets_.push_back({std::move(dim), std::move(labels)});
  return *this;
}

Selector& Selector::KeepTuples(std::vector<std::string> dims,
                               std::vector<std::vector<std::string>> tuples) {
  if (dims.empty() || tuples.empty()) {
    throw std::invalid_argument("tuple selector is empty");
  }
  for (const auto& t : tuples) {
    if (t.size() != dims.size()) {
      throw std::invalid_argument("tuple selector arity mismatch");
    }
  }
  tuple_sets_.push_back({std::move(dims), std::move(tuples)});
  return *this;
}

std::string DescribeProvenance(const Provenance& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& op : trace) out.push_back(OpToJson(op));
  return out.dump();
}

// ---------------------------------------------------------------------------
// Cube

Cube::Cube() : impl_(std::make_shared<const Impl>()) {}

Cube Cube::FromParts(DimensionSchema schema, std::vector<DictionaryPtr> dictionaries,
                     std::vector<Cell> cells, Provenance provenance, bool cells_sorted) {
  if (dictionaries.size() != schema.size()) {
    throw std::logic_error("cube dictionaries do not match schema arity");
  }
  SortAndMerge(cells, cells_sorted);
  auto impl = std::make_shared<Impl>();
  impl->schema = std::move(schema);
  impl->dictionaries = std::move(dictionaries);
  impl->cells = std::move(cells);
  impl->provenance = std::move(provenance);
  for (const auto& c : impl->cells) {
    if (c.key.arity != impl->schema.size()) {
      throw std::logic_error("cell arity does not match schema arity");
    }
    impl->grand_total += c.count;
  }
  return Cube(std::move(impl));
}

std::uint64_t Cube::CellValue(const CellKey& key) const {
  const auto& cells = impl_->cells;
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const Cell& c, const CellKey& k) { return c.key < k; });
  if (it == cells.end() || it->key != key) return 0;
  return it->count;
}

std::optional<CellKey> Cube::KeyFor(std::span<const std::string> labels) const {
  if (labels.size() != schema().size()) {
    throw std::invalid_argument("coordinate arity " + std::to_string(labels.size()) +
                                " does not match schema arity " +
                                std::to_string(schema().size()));
  }
  CellKey key;
  key.arity = static_cast<std::uint8_t>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto id = dictionary(i).Find(labels[i]);
    if (!id) return std::nullopt;
    key[i] = *id;
  }
  return key;
}

std::uint64_t Cube::CellValue(std::span<const std::string> labels) const {
  auto key = KeyFor(labels);
  return key ? CellValue(*key) : 0;
}

std::uint64_t Cube::CellValue(std::initializer_list<std::string_view> labels) const {
  auto strings = ToStrings(labels);
  return CellValue(std::span<const std::string>(strings));
}

std::vector<std::string> Cube::Labels(const CellKey& key) const {
  std::vector<std::string> out;
  out.reserve(key.arity);
  for (std::size_t i = 0; i < key.arity; ++i) out.push_back(dictionary(i).label(key[i]));
  return out;
}

std::vector<std::uint32_t> Cube::ObservedValues(std::size_t dim) const {
  std::vector<bool> seen(dictionary(dim).size(), false);
  for (const auto& c : impl_->cells) seen[c.key[dim]] = true;
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < seen.size(); ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CubeBuilder

CubeBuilder::CubeBuilder(DimensionSchema schema)
    : schema_(std::move(schema)), interned_(schema_.size()), labels_(schema_.size()) {}

void CubeBuilder::Add(std::span<const std::string> values, std::uint64_t count) {
  std::array<std::string_view, kMaxArity> views;
  if (values.size() != schema_.size()) {
    throw std::invalid_argument("row arity " + std::to_string(values.size()) +
                                " does not match schema arity " +
                                std::to_string(schema_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) views[i] = values[i];
  AddInterned(std::span<const std::string_view>(views.data(), values.size()), count);
}

void CubeBuilder::Add(std::initializer_list<std::string_view> values, std::uint64_t count) {
  if (values.size() != schema_.size()) {
    throw std::invalid_argument("row arity " + std::to_string(values.size()) +
                                " does not match schema arity " +
                                std::to_string(schema_.size()));
  }
  AddInterned(std::span<const std::string_view>(values.begin(), values.size()), count);
}

void CubeBuilder::AddInterned(std::span<const std::string_view> values, std::uint64_t count) {
  if (count == 0) return;
  CellKey key;
  key.arity = static_cast<std::uint8_t>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (schema_[i].kind == DimensionKind::kHourOfDay) {
      auto hour = ParseHour(values[i]);
      if (!hour) {
        throw std::invalid_argument("hour-of-day value out of range: '" +
                                    std::string(values[i]) + "'");
      }
      key[i] = static_cast<std::uint32_t>(*hour);
      continue;
    }
    if (values[i].empty()) {
      throw std::invalid_argument("empty value for dimension '" + schema_[i].name + "'");
    }
    auto& table = interned_[i];
    auto it = table.find(values[i]);
    if (it == table.end()) {
      auto id = static_cast<std::uint32_t>(labels_[i].size());
      labels_[i].emplace_back(values[i]);
      it = table.emplace(labels_[i].back(), id).first;
    }
    key[i] = it->second;
  }
  pending_.push_back({key, count});
  if (pending_.size() >= std::max<std::size_t>(2 * merged_size_, 1 << 20)) {
    SortAndMerge(pending_, /*sorted=*/false);
    merged_size_ = pending_.size();
  }
}

Cube CubeBuilder::Build() && {
  const std::size_t arity = schema_.size();
  std::vector<DictionaryPtr> dictionaries(arity);
  std::vector<std::vector<std::uint32_t>> remap(arity);
  for (std::size_t i = 0; i < arity; ++i) {
    if (schema_[i].kind == DimensionKind::kHourOfDay) {
      dictionaries[i] = ValueDictionary::Hours();
      continue;
    }
    std::vector<std::uint32_t> order(labels_[i].size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return labels_[i][a] < labels_[i][b];
    });
    remap[i].resize(order.size());
    std::vector<std::string> sorted;
    sorted.reserve(order.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[i][order[rank]] = rank;
      sorted.push_back(std::move(labels_[i][order[rank]]));
    }
    dictionaries[i] = std::make_shared<const ValueDictionary>(std::move(sorted));
  }

  std::vector<Cube::Cell> cells = std::move(pending_);
  pending_.clear();
  merged_size_ = 0;
  for (auto& c : cells) {
    for (std::size_t i = 0; i < arity; ++i) {
      if (!remap[i].empty()) c.key[i] = remap[i][c.key[i]];
    }
  }
  return Cube::FromParts(std::move(schema_), std::move(dictionaries), std::move(cells), {},
                         /*cells_sorted=*/false);
}

// ---------------------------------------------------------------------------
// Operations

Cube Aggregate(const Cube& cube, std::span<const std::string> drop_dims) {
  const auto& schema = cube.schema();
  std::vector<bool> dropped(schema.size(), false);
  for (const auto& name : drop_dims) dropped[schema.IndexOrThrow(name)] = true;

  std::vector<std::size_t> kept;
  std::vector<Dimension> dims;
  std::vector<DictionaryPtr> dictionaries;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (dropped[i]) continue;
    kept.push_back(i);
    dims.push_back(schema[i]);
    dictionaries.push_back(cube.dictionary_ptr(i));
  }
  // Keeping a prefix of the dimensions preserves the lexicographic order.
  bool prefix = true;
  for (std::size_t j = 0; j < kept.size(); ++j) prefix = prefix && kept[j] == j;

  std::vector<Cube::Cell> cells;
  cells.reserve(cube.size());
  for (const auto& c : cube.cells()) {
    Cube::Cell out;
    out.key.arity = static_cast<std::uint8_t>(kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) out.key[j] = c.key[kept[j]];
    out.count = c.count;
    cells.push_back(out);
  }
  Provenance trace = cube.provenance();
  trace.push_back(AggregateOp{{drop_dims.begin(), drop_dims.end()}});
  return Cube::FromParts(DimensionSchema(std::move(dims)), std::move(dictionaries),
                         std::move(cells), std::move(trace), prefix);
}

Cube Aggregate(const Cube& cube, std::initializer_list<std::string_view> drop_dims) {
  auto dims = ToStrings(drop_dims);
  return Aggregate(cube, std::span<const std::string>(dims));
}

Cube KeepDims(const Cube& cube, std::span<const std::string> keep_dims) {
  std::vector<bool> keep(cube.schema().size(), false);
  for (const auto& name : keep_dims) keep[cube.schema().IndexOrThrow(name)] = true;
  std::vector<std::string> drop;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) drop.push_back(cube.schema()[i].name);
  }
  return Aggregate(cube, std::span<const std::string>(drop));
}

Cube KeepDims(const Cube& cube, std::initializer_list<std::string_view> keep_dims) {
  auto dims = ToStrings(keep_dims);
  return KeepDims(cube, std::span<const std::string>(dims));
}

Cube AggregatePartition(const Cube& cube, const Partition& partition) {
  const std::size_t dim = cube.schema().IndexOrThrow(partition.dim);
  const auto& dict = cube.dictionary(dim);

  constexpr std::uint32_t kUnassigned = UINT32_MAX;
  std::vector<std::uint32_t> class_of(dict.size(), kUnassigned);
  std::vector<std::string> class_labels;
  std::unordered_map<std::string, std::size_t> member_owner;
  for (std::size_t k = 0; k < partition.classes.size(); ++k) {
    const auto& [label, members] = partition.classes[k];
    class_labels.push_back(label);
    for (const auto& m : members) {
      auto [it, inserted] = member_owner.emplace(m, k);
      if (!inserted && it->second != k) {
        throw std::invalid_argument("partition classes '" +
                                    partition.classes[it->second].first + "' and '" + label +
                                    "' overlap on value '" + m + "'");
      }
      if (auto id = dict.Find(m)) class_of[*id] = static_cast<std::uint32_t>(k);
    }
  }
  // Rejects duplicate class labels.
  auto class_dict = std::make_shared<const ValueDictionary>(std::move(class_labels));

  for (std::uint32_t v : cube.ObservedValues(dim)) {
    if (class_of[v] == kUnassigned) {
      throw std::invalid_argument("observed value '" + dict.label(v) + "' of dimension '" +
                                  partition.dim + "' is not in any partition class");
    }
  }

  std::vector<Dimension> dims = cube.schema().dims();
  dims[dim].kind = DimensionKind::kCategorical;
  std::vector<DictionaryPtr> dictionaries = cube.dictionaries();
  dictionaries[dim] = std::move(class_dict);

  std::vector<Cube::Cell> cells(cube.cells().begin(), cube.cells().end());
  for (auto& c : cells) c.key[dim] = class_of[c.key[dim]];

  Provenance trace = cube.provenance();
  trace.push_back(PartitionOp{partition});
  return Cube::FromParts(DimensionSchema(std::move(dims)), std::move(dictionaries),
                         std::move(cells), std::move(trace), /*cells_sorted=*/false);
}

Cube Filter(const Cube& cube, const Selector& selector) {
  const auto& schema = cube.schema();

  struct ValueMask {
    std::size_t dim;
    std::vector<bool> allowed;
  };
  std::vector<ValueMask> masks;
  for (const auto& vs : selector.value_sets()) {
    ValueMask mask{schema.IndexOrThrow(vs.dim), {}};
    mask.allowed.assign(cube.dictionary(mask.dim).size(), false);
    for (const auto& label : vs.labels) {
      if (auto id = cube.dictionary(mask.dim).Find(label)) mask.allowed[*id] = true;
    }
    masks.push_back(std::move(mask));
  }

  struct TupleMask {
    std::vector<std::size_t> dims;
    // Values occurring in some allowed tuple, per tuple dimension.
    std::vector<std::vector<bool>> possible;
    std::unordered_set<CellKey, CellKeyHash> allowed;
  };
  std::vector<TupleMask> tuple_masks;
  for (const auto& ts : selector.tuple_sets()) {
    TupleMask mask;
    for (const auto& d : ts.dims) {
      mask.dims.push_back(schema.IndexOrThrow(d));
      mask.possible.emplace_back(cube.dictionary(mask.dims.back()).size(), false);
    }
    for (const auto& tuple : ts.tuples) {
      CellKey key;
      key.arity = static_cast<std::uint8_t>(tuple.size());
      bool known = true;
      for (std::size_t j = 0; j < tuple.size() && known; ++j) {
        auto id = cube.dictionary(mask.dims[j]).Find(tuple[j]);
        known = id.has_value();
        if (known) key[j] = *id;
      }
      if (!known) continue;
      mask.allowed.insert(key);
      for (std::size_t j = 0; j < tuple.size(); ++j) mask.possible[j][key[j]] = true;
    }
    tuple_masks.push_back(std::move(mask));
  }

  std::vector<Cube::Cell> cells;
  for (const auto& c : cube.cells()) {
    bool keep = true;
    for (const auto& m : masks) {
      if (!m.allowed[c.key[m.dim]]) {
        keep = false;
        break;
      }
    }
    for (std::size_t t = 0; keep && t < tuple_masks.size(); ++t) {
      const auto& m = tuple_masks[t];
      CellKey probe;
      probe.arity = static_cast<std::uint8_t>(m.dims.size());
      for (std::size_t j = 0; keep && j < m.dims.size(); ++j) {
        probe[j] = c.key[m.dims[j]];
        keep = m.possible[j][probe[j]];
      }
      keep = keep && m.allowed.contains(probe);
    }
    if (keep) cells.push_back(c);
  }
  Provenance trace = cube.provenance();
  trace.push_back(FilterOp{selector});
  return Cube::FromParts(schema, cube.dictionaries(), std::move(cells), std::move(trace),
                         /*cells_sorted=*/true);
}

Cube Apply(const Cube& cube, const CubeOp& op) {
  return std::visit(
      [&](const auto& o) -> Cube {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, AggregateOp>) {
          return Aggregate(cube, std::span<const std::string>(o.dims));
        } else if constexpr (std::is_same_v<T, PartitionOp>) {
          return AggregatePartition(cube, o.partition);
        } else {
          return Filter(cube, o.selector);
        }
      },
      op);
}

Cube Expand(const Cube& base, const Provenance& trace) {
  if (!base.is_base()) {
    throw std::invalid_argument("expand requires a base cuboid");
  }
  Cube current = base;
  for (const auto& op : trace) current = Apply(current, op);
  return current;
}

}  // namespace cubelens
