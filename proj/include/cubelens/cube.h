// Sparse data cubes over integer interaction counts.
//
// A cube maps coordinate tuples (one value per dimension) to positive counts;
// absent coordinates hold 0. Cubes are immutable once built. Every derived
// cube carries the list of operations that produced it from its base cuboid,
// so any cube can be re-materialized from the base (see Expand).
//
// Dimension values are interned to dense ids. Cubes derived from the same
// base share the per-dimension dictionaries, so coordinates are directly
// comparable between them without going through labels.

#ifndef CUBELENS_CUBE_H_
#define CUBELENS_CUBE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace cubelens {

// Raised when input data violates a contract (bad record, inconsistent cube).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSpreaderDim = "spreader";
inline constexpr std::string_view kAuthorDim = "author";
inline constexpr std::string_view kHashtagDim = "hashtag";
inline constexpr std::string_view kDayDim = "day";
inline constexpr std::string_view kHourDim = "hour";

inline constexpr int kHoursPerDay = 24;

enum class DimensionKind { kCategorical, kDay, kHourOfDay };

std::string_view DimensionKindName(DimensionKind kind);
DimensionKind ParseDimensionKind(std::string_view name);

struct Dimension {
  std::string name;
  DimensionKind kind = DimensionKind::kCategorical;

  bool operator==(const Dimension&) const = default;
};

// Ordered list of named dimensions. Names are unique; at most one day and one
// hour-of-day dimension.
class DimensionSchema {
 public:
  DimensionSchema() = default;
  explicit DimensionSchema(std::vector<Dimension> dims);

  // (spreader, author, day, hour)
  static DimensionSchema Interactions();
  // (spreader, author, hashtag, day, hour)
  static DimensionSchema HashtagInteractions();

  std::size_t size() const { return dims_.size(); }
  const Dimension& operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<Dimension>& dims() const { return dims_; }

  std::optional<std::size_t> IndexOf(std::string_view name) const;
  // Throws std::invalid_argument naming the unknown dimension.
  std::size_t IndexOrThrow(std::string_view name) const;
  bool Contains(std::string_view name) const { return IndexOf(name).has_value(); }

  bool operator==(const DimensionSchema&) const = default;

 private:
  std::vector<Dimension> dims_;
};

inline constexpr std::size_t kMaxArity = 6;

// Fixed-capacity coordinate of interned value ids.
struct CellKey {
  std::array<std::uint32_t, kMaxArity> ids{};
  std::uint8_t arity = 0;

  CellKey() = default;
  explicit CellKey(std::span<const std::uint32_t> values);

  std::uint32_t operator[](std::size_t i) const { return ids[i]; }
  std::uint32_t& operator[](std::size_t i) { return ids[i]; }
  std::size_t size() const { return arity; }

  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& key) const noexcept;
};

// Label <-> id mapping for one dimension. Immutable once shared by a cube.
class ValueDictionary {
 public:
  ValueDictionary() = default;
  explicit ValueDictionary(std::vector<std::string> labels);

  // Dictionary for hour-of-day values: id h has label "h" for h in 0..23.
  static std::shared_ptr<const ValueDictionary> Hours();

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::uint32_t> Find(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

using DictionaryPtr = std::shared_ptr<const ValueDictionary>;

// Groups the values of one dimension into named classes. Classes must be
// pairwise disjoint and cover every value observed in the cube they are
// applied to; values never observed need no class.
struct Partition {
  std::string dim;
  std::vector<std::pair<std::string, std::vector<std::string>>> classes;
};

// Per-dimension filter. Dimensions without a predicate are kept whole.
class Selector {
 public:
  Selector() = default;

  // Keeps cells whose value on `dim` is one of `labels`. `labels` must be
  // non-empty; labels unknown to the cube simply match nothing.
  Selector& Keep(std::string dim, std::vector<std::string> labels);

  // Keeps cells whose values on `dims` form one of `tuples`. Used for
  // non-rectangular selections such as a run of (day, hour) slots crossing
  // midnight.
  Selector& KeepTuples(std::vector<std::string> dims,
                       std::vector<std::vector<std::string>> tuples);

  struct ValueSet {
    std::string dim;
    std::vector<std::string> labels;
  };
  struct TupleSet {
    std::vector<std::string> dims;
    std::vector<std::vector<std::string>> tuples;
  };

  const std::vector<ValueSet>& value_sets() const { return value_sets_; }
  const std::vector<TupleSet>& tuple_sets() const { return tuple_sets_; }
  bool keeps_all() const { return value_sets_.empty() && tuple_sets_.empty(); }

 private:
  std::vector<ValueSet> value_sets_;
  std::vector<TupleSet> tuple_sets_;
};

struct AggregateOp {
  std::vector<std::string> dims;
};
struct PartitionOp {
  Partition partition;
};
struct FilterOp {
  Selector selector;
};
using CubeOp = std::variant<AggregateOp, PartitionOp, FilterOp>;

// Operations applied to a base cuboid, in order.
using Provenance = std::vector<CubeOp>;

// Canonical single-line rendering; equal traces render identically.
std::string DescribeProvenance(const Provenance& trace);

class Cube {
 public:
  struct Cell {
    CellKey key;
    std::uint64_t count = 0;
  };

  // Empty cube over an empty schema.
  Cube();

  const DimensionSchema& schema() const { return impl_->schema; }
  const ValueDictionary& dictionary(std::size_t dim) const {
    return *impl_->dictionaries[dim];
  }
  const DictionaryPtr& dictionary_ptr(std::size_t dim) const {
    return impl_->dictionaries[dim];
  }
  const std::vector<DictionaryPtr>& dictionaries() const {
    return impl_->dictionaries;
  }

  // Cells sorted by key; every count is > 0.
  std::span<const Cell> cells() const { return impl_->cells; }
  std::size_t size() const { return impl_->cells.size(); }
  bool empty() const { return impl_->cells.empty(); }

  const Provenance& provenance() const { return impl_->provenance; }
  bool is_base() const { return impl_->provenance.empty(); }

  std::uint64_t grand_total() const { return impl_->grand_total; }

  // Absent cells read as 0.
  std::uint64_t CellValue(const CellKey& key) const;
  // Lookup by labels. Unknown labels read as 0; throws std::invalid_argument
  // when the number of labels differs from the schema arity.
  std::uint64_t CellValue(std::span<const std::string> labels) const;
  std::uint64_t CellValue(std::initializer_list<std::string_view> labels) const;

  std::optional<CellKey> KeyFor(std::span<const std::string> labels) const;
  std::vector<std::string> Labels(const CellKey& key) const;

  // Sorted distinct ids that occur on `dim` among stored cells.
  std::vector<std::uint32_t> ObservedValues(std::size_t dim) const;

  // Builds a cube directly from cells. Used by the operations below; callers
  // normally go through CubeBuilder or the operations.
  static Cube FromParts(DimensionSchema schema,
                        std::vector<DictionaryPtr> dictionaries,
                        std::vector<Cell> cells, Provenance provenance,
                        bool cells_sorted);

 private:
  struct Impl {
    DimensionSchema schema;
    std::vector<DictionaryPtr> dictionaries;
    std::vector<Cell> cells;
    Provenance provenance;
    std::uint64_t grand_total = 0;
  };
  explicit Cube(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

// Accumulates rows into a base cuboid. Labels are interned per dimension and
// ids are assigned in sorted label order at Build() so the result does not
// depend on insertion order. Hour-of-day values must be integers 0..23.
class CubeBuilder {
 public:
  explicit CubeBuilder(DimensionSchema schema);

  void Add(std::span<const std::string> values, std::uint64_t count = 1);
  void Add(std::initializer_list<std::string_view> values,
           std::uint64_t count = 1);

  Cube Build() &&;

 private:
  void AddInterned(std::span<const std::string_view> values,
                   std::uint64_t count);

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  DimensionSchema schema_;
  std::vector<std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>>
      interned_;
  std::vector<std::vector<std::string>> labels_;
  // Rows keyed by insertion-order ids, merged whenever the buffer doubles.
  std::vector<Cube::Cell> pending_;
  std::size_t merged_size_ = 0;
};

// Sums counts over the dropped dimensions. Dropping every dimension yields the
// apex cuboid holding the grand total in its single cell.
Cube Aggregate(const Cube& cube, std::span<const std::string> drop_dims);
Cube Aggregate(const Cube& cube, std::initializer_list<std::string_view> drop_dims);

// Aggregates away every dimension not listed in `keep_dims`. The remaining
// dimensions keep their original order.
Cube KeepDims(const Cube& cube, std::span<const std::string> keep_dims);
Cube KeepDims(const Cube& cube, std::initializer_list<std::string_view> keep_dims);

// Replaces the values of partition.dim by class labels, summing member
// counts. The resulting dimension is categorical.
Cube AggregatePartition(const Cube& cube, const Partition& partition);

Cube Filter(const Cube& cube, const Selector& selector);

// Applies one recorded operation.
Cube Apply(const Cube& cube, const CubeOp& op);

// Re-materializes `trace` starting from a base cuboid. Adding a dimension
// back is done by replaying from the base rather than inverting aggregation.
Cube Expand(const Cube& base, const Provenance& trace);

}  // namespace cubelens

#endif  // CUBELENS_CUBE_H_
