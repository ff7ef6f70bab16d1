// Expected-value models for an observed cube.
//
// Every model is a constant times a product of comparison-cube lookups, each
// raised to +1 or -1:
//
//   expected(x) = constant * prod_i comparison_i[project_i(x)] ^ exponent_i
//
// The basic context (apex / |X|), the aggregative context (parent / |Y|) and
// the multi-aggregative products all compile to this form.

#ifndef CUBELENS_ESTIMATOR_H_
#define CUBELENS_ESTIMATOR_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cubelens/cube.h"

namespace cubelens {

// Positive rational kept in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  // Parses "3", "0.25", "7/2". Rejects non-positive values.
  static Rational Parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double ToDouble() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator*(const Rational& other) const;
  Rational Inverse() const { return Rational(den_, num_); }

  bool operator==(const Rational&) const = default;

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

// Maps an observed-cube coordinate to a comparison-cube coordinate. One entry
// per comparison dimension, in comparison schema order.
class CoordinateProjection {
 public:
  struct Entry {
    enum class Kind { kCopy, kFixed };
    Kind kind = Kind::kCopy;
    std::string source_dim;   // kCopy: observed dimension to read
    std::string fixed_label;  // kFixed: comparison value to use
  };

  CoordinateProjection() = default;
  explicit CoordinateProjection(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  // Copies every comparison dimension from the observed dimension with the
  // same name.
  static CoordinateProjection SameNames(const Cube& comparison);

  CoordinateProjection& Copy(std::string source_dim);
  CoordinateProjection& Fix(std::string label);

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

struct EstimatorTerm {
  Cube cube;
  CoordinateProjection projection;
  int exponent = 1;  // +1 or -1
};

struct EstimatorSpec {
  Rational constant;
  std::vector<EstimatorTerm> terms;
};

// Which observed-space cells receive an expected value.
enum class EnumerationPolicy {
  // Cells stored in the observed cube only.
  kObservedOnly,
  // Observed support plus every cell the first +1 term gives a non-zero value;
  // dimensions that term does not read range over their domain.
  kSupportUnionFirstTerm,
  // Full product of the dimension domains.
  kFullDomain,
};

std::string_view EnumerationPolicyName(EnumerationPolicy policy);

struct ExpectedCell {
  CellKey key;
  std::uint64_t observed = 0;
  double expected = 0.0;
  // A denominator term read 0; expected is reported as 0.
  bool unsupported = false;
};

struct ExpectedField {
  Cube observed;
  std::vector<ExpectedCell> cells;  // sorted by key
  EnumerationPolicy policy = EnumerationPolicy::kSupportUnionFirstTerm;
  // Unsupported cells that nevertheless hold observations. Impossible when
  // every comparison cube aggregates the observed data; non-zero indicates an
  // inconsistent specification.
  std::size_t inconsistent_cells = 0;
};

// Domain of one observed dimension: all 24 hours for an hour-of-day dimension
// with the standard dictionary, otherwise the values stored in the cube.
std::vector<std::uint32_t> DimensionDomain(const Cube& cube, std::size_t dim);

// Uniform spread of the grand total over the full cell domain X:
// expected = total / |X|.
ExpectedField ExpectedBasic(const Cube& observed);

// Spreads each parent cell of the cube aggregated over `agg_dims` uniformly
// over the domain of those dimensions: expected(x', y) = parent(x') / |Y|.
// `agg_dims` must be non-empty and a strict subset of the schema.
ExpectedField ExpectedAggregative(const Cube& observed, std::span<const std::string> agg_dims);

ExpectedField ExpectedRatioProduct(
    const Cube& observed, const EstimatorSpec& spec,
    EnumerationPolicy policy = EnumerationPolicy::kSupportUnionFirstTerm);

EstimatorSpec CompileBasic(const Cube& observed);
EstimatorSpec CompileAggregative(const Cube& observed, std::span<const std::string> agg_dims);

// ---------------------------------------------------------------------------
// Text form (grammar in docs/estimator.md):
//
//   spec   := [ "expect" "=" ] factor { ("*" | "/") factor }
//   factor := cube | number | "|" dim "|"
//   cube   := "cube" [ "@" name ] "(" [ arg { "," arg } ] ")"
//   arg    := dim | dim "=" label
//
// cube(d1, d2) is the source cube (the observed cube, or the named cube after
// "@") aggregated onto d1, d2; a "dim=label" argument keeps dim but reads it
// at the fixed label. Numbers and |dim| domain sizes fold into the constant.
// Example: expect = cube(day) * cube(hour) / cube()

using NamedCubes = std::map<std::string, Cube, std::less<>>;

EstimatorSpec ParseEstimator(std::string_view text, const Cube& observed,
                             const NamedCubes& named = {});

}  // namespace cubelens

#endif  // CUBELENS_ESTIMATOR_H_
