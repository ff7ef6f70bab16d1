#include "cubelens/estimator.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <numeric>
#include <optional>

namespace cubelens {

namespace {

constexpr std::int64_t kNoValue = -1;

std::int64_t CheckedNarrow(__int128 value) {
  if (value > std::numeric_limits<std::int64_t>::max()) {
    throw std::overflow_error("rational constant overflows 64 bits");
  }
  return static_cast<std::int64_t>(value);
}

// Reads one observed coordinate into one comparison cube coordinate.
struct ResolvedTerm {
  const EstimatorTerm* term = nullptr;
  struct Slot {
    bool fixed = false;
    std::size_t source = 0;                // observed dim for copies
    std::int64_t fixed_id = kNoValue;      // comparison id for fixed slots
    std::vector<std::int64_t> translate;   // observed id -> comparison id; empty = identity
    std::vector<std::int64_t> reverse;     // comparison id -> observed id; empty = identity
  };
  std::vector<Slot> slots;
  bool never_matches = false;  // a fixed label is unknown to the comparison cube

  std::uint64_t Lookup(const CellKey& observed_key) const {
    if (never_matches) return 0;
    CellKey key;
    key.arity = static_cast<std::uint8_t>(slots.size());
    for (std::size_t j = 0; j < slots.size(); ++j) {
      const Slot& s = slots[j];
      if (s.fixed) {
        key[j] = static_cast<std::uint32_t>(s.fixed_id);
        continue;
      }
      std::uint32_t id = observed_key[s.source];
      if (!s.translate.empty()) {
        std::int64_t mapped = id < s.translate.size() ? s.translate[id] : kNoValue;
        if (mapped == kNoValue) return 0;
        id = static_cast<std::uint32_t>(mapped);
      }
      key[j] = id;
    }
    return term->cube.CellValue(key);
  }
};

ResolvedTerm Resolve(const Cube& observed, const EstimatorTerm& term) {
  if (term.exponent != 1 && term.exponent != -1) {
    throw std::invalid_argument("estimator term exponent must be +1 or -1");
  }
  const auto& entries = term.projection.entries();
  if (entries.size() != term.cube.schema().size()) {
    throw std::invalid_argument("projection assigns " + std::to_string(entries.size()) +
                                " dimensions but the comparison cube has " +
                                std::to_string(term.cube.schema().size()));
  }
  ResolvedTerm resolved;
  resolved.term = &term;
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const auto& e = entries[j];
    ResolvedTerm::Slot slot;
    const auto& target_dict = term.cube.dictionary(j);
    if (e.kind == CoordinateProjection::Entry::Kind::kFixed) {
      slot.fixed = true;
      auto id = target_dict.Find(e.fixed_label);
      if (id) {
        slot.fixed_id = *id;
      } else {
        resolved.never_matches = true;
      }
    } else {
      auto source = observed.schema().IndexOf(e.source_dim);
      if (!source) {
        throw std::invalid_argument("projection references unknown dimension '" +
                                    e.source_dim + "'");
      }
      slot.source = *source;
      const auto& source_dict = observed.dictionary(*source);
      if (observed.dictionary_ptr(*source) != term.cube.dictionary_ptr(j)) {
        slot.translate.assign(source_dict.size(), kNoValue);
        slot.reverse.assign(target_dict.size(), kNoValue);
        for (std::uint32_t id = 0; id < source_dict.size(); ++id) {
          if (auto t = target_dict.Find(source_dict.label(id))) {
            slot.translate[id] = *t;
            slot.reverse[*t] = id;
          }
        }
      }
    }
    resolved.slots.push_back(std::move(slot));
  }
  return resolved;
}

// Appends every combination of the free dimensions to `partial`.
void ExpandFree(const std::vector<std::vector<std::uint32_t>>& domains,
                const std::vector<bool>& bound, CellKey partial, std::size_t dim,
                std::vector<CellKey>& out) {
  if (dim == partial.arity) {
    out.push_back(partial);
    return;
  }
  if (bound[dim]) {
    ExpandFree(domains, bound, partial, dim + 1, out);
    return;
  }
  for (std::uint32_t v : domains[dim]) {
    partial[dim] = v;
    ExpandFree(domains, bound, partial, dim + 1, out);
  }
}

std::vector<CellKey> EnumerateCells(const Cube& observed,
                                    const std::vector<ResolvedTerm>& terms,
                                    EnumerationPolicy policy) {
  const std::size_t arity = observed.schema().size();
  std::vector<CellKey> keys;
  keys.reserve(observed.size());
  for (const auto& c : observed.cells()) keys.push_back(c.key);

  std::vector<std::vector<std::uint32_t>> domains(arity);
  for (std::size_t i = 0; i < arity; ++i) domains[i] = DimensionDomain(observed, i);

  if (policy == EnumerationPolicy::kFullDomain) {
    keys.clear();
    CellKey partial;
    partial.arity = static_cast<std::uint8_t>(arity);
    ExpandFree(domains, std::vector<bool>(arity, false), partial, 0, keys);
    return keys;
  }
  if (policy == EnumerationPolicy::kSupportUnionFirstTerm) {
    const ResolvedTerm* first = nullptr;
    for (const auto& t : terms) {
      if (t.term->exponent == 1) {
        first = &t;
        break;
      }
    }
    if (first != nullptr && !first->never_matches) {
      std::vector<bool> bound(arity, false);
      for (const auto& s : first->slots) {
        if (!s.fixed) bound[s.source] = true;
      }
      for (const auto& c : first->term->cube.cells()) {
        CellKey partial;
        partial.arity = static_cast<std::uint8_t>(arity);
        std::vector<bool> assigned(arity, false);
        bool ok = true;
        for (std::size_t j = 0; j < first->slots.size() && ok; ++j) {
          const auto& s = first->slots[j];
          if (s.fixed) {
            ok = c.key[j] == static_cast<std::uint32_t>(s.fixed_id);
            continue;
          }
          std::int64_t id = c.key[j];
          if (!s.reverse.empty()) id = s.reverse[c.key[j]];
          if (id == kNoValue) {
            ok = false;
            continue;
          }
          auto v = static_cast<std::uint32_t>(id);
          if (assigned[s.source] && partial[s.source] != v) ok = false;
          assigned[s.source] = true;
          partial[s.source] = v;
        }
        if (ok) ExpandFree(domains, bound, partial, 0, keys);
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::size_t DomainSize(const Cube& cube, std::span<const std::string> dims) {
  std::size_t size = 1;
  for (const auto& d : dims) size *= DimensionDomain(cube, cube.schema().IndexOrThrow(d)).size();
  return size;
}

}  // namespace

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) {
    throw std::invalid_argument("estimator constant must be a positive rational");
  }
  std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::operator*(const Rational& other) const {
  __int128 num = static_cast<__int128>(num_) * other.num_;
  __int128 den = static_cast<__int128>(den_) * other.den_;
  __int128 a = num;
  __int128 b = den;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return Rational(CheckedNarrow(num / a), CheckedNarrow(den / a));
}

Rational Rational::Parse(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("malformed number '" + std::string(text) + "'");
    }
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 15) throw std::invalid_argument("too many decimals in '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t w = whole.empty() ? 0 : parse_int(whole);
    std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    return Rational(CheckedNarrow(static_cast<__int128>(w) * scale + f), scale);
  }
  return Rational(parse_int(text), 1);
}

// ---------------------------------------------------------------------------
// CoordinateProjection

CoordinateProjection CoordinateProjection::SameNames(const Cube& comparison) {
  CoordinateProjection p;
  for (const auto& d : comparison.schema().dims()) p.Copy(d.name);
  return p;
}

CoordinateProjection& CoordinateProjection::Copy(std::string source_dim) {
  entries_.push_back({Entry::Kind::kCopy, std::move(source_dim), {}});
  return *this;
}

CoordinateProjection& CoordinateProjection::Fix(std::string label) {
  entries_.push_back({Entry::Kind::kFixed, {}, std::move(label)});
  return *this;
}

std::string_view EnumerationPolicyName(EnumerationPolicy policy) {
  switch (policy) {
    case EnumerationPolicy::kObservedOnly:
      return "observed-only";
    case EnumerationPolicy::kSupportUnionFirstTerm:
      return "support-union-first-term";
    case EnumerationPolicy::kFullDomain:
      return "full-domain";
  }
  return "";
}

std::vector<std::uint32_t> DimensionDomain(const Cube& cube, std::size_t dim) {
  if (cube.schema()[dim].kind == DimensionKind::kHourOfDay &&
      cube.dictionary_ptr(dim) == ValueDictionary::Hours()) {
    std::vector<std::uint32_t> hours(kHoursPerDay);
    std::iota(hours.begin(), hours.end(), 0);
    return hours;
  }
  return cube.ObservedValues(dim);
}

// ---------------------------------------------------------------------------
// Evaluation

ExpectedField ExpectedRatioProduct(const Cube& observed, const EstimatorSpec& spec,
                                   EnumerationPolicy policy) {
  if (spec.terms.empty()) throw std::invalid_argument("estimator has no terms");
  std::vector<ResolvedTerm> terms;
  terms.reserve(spec.terms.size());
  for (const auto& t : spec.terms) terms.push_back(Resolve(observed, t));

  ExpectedField field;
  field.observed = observed;
  field.policy = policy;
  const auto keys = EnumerateCells(observed, terms, policy);
  field.cells.reserve(keys.size());

  const auto obs_cells = observed.cells();
  std::size_t cursor = 0;
  const long double constant = static_cast<long double>(spec.constant.num()) /
                               static_cast<long double>(spec.constant.den());
  for (const auto& key : keys) {
    ExpectedCell cell;
    cell.key = key;
    while (cursor < obs_cells.size() && obs_cells[cursor].key < key) ++cursor;
    if (cursor < obs_cells.size() && obs_cells[cursor].key == key) {
      cell.observed = obs_cells[cursor].count;
    }
    long double numerator = constant;
    long double denominator = 1.0L;
    for (const auto& t : terms) {
      const auto value = static_cast<long double>(t.Lookup(key));
      if (t.term->exponent == 1) {
        numerator *= value;
      } else {
        denominator *= value;
      }
    }
    if (denominator == 0.0L) {
      cell.unsupported = true;
      cell.expected = 0.0;
      if (cell.observed > 0) ++field.inconsistent_cells;
    } else {
      cell.expected = static_cast<double>(numerator / denominator);
    }
    field.cells.push_back(cell);
  }
  return field;
}

EstimatorSpec CompileBasic(const Cube& observed) {
  if (observed.empty()) {
    throw std::invalid_argument("basic context needs a non-empty cube");
  }
  std::size_t domain = 1;
  for (std::size_t i = 0; i < observed.schema().size(); ++i) {
    domain *= DimensionDomain(observed, i).size();
  }
  std::vector<std::string> all;
  for (const auto& d : observed.schema().dims()) all.push_back(d.name);
  EstimatorSpec spec;
  spec.constant = Rational(1, static_cast<std::int64_t>(domain));
  spec.terms.push_back({Aggregate(observed, std::span<const std::string>(all)), {}, 1});
  return spec;
}

ExpectedField ExpectedBasic(const Cube& observed) {
  return ExpectedRatioProduct(observed, CompileBasic(observed), EnumerationPolicy::kFullDomain);
}

EstimatorSpec CompileAggregative(const Cube& observed, std::span<const std::string> agg_dims) {
  if (agg_dims.empty()) {
    throw std::invalid_argument("aggregative context needs at least one aggregated dimension");
  }
  std::vector<bool> seen(observed.schema().size(), false);
  for (const auto& d : agg_dims) seen[observed.schema().IndexOrThrow(d)] = true;
  if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw std::invalid_argument(
        "aggregating every dimension is the basic context; use ExpectedBasic");
  }
  if (observed.empty()) {
    throw std::invalid_argument("aggregative context needs a non-empty cube");
  }
  EstimatorSpec spec;
  spec.constant = Rational(1, static_cast<std::int64_t>(DomainSize(observed, agg_dims)));
  Cube parent = Aggregate(observed, agg_dims);
  auto projection = CoordinateProjection::SameNames(parent);
  spec.terms.push_back({std::move(parent), std::move(projection), 1});
  return spec;
}

ExpectedField ExpectedAggregative(const Cube& observed, std::span<const std::string> agg_dims) {
  return ExpectedRatioProduct(observed, CompileAggregative(observed, agg_dims),
                              EnumerationPolicy::kSupportUnionFirstTerm);
}

// ---------------------------------------------------------------------------
// Text form

namespace {

struct Token {
  enum class Kind { kWord, kPunct, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
};

std::vector<Token> Tokenize(std::string_view text) {
  constexpr std::string_view kPunct = "*/(),=|@";
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (kPunct.find(c) != std::string_view::npos) {
      tokens.push_back({Token::Kind::kPunct, std::string(1, c)});
      ++i;
    } else if (c == '"') {
      std::size_t end = text.find('"', i + 1);
      if (end == std::string_view::npos) {
        throw std::invalid_argument("malformed estimator: unterminated quote");
      }
      tokens.push_back({Token::Kind::kWord, std::string(text.substr(i + 1, end - i - 1))});
      i = end + 1;
    } else {
      std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             kPunct.find(text[i]) == std::string_view::npos && text[i] != '"') {
        ++i;
      }
      tokens.push_back({Token::Kind::kWord, std::string(text.substr(start, i - start))});
    }
  }
  tokens.push_back({Token::Kind::kEnd, {}});
  return tokens;
}

class EstimatorParser {
 public:
  EstimatorParser(std::string_view text, const Cube& observed, const NamedCubes& named)
      : tokens_(Tokenize(text)), observed_(observed), named_(named) {}

  EstimatorSpec Parse() {
    if (Peek().kind == Token::Kind::kWord && Peek().text == "expect" &&
        tokens_.size() > 2 && tokens_[1].text == "=") {
      pos_ += 2;
    }
    EstimatorSpec spec;
    ParseFactor(spec, 1);
    while (Peek().kind == Token::Kind::kPunct && (Peek().text == "*" || Peek().text == "/")) {
      int exponent = Next().text == "*" ? 1 : -1;
      ParseFactor(spec, exponent);
    }
    if (Peek().kind != Token::Kind::kEnd) Fail("unexpected '" + Peek().text + "'");
    if (spec.terms.empty()) Fail("at least one cube term is required");
    return spec;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw std::invalid_argument("malformed estimator: " + what);
  }
  const Token& Peek() const { return tokens_[pos_]; }
  const Token& Next() { return tokens_[pos_++]; }
  void Expect(std::string_view punct) {
    if (Peek().kind != Token::Kind::kPunct || Peek().text != punct) {
      Fail("expected '" + std::string(punct) + "'");
    }
    ++pos_;
  }
  std::string Word() {
    if (Peek().kind != Token::Kind::kWord) Fail("expected a name");
    return Next().text;
  }

  void ParseFactor(EstimatorSpec& spec, int exponent) {
    const Token& t = Peek();
    if (t.kind == Token::Kind::kPunct && t.text == "|") {
      ++pos_;
      std::string dim = Word();
      Expect("|");
      auto idx = observed_.schema().IndexOf(dim);
      if (!idx) Fail("unknown dimension '" + dim + "'");
      auto size = static_cast<std::int64_t>(DimensionDomain(observed_, *idx).size());
      if (size == 0) Fail("dimension '" + dim + "' has an empty domain");
      Rational r(size);
      spec.constant = spec.constant * (exponent == 1 ? r : r.Inverse());
      return;
    }
    if (t.kind != Token::Kind::kWord) Fail("expected a factor");
    if (t.text == "cube") {
      ++pos_;
      spec.terms.push_back(ParseCube(exponent));
      return;
    }
    Rational r;
    try {
      r = Rational::Parse(t.text);
    } catch (const std::invalid_argument&) {
      Fail("unexpected '" + t.text + "'");
    }
    ++pos_;
    spec.constant = spec.constant * (exponent == 1 ? r : r.Inverse());
  }

  EstimatorTerm ParseCube(int exponent) {
    const Cube* source = &observed_;
    if (Peek().kind == Token::Kind::kPunct && Peek().text == "@") {
      ++pos_;
      std::string name = Word();
      auto it = named_.find(name);
      if (it == named_.end()) Fail("unknown cube '" + name + "'");
      source = &it->second;
    }
    Expect("(");
    std::vector<std::pair<std::string, std::optional<std::string>>> args;
    if (!(Peek().kind == Token::Kind::kPunct && Peek().text == ")")) {
      while (true) {
        std::string dim = Word();
        std::optional<std::string> fixed;
        if (Peek().kind == Token::Kind::kPunct && Peek().text == "=") {
          ++pos_;
          fixed = Word();
        }
        args.emplace_back(std::move(dim), std::move(fixed));
        if (Peek().kind == Token::Kind::kPunct && Peek().text == ",") {
          ++pos_;
          continue;
        }
        break;
      }
    }
    Expect(")");

    std::vector<std::string> keep;
    for (const auto& [dim, fixed] : args) {
      if (!source->schema().Contains(dim)) Fail("unknown dimension '" + dim + "'");
      if (std::find(keep.begin(), keep.end(), dim) != keep.end()) {
        Fail("dimension '" + dim + "' listed twice");
      }
      keep.push_back(dim);
    }
    Cube comparison = KeepDims(*source, std::span<const std::string>(keep));
    CoordinateProjection projection;
    for (const auto& d : comparison.schema().dims()) {
      auto it = std::find_if(args.begin(), args.end(),
                             [&](const auto& a) { return a.first == d.name; });
      if (it->second) {
        projection.Fix(*it->second);
      } else {
        if (!observed_.schema().Contains(d.name)) {
          Fail("dimension '" + d.name + "' is not in the observed cube; fix it with '" +
               d.name + "=label'");
        }
        projection.Copy(d.name);
      }
    }
    return {std::move(comparison), std::move(projection), exponent};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Cube& observed_;
  const NamedCubes& named_;
};

}  // namespace

EstimatorSpec ParseEstimator(std::string_view text, const Cube& observed,
                             const NamedCubes& named) {
  return EstimatorParser(text, observed, named).Parse();
}

}  // namespace cubelens
