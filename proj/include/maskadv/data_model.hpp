#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace maskadv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Full-string numeric parse; rejects non-finite values so domains with
// "nan"/"inf" tokens fall back to lexicographic ordering.
std::optional<double> parse_number(std::string_view s);

struct TransparentHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// Ordered set of distinct discrete values an attribute takes. The canonical
// order -- numeric ascending when every value parses as a number, otherwise
// lexicographic -- makes every structure built from a domain reproducible.
class AttributeDomain {
 public:
  AttributeDomain() = default;

  // Canonicalizes: sorts (numeric or lexicographic), removes duplicates.
  static AttributeDomain from_values(std::string name,
                                     std::vector<std::string> values);

  // Trusts the given order; used for derived domains (masked values, file
  // round trips) whose order is already fixed.
  static AttributeDomain from_ordered(std::string name,
                                      std::vector<std::string> values);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& values() const { return values_; }
  Index size() const { return static_cast<Index>(values_.size()); }
  const std::string& value(Index i) const { return values_[static_cast<std::size_t>(i)]; }
  bool numeric() const { return numeric_; }

  std::optional<Index> index_of(std::string_view v) const;
  bool same_values(const AttributeDomain& other) const {
    return values_ == other.values_;
  }

 private:
  void build_index();

  std::string name_;
  std::vector<std::string> values_;
  std::unordered_map<std::string, Index, TransparentHash, std::equal_to<>> index_;
  bool numeric_ = false;
};

// 1D frequency histogram over a domain. Counts are integral by contract
// even though they are stored as doubles for Eigen interop.
struct MarginalDistribution {
  AttributeDomain domain;
  Vector counts;        // aligned with domain.values()
  std::int64_t total = 0;

  static MarginalDistribution make(AttributeDomain domain, Vector counts);
  double count_of(std::string_view value) const;
};

// Dense attribute x label contingency table. Cells are real-valued: IPF
// produces fractional intermediates; an integral table is the special case
// where every cell is whole.
struct JointDistribution {
  AttributeDomain row_domain;
  AttributeDomain col_domain;
  Matrix cells;         // row_domain.size() x col_domain.size(), all >= 0
  double total = 0.0;

  static JointDistribution make(AttributeDomain rows, AttributeDomain cols,
                                Matrix cells, double total);

  double cell(std::string_view row_value, std::string_view col_value) const;
  Vector row_sums() const { return cells.rowwise().sum(); }
  Vector col_sums() const { return cells.colwise().sum().transpose(); }
  bool integral(double tol = 1e-9) const;
};

struct LoadOptions {
  // Equal-width binning applied to all-numeric feature columns when set.
  // Values become "[lo,hi)" tokens; discretization is never implicit.
  std::optional<int> bins;
};

// Immutable tabular dataset. Storage is columnar and dictionary-encoded:
// per attribute a canonical observed-value domain plus one code per row.
class Dataset {
 public:
  Index row_count() const { return n_rows_; }
  Index attribute_count() const { return static_cast<Index>(attributes_.size()); }
  const std::vector<std::string>& attribute_names() const { return attribute_names_; }
  const std::string& label_name() const { return label_name_; }

  Index attribute_index(std::string_view name) const;  // throws on unknown
  const AttributeDomain& attribute_domain(Index a) const { return attributes_[static_cast<std::size_t>(a)].domain; }
  const AttributeDomain& label_domain() const { return label_.domain; }

  std::span<const std::uint32_t> codes(Index a) const {
    return attributes_[static_cast<std::size_t>(a)].codes;
  }
  std::span<const std::uint32_t> label_codes() const { return label_.codes; }

  const std::string& value(Index row, Index a) const {
    const Column& c = attributes_[static_cast<std::size_t>(a)];
    return c.domain.value(static_cast<Index>(c.codes[static_cast<std::size_t>(row)]));
  }
  const std::string& label_value(Index row) const {
    return label_.domain.value(static_cast<Index>(label_.codes[static_cast<std::size_t>(row)]));
  }

  // Builds a dataset from raw string columns (observed-value domains are
  // derived and codes canonicalized).
  static Dataset from_columns(std::vector<std::string> attribute_names,
                              std::string label_name,
                              const std::vector<std::vector<std::string>>& columns,
                              const std::vector<std::string>& labels);

  // Pre-encoded variant for generated data: per column a candidate value
  // table plus one code per row. Unobserved candidates are dropped so the
  // domain stays observed-values-only.
  struct EncodedColumn {
    std::vector<std::string> values;
    std::vector<std::uint32_t> codes;
  };
  static Dataset from_encoded(std::vector<std::string> attribute_names,
                              std::string label_name,
                              std::vector<EncodedColumn> columns, EncodedColumn label);

 private:
  struct Column {
    AttributeDomain domain;
    std::vector<std::uint32_t> codes;
  };

  friend Dataset load_dataset(std::istream&, const std::string&, const LoadOptions&);

  std::vector<std::string> attribute_names_;
  std::string label_name_;
  std::vector<Column> attributes_;
  Column label_;
  Index n_rows_ = 0;
};

// Parses an RFC-4180-style CSV with a header row. Attribute order follows
// the header (minus the label column); values are kept as trimmed strings,
// the empty token "" included.
Dataset load_dataset(std::istream& source, const std::string& label_name,
                     const LoadOptions& options = {});

// Frequency histogram of one column (a feature or the label).
MarginalDistribution marginal(const Dataset& d, std::string_view attribute);

// Attribute x label contingency table with integral cells.
JointDistribution joint(const Dataset& d, std::string_view attribute);

// Shortest round-trip decimal rendering ("30", "0.5", "1e+22").
std::string format_number(double v);

}  // namespace maskadv
