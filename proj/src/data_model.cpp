#include "maskadv/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <stdexcept>

#include "maskadv/csv.hpp"

namespace maskadv {

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

AttributeDomain AttributeDomain::from_values(std::string name,
                                             std::vector<std::string> values) {
  if (values.empty())
    throw std::invalid_argument("domain of '" + name + "' is empty");

  bool numeric = std::all_of(values.begin(), values.end(), [](const std::string& v) {
    return parse_number(v).has_value();
  });
  if (numeric) {
    std::sort(values.begin(), values.end(),
              [](const std::string& a, const std::string& b) {
                double na = *parse_number(a), nb = *parse_number(b);
                if (na != nb) return na < nb;
                return a < b;  // stable tie-break for equal numbers
              });
  } else {
    std::sort(values.begin(), values.end());
  }
  values.erase(std::unique(values.begin(), values.end()), values.end());

  AttributeDomain d;
  d.name_ = std::move(name);
  d.values_ = std::move(values);
  d.numeric_ = numeric;
  d.build_index();
  return d;
}

AttributeDomain AttributeDomain::from_ordered(std::string name,
                                              std::vector<std::string> values) {
  if (values.empty())
    throw std::invalid_argument("domain of '" + name + "' is empty");
  AttributeDomain d;
  d.name_ = std::move(name);
  d.values_ = std::move(values);
  d.numeric_ = std::all_of(d.values_.begin(), d.values_.end(), [](const std::string& v) {
    return parse_number(v).has_value();
  });
  d.build_index();
  if (d.index_.size() != d.values_.size())
    throw std::invalid_argument("domain of '" + d.name_ + "' has duplicate values");
  return d;
}

void AttributeDomain::build_index() {
  index_.clear();
  index_.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    index_.emplace(values_[i], static_cast<Index>(i));
}

std::optional<Index> AttributeDomain::index_of(std::string_view v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

MarginalDistribution MarginalDistribution::make(AttributeDomain domain, Vector counts) {
  if (counts.size() != domain.size())
    throw std::invalid_argument("marginal counts do not match domain size");
  double sum = 0;
  for (Index i = 0; i < counts.size(); ++i) {
    double c = counts[i];
    if (c < 0 || std::abs(c - std::round(c)) > 1e-9)
      throw std::invalid_argument("marginal count for '" + domain.value(i) +
                                  "' is not a non-negative integer");
    sum += c;
  }
  MarginalDistribution m;
  m.domain = std::move(domain);
  m.counts = std::move(counts);
  m.total = static_cast<std::int64_t>(std::llround(sum));
  return m;
}

double MarginalDistribution::count_of(std::string_view value) const {
  auto idx = domain.index_of(value);
  return idx ? counts[*idx] : 0.0;
}

JointDistribution JointDistribution::make(AttributeDomain rows, AttributeDomain cols,
                                          Matrix cells, double total) {
  if (cells.rows() != rows.size() || cells.cols() != cols.size())
    throw std::invalid_argument("joint cells do not match domain sizes");
  if ((cells.array() < 0).any())
    throw std::invalid_argument("joint distribution has a negative cell");
  double sum = cells.sum();
  if (std::abs(sum - total) > 1e-6 * std::max(1.0, std::abs(total)))
    throw std::invalid_argument("joint cell sum " + format_number(sum) +
                                " does not match total " + format_number(total));
  JointDistribution j;
  j.row_domain = std::move(rows);
  j.col_domain = std::move(cols);
  j.cells = std::move(cells);
  j.total = total;
  return j;
}

double JointDistribution::cell(std::string_view row_value, std::string_view col_value) const {
  auto r = row_domain.index_of(row_value);
  auto c = col_domain.index_of(col_value);
  if (!r || !c)
    throw std::out_of_range("cell (" + std::string(row_value) + ", " +
                            std::string(col_value) + ") not in joint domain");
  return cells(*r, *c);
}

bool JointDistribution::integral(double tol) const {
  for (Index i = 0; i < cells.rows(); ++i)
    for (Index j = 0; j < cells.cols(); ++j)
      if (std::abs(cells(i, j) - std::round(cells(i, j))) > tol) return false;
  return true;
}

namespace {

// First-seen dictionary encoding of one raw column.
struct Encoded {
  std::vector<std::string> seen;
  std::vector<std::uint32_t> codes;
};

void encode_value(Encoded& e, std::unordered_map<std::string, std::uint32_t>& dict,
                  const std::string& v) {
  auto [it, inserted] = dict.emplace(v, static_cast<std::uint32_t>(e.seen.size()));
  if (inserted) e.seen.push_back(v);
  e.codes.push_back(it->second);
}

// Re-encodes first-seen codes against the canonical observed domain.
std::pair<AttributeDomain, std::vector<std::uint32_t>> canonicalize(std::string name,
                                                                    Encoded e) {
  AttributeDomain domain = AttributeDomain::from_values(std::move(name), e.seen);
  std::vector<std::uint32_t> remap(e.seen.size());
  for (std::size_t i = 0; i < e.seen.size(); ++i)
    remap[i] = static_cast<std::uint32_t>(*domain.index_of(e.seen[i]));
  for (auto& c : e.codes) c = remap[c];
  return {std::move(domain), std::move(e.codes)};
}

std::vector<std::string> bin_numeric_column(const std::vector<std::string>& raw, int bins) {
  std::vector<double> nums;
  nums.reserve(raw.size());
  for (const auto& v : raw) {
    auto n = parse_number(v);
    if (!n) return raw;  // non-numeric column: left untouched
    nums.push_back(*n);
  }
  auto [mn_it, mx_it] = std::minmax_element(nums.begin(), nums.end());
  double lo = *mn_it, hi = *mx_it;
  double width = (hi - lo) / bins;
  if (width <= 0) return raw;

  std::vector<std::string> out;
  out.reserve(raw.size());
  for (double v : nums) {
    int b = std::min(bins - 1, static_cast<int>(std::floor((v - lo) / width)));
    out.push_back("[" + format_number(lo + b * width) + "," +
                  format_number(lo + (b + 1) * width) + ")");
  }
  return out;
}

}  // namespace

Dataset Dataset::from_columns(std::vector<std::string> attribute_names,
                              std::string label_name,
                              const std::vector<std::vector<std::string>>& columns,
                              const std::vector<std::string>& labels) {
  if (columns.size() != attribute_names.size())
    throw std::invalid_argument("column count does not match attribute names");
  if (labels.empty()) throw std::invalid_argument("empty dataset");
  for (const auto& col : columns)
    if (col.size() != labels.size())
      throw std::invalid_argument("column lengths differ");

  Dataset d;
  d.attribute_names_ = std::move(attribute_names);
  d.label_name_ = std::move(label_name);
  d.n_rows_ = static_cast<Index>(labels.size());
  d.attributes_.reserve(columns.size());
  for (std::size_t a = 0; a < columns.size(); ++a) {
    Encoded e;
    std::unordered_map<std::string, std::uint32_t> dict;
    for (const auto& v : columns[a]) encode_value(e, dict, v);
    auto [domain, codes] = canonicalize(d.attribute_names_[a], std::move(e));
    d.attributes_.push_back({std::move(domain), std::move(codes)});
  }
  Encoded e;
  std::unordered_map<std::string, std::uint32_t> dict;
  for (const auto& v : labels) encode_value(e, dict, v);
  auto [domain, codes] = canonicalize(d.label_name_, std::move(e));
  d.label_ = {std::move(domain), std::move(codes)};
  return d;
}

namespace {

// Drops unobserved candidate values, then canonicalizes.
std::pair<AttributeDomain, std::vector<std::uint32_t>> compact_encoded(
    std::string name, Dataset::EncodedColumn column) {
  std::vector<std::uint32_t> remap(column.values.size(),
                                   std::numeric_limits<std::uint32_t>::max());
  Encoded observed;
  for (std::uint32_t code : column.codes) {
    if (remap[code] == std::numeric_limits<std::uint32_t>::max()) {
      remap[code] = static_cast<std::uint32_t>(observed.seen.size());
      observed.seen.push_back(column.values[code]);
    }
  }
  observed.codes.reserve(column.codes.size());
  for (std::uint32_t code : column.codes) observed.codes.push_back(remap[code]);
  return canonicalize(std::move(name), std::move(observed));
}

}  // namespace

Dataset Dataset::from_encoded(std::vector<std::string> attribute_names,
                              std::string label_name, std::vector<EncodedColumn> columns,
                              EncodedColumn label) {
  if (columns.size() != attribute_names.size())
    throw std::invalid_argument("column count does not match attribute names");
  if (label.codes.empty()) throw std::invalid_argument("empty dataset");
  for (const auto& col : columns)
    if (col.codes.size() != label.codes.size())
      throw std::invalid_argument("column lengths differ");

  Dataset d;
  d.attribute_names_ = std::move(attribute_names);
  d.label_name_ = std::move(label_name);
  d.n_rows_ = static_cast<Index>(label.codes.size());
  d.attributes_.reserve(columns.size());
  for (std::size_t a = 0; a < columns.size(); ++a) {
    auto [domain, codes] = compact_encoded(d.attribute_names_[a], std::move(columns[a]));
    d.attributes_.push_back({std::move(domain), std::move(codes)});
  }
  auto [domain, codes] = compact_encoded(d.label_name_, std::move(label));
  d.label_ = {std::move(domain), std::move(codes)};
  return d;
}

Dataset load_dataset(std::istream& source, const std::string& label_name,
                     const LoadOptions& options) {
  csv::Reader reader(source);
  std::vector<std::string> header;
  std::size_t line = 0;
  if (!reader.next(header, line)) throw std::runtime_error("empty file");

  std::size_t label_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t k = i + 1; k < header.size(); ++k)
      if (header[i] == header[k])
        throw std::runtime_error("duplicate column '" + header[i] + "' in header");
    if (header[i] == label_name && label_col == header.size()) label_col = i;
  }
  if (label_col == header.size())
    throw std::runtime_error("missing label column '" + label_name + "'");

  std::vector<std::vector<std::string>> columns(header.size() - 1);
  std::vector<std::string> labels;
  std::vector<std::string> row;
  while (reader.next(row, line)) {
    if (row.size() != header.size())
      throw std::runtime_error("ragged row at line " + std::to_string(line) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(row.size()));
    std::size_t out = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == label_col) labels.push_back(std::move(row[i]));
      else columns[out++].push_back(std::move(row[i]));
    }
  }
  if (labels.empty()) throw std::runtime_error("empty dataset");

  if (options.bins && *options.bins >= 1)
    for (auto& col : columns) col = bin_numeric_column(col, *options.bins);

  std::vector<std::string> names;
  names.reserve(header.size() - 1);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (i != label_col) names.push_back(header[i]);

  return Dataset::from_columns(std::move(names), label_name, columns, labels);
}

Index Dataset::attribute_index(std::string_view name) const {
  for (std::size_t i = 0; i < attribute_names_.size(); ++i)
    if (attribute_names_[i] == name) return static_cast<Index>(i);
  throw std::out_of_range("unknown attribute '" + std::string(name) + "'");
}

MarginalDistribution marginal(const Dataset& d, std::string_view attribute) {
  const AttributeDomain* domain = nullptr;
  std::span<const std::uint32_t> codes;
  if (attribute == d.label_name()) {
    domain = &d.label_domain();
    codes = d.label_codes();
  } else {
    Index a = d.attribute_index(attribute);
    domain = &d.attribute_domain(a);
    codes = d.codes(a);
  }
  Vector counts = Vector::Zero(domain->size());
  for (std::uint32_t c : codes) counts[static_cast<Index>(c)] += 1.0;
  return MarginalDistribution::make(*domain, std::move(counts));
}

JointDistribution joint(const Dataset& d, std::string_view attribute) {
  Index a = d.attribute_index(attribute);
  const AttributeDomain& rows = d.attribute_domain(a);
  const AttributeDomain& cols = d.label_domain();
  Matrix cells = Matrix::Zero(rows.size(), cols.size());
  auto codes = d.codes(a);
  auto label_codes = d.label_codes();
  for (Index i = 0; i < d.row_count(); ++i)
    cells(static_cast<Index>(codes[static_cast<std::size_t>(i)]),
          static_cast<Index>(label_codes[static_cast<std::size_t>(i)])) += 1.0;
  return JointDistribution::make(rows, cols, std::move(cells),
                                 static_cast<double>(d.row_count()));
}

}  // namespace maskadv
