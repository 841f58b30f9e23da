#include "maskadv/masking.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "maskadv/rng.hpp"

namespace maskadv {

std::string_view to_string(MaskKind k) {
  switch (k) {
    case MaskKind::identity: return "identity";
    case MaskKind::suppress: return "suppress";
    case MaskKind::bucketize: return "bucketize";
    case MaskKind::generalize: return "generalize";
    case MaskKind::blur_numeric: return "blur-numeric";
    case MaskKind::blur_prefix: return "blur-prefix";
  }
  return "?";
}

std::optional<MaskKind> mask_kind_from_string(std::string_view s) {
  for (MaskKind k : {MaskKind::identity, MaskKind::suppress, MaskKind::bucketize,
                     MaskKind::generalize, MaskKind::blur_numeric, MaskKind::blur_prefix})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

MaskingFunction MaskingFunction::identity() { return {}; }

MaskingFunction MaskingFunction::suppress() {
  MaskingFunction f;
  f.kind = MaskKind::suppress;
  return f;
}

MaskingFunction MaskingFunction::bucketize(double width, double origin) {
  if (!(width > 0)) throw std::invalid_argument("bucketize width must be positive");
  MaskingFunction f;
  f.kind = MaskKind::bucketize;
  f.width = width;
  f.origin = origin;
  return f;
}

MaskingFunction MaskingFunction::generalize(std::map<std::string, std::string> mapping) {
  MaskingFunction f;
  f.kind = MaskKind::generalize;
  f.mapping = std::move(mapping);
  return f;
}

MaskingFunction MaskingFunction::generalize(std::vector<GeneralizeRule> rules) {
  MaskingFunction f;
  f.kind = MaskKind::generalize;
  f.rules = std::move(rules);
  return f;
}

MaskingFunction MaskingFunction::blur_numeric(double multiple) {
  if (!(multiple > 0)) throw std::invalid_argument("blur multiple must be positive");
  MaskingFunction f;
  f.kind = MaskKind::blur_numeric;
  f.multiple = multiple;
  return f;
}

MaskingFunction MaskingFunction::blur_prefix(int keep) {
  if (keep < 0) throw std::invalid_argument("blur-prefix keep must be non-negative");
  MaskingFunction f;
  f.kind = MaskKind::blur_prefix;
  f.keep = keep;
  return f;
}

namespace {

double require_number(std::string_view value, const char* kind) {
  auto n = parse_number(value);
  if (!n)
    throw std::invalid_argument(std::string(kind) + " applied to non-numeric value '" +
                                std::string(value) + "'");
  return *n;
}

}  // namespace

std::string apply_mask(const MaskingFunction& f, std::string_view value) {
  switch (f.kind) {
    case MaskKind::identity:
      return std::string(value);
    case MaskKind::suppress:
      return "*";
    case MaskKind::bucketize: {
      double v = require_number(value, "bucketize");
      double k = std::floor((v - f.origin) / f.width);
      double lo = f.origin + k * f.width;
      return "[" + format_number(lo) + "," + format_number(lo + f.width) + ")";
    }
    case MaskKind::generalize: {
      if (!f.mapping.empty()) {
        auto it = f.mapping.find(std::string(value));
        if (it == f.mapping.end())
          throw std::invalid_argument("generalize has no rule for value '" +
                                      std::string(value) + "'");
        return it->second;
      }
      double v = require_number(value, "generalize");
      for (const auto& r : f.rules)
        if (v >= r.lo && v < r.hi) return r.category;
      throw std::invalid_argument("generalize has no rule for value '" +
                                  std::string(value) + "'");
    }
    case MaskKind::blur_numeric: {
      double v = require_number(value, "blur-numeric");
      // Nearest multiple; exact midpoints round to the lower multiple.
      double m = std::ceil(v / f.multiple - 0.5);
      return format_number(m * f.multiple + 0.0);  // drop negative zero
    }
    case MaskKind::blur_prefix: {
      std::string out(value);
      for (std::size_t i = static_cast<std::size_t>(f.keep); i < out.size(); ++i)
        out[i] = '*';
      return out;
    }
  }
  throw std::logic_error("unreachable mask kind");
}

const MaskingFunction& MaskingConfiguration::function_for(std::string_view attribute) const {
  for (const auto& [name, f] : assignments)
    if (name == attribute) return f;
  throw std::out_of_range("configuration '" + id + "' has no assignment for '" +
                          std::string(attribute) + "'");
}

void validate_configuration(const MaskingConfiguration& config,
                            const std::vector<std::string>& attribute_names,
                            const std::string& label_name) {
  std::set<std::string_view> seen;
  for (const auto& [name, f] : config.assignments) {
    if (name == label_name)
      throw std::invalid_argument("configuration '" + config.id +
                                  "' assigns a mask to the label '" + label_name + "'");
    if (!seen.insert(name).second)
      throw std::invalid_argument("configuration '" + config.id +
                                  "' assigns '" + name + "' twice");
    if (std::find(attribute_names.begin(), attribute_names.end(), name) ==
        attribute_names.end())
      throw std::invalid_argument("configuration '" + config.id +
                                  "' names unknown attribute '" + name + "'");
  }
  for (const auto& a : attribute_names)
    if (!seen.contains(a))
      throw std::invalid_argument("configuration '" + config.id +
                                  "' is missing an assignment for '" + a + "'");
}

InverseImage inverse_image(const MaskingFunction& f, const AttributeDomain& domain) {
  std::map<std::string, std::vector<Index>> groups;
  std::vector<std::string> masked_of(static_cast<std::size_t>(domain.size()));
  for (Index i = 0; i < domain.size(); ++i) {
    std::string masked = apply_mask(f, domain.value(i));
    groups[masked].push_back(i);
    masked_of[static_cast<std::size_t>(i)] = std::move(masked);
  }

  std::vector<std::string> masked_values;
  masked_values.reserve(groups.size());
  for (const auto& [mv, _] : groups) masked_values.push_back(mv);

  InverseImage inv;
  inv.masked_domain = AttributeDomain::from_values(domain.name(), std::move(masked_values));
  inv.original_domain = domain;
  inv.preimages.resize(static_cast<std::size_t>(inv.masked_domain.size()));
  inv.group_lookup.resize(static_cast<std::size_t>(domain.size()));
  for (auto& [mv, idxs] : groups) {
    Index g = *inv.masked_domain.index_of(mv);
    inv.preimages[static_cast<std::size_t>(g)] = std::move(idxs);
  }
  for (Index i = 0; i < domain.size(); ++i)
    inv.group_lookup[static_cast<std::size_t>(i)] =
        *inv.masked_domain.index_of(masked_of[static_cast<std::size_t>(i)]);
  return inv;
}

JointDistribution masked_joint(const Dataset& d, std::string_view attribute,
                               const MaskingFunction& f) {
  Index a = d.attribute_index(attribute);
  return masked_joint(d, attribute, inverse_image(f, d.attribute_domain(a)));
}

JointDistribution masked_joint(const Dataset& d, std::string_view attribute,
                               const InverseImage& inv) {
  Index a = d.attribute_index(attribute);
  if (!inv.original_domain.same_values(d.attribute_domain(a)))
    throw std::invalid_argument("inverse image was built over a different domain than '" +
                                std::string(attribute) + "'");
  Matrix cells = Matrix::Zero(inv.masked_domain.size(), d.label_domain().size());
  auto codes = d.codes(a);
  auto label_codes = d.label_codes();
  for (std::size_t i = 0; i < codes.size(); ++i)
    cells(inv.group_lookup[codes[i]], static_cast<Index>(label_codes[i])) += 1.0;
  return JointDistribution::make(inv.masked_domain, d.label_domain(), std::move(cells),
                                 static_cast<double>(d.row_count()));
}

JointDistribution masked_joint(const JointDistribution& j, const InverseImage& inv) {
  if (!inv.original_domain.same_values(j.row_domain))
    throw std::invalid_argument("inverse image was built over a different domain than '" +
                                j.row_domain.name() + "'");
  Matrix cells = Matrix::Zero(inv.masked_domain.size(), j.col_domain.size());
  for (Index g = 0; g < inv.masked_domain.size(); ++g)
    for (Index r : inv.preimages[static_cast<std::size_t>(g)])
      cells.row(g) += j.cells.row(r);
  return JointDistribution::make(inv.masked_domain, j.col_domain, std::move(cells), j.total);
}

MarginalDistribution masked_marginal(const MarginalDistribution& m, const InverseImage& inv) {
  if (!inv.original_domain.same_values(m.domain))
    throw std::invalid_argument("inverse image was built over a different domain than '" +
                                m.domain.name() + "'");
  Vector counts = Vector::Zero(inv.masked_domain.size());
  for (Index g = 0; g < inv.masked_domain.size(); ++g)
    for (Index r : inv.preimages[static_cast<std::size_t>(g)]) counts[g] += m.counts[r];
  return MarginalDistribution::make(inv.masked_domain, std::move(counts));
}

std::vector<std::string> mask_record(const Dataset& d, Index row,
                                     const MaskingConfiguration& config) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(d.attribute_count()) + 1);
  for (Index a = 0; a < d.attribute_count(); ++a)
    out.push_back(apply_mask(config.function_for(d.attribute_names()[static_cast<std::size_t>(a)]),
                             d.value(row, a)));
  out.push_back(d.label_value(row));
  return out;
}

namespace {

// Weighted value quantile (q = num/den) over a marginal in canonical
// numeric order. Counts are integral, so the threshold comparison is exact
// and cannot flip with compiler FP settings.
double numeric_quantile(const MarginalDistribution& m, std::int64_t num, std::int64_t den) {
  double threshold = static_cast<double>(num) * static_cast<double>(m.total);
  double cum = 0;
  for (Index i = 0; i < m.domain.size(); ++i) {
    cum += m.counts[i];
    if (cum * static_cast<double>(den) >= threshold)
      return *parse_number(m.domain.value(i));
  }
  return *parse_number(m.domain.value(m.domain.size() - 1));
}

MaskingFunction draw_function(MaskKind kind, Rng& rng, const MarginalDistribution& m,
                              const GeneratorPolicy& policy) {
  switch (kind) {
    case MaskKind::identity:
      return MaskingFunction::identity();
    case MaskKind::suppress:
      return MaskingFunction::suppress();
    case MaskKind::bucketize: {
      double lo = numeric_quantile(m, 0, 1);
      double q10 = numeric_quantile(m, 1, 10);
      double q90 = numeric_quantile(m, 9, 10);
      double span = q90 - q10;
      if (span <= 0) span = numeric_quantile(m, 1, 1) - lo;
      if (span <= 0) span = 1.0;
      int buckets = static_cast<int>(rng.between(policy.min_buckets, policy.max_buckets));
      return MaskingFunction::bucketize(span / buckets, lo);
    }
    case MaskKind::generalize: {
      int bins = static_cast<int>(rng.between(policy.min_generalize_bins,
                                              policy.max_generalize_bins));
      std::vector<double> cuts;
      for (int i = 1; i < bins; ++i) cuts.push_back(numeric_quantile(m, i, bins));
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      std::vector<GeneralizeRule> rules;
      double lo = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i <= cuts.size(); ++i) {
        double hi = i < cuts.size() ? cuts[i] : std::numeric_limits<double>::infinity();
        rules.push_back({lo, hi, "g" + std::to_string(i)});
        lo = hi;
      }
      return MaskingFunction::generalize(std::move(rules));
    }
    case MaskKind::blur_numeric: {
      double k = policy.blur_multiples[rng.below(policy.blur_multiples.size())];
      return MaskingFunction::blur_numeric(k);
    }
    case MaskKind::blur_prefix: {
      std::size_t min_len = std::string::npos;
      for (const auto& v : m.domain.values()) min_len = std::min(min_len, v.size());
      int keep = static_cast<int>(rng.between(1, static_cast<std::int64_t>(min_len) - 1));
      return MaskingFunction::blur_prefix(keep);
    }
  }
  throw std::logic_error("unreachable kind");
}

}  // namespace

std::vector<MaskingConfiguration> generate_configurations(const Dataset& d, int k,
                                                          std::uint64_t seed,
                                                          const GeneratorPolicy& policy) {
  if (k < 1) throw std::invalid_argument("configuration count must be at least 1");

  const Index m = d.attribute_count();
  std::vector<MarginalDistribution> marginals;
  std::vector<const std::vector<MaskKind>*> menus;
  std::vector<std::vector<MaskKind>> usable(static_cast<std::size_t>(m));
  for (Index a = 0; a < m; ++a) {
    marginals.push_back(marginal(d, d.attribute_names()[static_cast<std::size_t>(a)]));
    bool numeric = d.attribute_domain(a).numeric();
    const auto& menu = numeric ? policy.numeric_kinds : policy.string_kinds;
    std::size_t min_len = std::string::npos;
    for (const auto& v : d.attribute_domain(a).values()) min_len = std::min(min_len, v.size());
    for (MaskKind kind : menu) {
      if (kind == MaskKind::blur_prefix && min_len < 2) continue;
      if ((kind == MaskKind::bucketize || kind == MaskKind::blur_numeric ||
           kind == MaskKind::generalize) && !numeric)
        continue;
      usable[static_cast<std::size_t>(a)].push_back(kind);
    }
    if (usable[static_cast<std::size_t>(a)].empty() && policy.suppress_probability < 1.0)
      throw std::invalid_argument("policy allows no masking function for attribute '" +
                                  d.attribute_names()[static_cast<std::size_t>(a)] + "'");
    menus.push_back(&usable[static_cast<std::size_t>(a)]);
  }

  std::vector<MaskingConfiguration> configs;
  std::set<std::vector<std::pair<std::string, MaskingFunction>>> distinct;
  const int max_attempts = 64;
  for (int c = 0; c < k; ++c) {
    MaskingConfiguration cfg;
    bool ok = false;
    for (int attempt = 0; attempt < max_attempts && !ok; ++attempt) {
      cfg.assignments.clear();
      for (Index a = 0; a < m; ++a) {
        Rng rng(mix({seed, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(c),
                     static_cast<std::uint64_t>(attempt)}));
        MaskingFunction f;
        if (rng.unit() < policy.suppress_probability) {
          f = MaskingFunction::suppress();
        } else {
          const auto& menu = *menus[static_cast<std::size_t>(a)];
          f = draw_function(menu[rng.below(menu.size())], rng,
                            marginals[static_cast<std::size_t>(a)], policy);
        }
        cfg.assignments.emplace_back(d.attribute_names()[static_cast<std::size_t>(a)],
                                     std::move(f));
      }
      ok = distinct.insert(cfg.assignments).second;
    }
    if (!ok)
      throw std::runtime_error("could not generate " + std::to_string(k) +
                               " distinct configurations");
    char buf[16];
    std::snprintf(buf, sizeof buf, "cfg-%03d", c);
    cfg.id = buf;
    configs.push_back(std::move(cfg));
  }
  return configs;
}

}  // namespace maskadv
