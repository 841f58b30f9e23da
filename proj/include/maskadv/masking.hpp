#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maskadv/data_model.hpp"

namespace maskadv {

enum class MaskKind {
  identity,
  suppress,
  bucketize,
  generalize,
  blur_numeric,
  blur_prefix,
};

std::string_view to_string(MaskKind k);
std::optional<MaskKind> mask_kind_from_string(std::string_view s);

// Numeric interval -> category rule, lower-inclusive / upper-exclusive.
struct GeneralizeRule {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::string category;

  auto operator<=>(const GeneralizeRule&) const = default;
};

// Deterministic value -> masked-value map. identity passes through,
// suppress redacts to "*", bucketize emits origin-anchored "[lo,hi)"
// labels, generalize applies an explicit association or interval rules,
// blur_numeric rounds to the nearest multiple (ties toward the lower
// multiple), blur_prefix keeps leading characters and stars the rest.
struct MaskingFunction {
  MaskKind kind = MaskKind::identity;
  double width = 0.0;    // bucketize
  double origin = 0.0;   // bucketize
  double multiple = 0.0; // blur_numeric
  int keep = 0;          // blur_prefix
  std::map<std::string, std::string> mapping;  // generalize, explicit form
  std::vector<GeneralizeRule> rules;           // generalize, interval form

  static MaskingFunction identity();
  static MaskingFunction suppress();
  static MaskingFunction bucketize(double width, double origin = 0.0);
  static MaskingFunction generalize(std::map<std::string, std::string> mapping);
  static MaskingFunction generalize(std::vector<GeneralizeRule> rules);
  static MaskingFunction blur_numeric(double multiple);
  static MaskingFunction blur_prefix(int keep);

  auto operator<=>(const MaskingFunction&) const = default;
  bool operator==(const MaskingFunction&) const = default;
};

std::string apply_mask(const MaskingFunction& f, std::string_view value);

// One masking function per attribute; the label is never assigned.
struct MaskingConfiguration {
  std::string id;
  std::vector<std::pair<std::string, MaskingFunction>> assignments;

  const MaskingFunction& function_for(std::string_view attribute) const;
  bool operator==(const MaskingConfiguration&) const = default;
};

// Checks one-assignment-per-attribute coverage and that the label is
// untouched; throws on violation.
void validate_configuration(const MaskingConfiguration& config,
                            const std::vector<std::string>& attribute_names,
                            const std::string& label_name);

// Partition of an original domain by masked output value.
struct InverseImage {
  AttributeDomain masked_domain;                  // canonical order
  AttributeDomain original_domain;
  std::vector<std::vector<Index>> preimages;      // per masked value, indices
                                                  // into original_domain
  std::vector<Index> group_lookup;                // original index -> masked index

  Index group_of(Index original_index) const {
    return group_lookup[static_cast<std::size_t>(original_index)];
  }
};

InverseImage inverse_image(const MaskingFunction& f, const AttributeDomain& domain);

// F(M(A),Y) computed by streaming the rows through the mask's code table;
// the masked dataset is never materialized.
JointDistribution masked_joint(const Dataset& d, std::string_view attribute,
                               const MaskingFunction& f);

// Variant reusing a prebuilt inverse image over the attribute's domain.
JointDistribution masked_joint(const Dataset& d, std::string_view attribute,
                               const InverseImage& inv);

// Same table obtained by aggregating an existing joint over the preimages.
JointDistribution masked_joint(const JointDistribution& j, const InverseImage& inv);

MarginalDistribution masked_marginal(const MarginalDistribution& m,
                                     const InverseImage& inv);

// Row-by-row masked view of a record; export / oracle path only.
std::vector<std::string> mask_record(const Dataset& d, Index row,
                                     const MaskingConfiguration& config);

// Per-attribute-type menu of masking functions used by the generator.
struct GeneratorPolicy {
  std::vector<MaskKind> numeric_kinds{MaskKind::identity, MaskKind::bucketize,
                                      MaskKind::generalize, MaskKind::blur_numeric};
  std::vector<MaskKind> string_kinds{MaskKind::identity, MaskKind::blur_prefix};
  double suppress_probability = 0.15;
  std::vector<double> blur_multiples{5, 10, 100};
  int min_buckets = 2;
  int max_buckets = 10;
  int min_generalize_bins = 2;
  int max_generalize_bins = 4;
};

// k distinct configurations "cfg-000".."cfg-(k-1)". Assignments are drawn
// from a counter-based stream keyed by (seed, attribute index, config
// index), so the output is independent of evaluation order.
std::vector<MaskingConfiguration> generate_configurations(
    const Dataset& d, int k, std::uint64_t seed, const GeneratorPolicy& policy = {});

}  // namespace maskadv
