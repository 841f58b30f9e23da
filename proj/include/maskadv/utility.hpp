#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maskadv/data_model.hpp"
#include "maskadv/masking.hpp"
#include "maskadv/reconstruction.hpp"

namespace maskadv {

enum class UtilityMeasure { mutual_information, chi_square, g3 };

std::string_view to_string(UtilityMeasure m);  // "mi", "chi2", "g3"
std::optional<UtilityMeasure> measure_from_string(std::string_view s);

// I(A;Y) in bits, with the 0 log 0 = 0 convention.
double mutual_information(const JointDistribution& j);

// Pearson chi-square against independence; E = 0 cells contribute 0.
double chi_square(const JointDistribution& j);

// Fraction of records to delete for A -> Y to hold exactly. Defined over
// record counts: non-integral cells are rejected.
double g3(const JointDistribution& j);

// Dispatch. g3 on a fractional table is applied to the nearest-integer
// rounded copy.
double utility(UtilityMeasure measure, const JointDistribution& j);

// |rho(reconstructed) - rho(masked)|, the per-attribute summand of the
// predictive utility deviation.
double deviation(UtilityMeasure measure, const JointDistribution& reconstructed,
                 const JointDistribution& masked);

struct AttributeDeviation {
  std::string attribute;
  double utility_original = 0;  // measured on the reconstructed joint
  double utility_masked = 0;
  double deviation = 0;
};

struct ConfigOutcome {
  std::string config_id;
  std::vector<AttributeDeviation> per_attribute;
  double total_deviation = 0;  // mean over attributes
};

struct AdvisoryReport {
  UtilityMeasure measure = UtilityMeasure::mutual_information;
  std::string case_label;  // "with-1d" | "no-1d"
  std::vector<ConfigOutcome> per_config;
  std::string selected;    // argmin of total_deviation, ties to lowest id
};

// What the advisor is allowed to see for one (configuration, attribute)
// pair: the masked joint, the mask's inverse image, and optionally the
// original 1D marginal.
struct ReconstructionInput {
  JointDistribution masked;
  InverseImage inverse;
  std::optional<MarginalDistribution> marginal;
};

struct AdviseStats {
  std::int64_t reconstruct_calls = 0;
  double masking_seconds = 0;
  double reconstruction_seconds = 0;
  double utility_seconds = 0;
};

using InputProvider = std::function<ReconstructionInput(Index config_index, Index attribute_index)>;

// Scores every configuration by reconstructing each attribute's joint
// (Case I when a marginal is supplied, Case II otherwise), averaging the
// per-attribute deviations, and selecting the argmin. Per-pair rounding
// seeds are derived from settings.rounding_seed and the (configuration,
// attribute) indices, so the report is bit-identical at any jobs level.
AdvisoryReport advise(const std::vector<std::string>& attributes,
                      const std::vector<MaskingConfiguration>& configs,
                      const InputProvider& inputs, UtilityMeasure measure,
                      const IpfSettings& settings, int jobs = 1,
                      AdviseStats* stats = nullptr);

// Convenience overload over materialized inputs, indexed [config][attribute].
AdvisoryReport advise(const std::vector<std::string>& attributes,
                      const std::vector<MaskingConfiguration>& configs,
                      const std::vector<std::vector<ReconstructionInput>>& inputs,
                      UtilityMeasure measure, const IpfSettings& settings, int jobs = 1,
                      AdviseStats* stats = nullptr);

// Provider mode: masked joints and marginals are computed from the raw
// dataset; masked datasets are never materialized.
struct ProviderOptions {
  bool with_marginals = true;
  UtilityMeasure measure = UtilityMeasure::mutual_information;
  IpfSettings settings;
  int jobs = 1;
};

AdvisoryReport advise_from_data(const Dataset& d,
                                const std::vector<MaskingConfiguration>& configs,
                                const ProviderOptions& options,
                                AdviseStats* stats = nullptr);

}  // namespace maskadv
