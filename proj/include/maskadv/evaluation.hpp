#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maskadv/data_model.hpp"
#include "maskadv/masking.hpp"
#include "maskadv/reconstruction.hpp"
#include "maskadv/utility.hpp"

namespace maskadv {

// Total variation distance between two normalized tables. Domains are
// aligned by value over the union of supports; a value missing from one
// table contributes zero mass there.
double tvd(const JointDistribution& p, const JointDistribution& q);

struct SynthSpec {
  Index rows = 1000;
  Index attributes = 5;
  Index domain_size = 20;      // per attribute
  Index label_classes = 4;
  double correlation = 0.7;    // gamma: P(value = per-class mode); rest uniform
  std::uint64_t seed = 0;
};

// Label-conditioned synthetic data: labels uniform over classes; each
// attribute draws its per-(attribute, class) mode value with probability
// gamma and a uniform domain value otherwise. gamma = 0 is independence,
// gamma = 1 with distinct modes a functional dependency.
Dataset generate_synthetic(const SynthSpec& spec);

enum class ReconstructionMethod { ipf_with_1d, ipf_no_1d, sampling };

std::string_view to_string(ReconstructionMethod m);
std::optional<ReconstructionMethod> method_from_string(std::string_view s);

struct PhaseTimes {
  double masking_seconds = 0;
  double reconstruction_seconds = 0;
  double utility_seconds = 0;
};

struct EvalRecord {
  std::string config_id;
  std::string attribute;
  ReconstructionMethod method = ReconstructionMethod::ipf_with_1d;
  double tvd = 0;          // against the ground-truth joint
  int iterations = 0;      // 0 for sampling
  double residual = 0;
  bool converged = true;
  PhaseTimes times;        // wall time, excluded from canonical outputs
};

struct TvdQuartiles {
  double p25 = 0, median = 0, p75 = 0;
};

struct BenchmarkOptions {
  std::vector<UtilityMeasure> measures{UtilityMeasure::mutual_information,
                                       UtilityMeasure::chi_square, UtilityMeasure::g3};
  std::vector<ReconstructionMethod> methods{ReconstructionMethod::ipf_with_1d,
                                            ReconstructionMethod::ipf_no_1d,
                                            ReconstructionMethod::sampling};
  IpfSettings settings;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct BenchmarkResult {
  std::vector<EvalRecord> records;  // ordered by (config, attribute, method)
  std::map<std::string, TvdQuartiles> summary;  // method name -> quartiles
};

// Ground-truth evaluation: for every (configuration, attribute, method)
// reconstructs the joint, measures TVD against the true joint and records
// per-phase wall time. All non-timing fields are deterministic for a fixed
// seed at any jobs level.
BenchmarkResult run_benchmark(const Dataset& d,
                              const std::vector<MaskingConfiguration>& configs,
                              const BenchmarkOptions& options);

}  // namespace maskadv
