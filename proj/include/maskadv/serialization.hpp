#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

#include "maskadv/data_model.hpp"
#include "maskadv/evaluation.hpp"
#include "maskadv/masking.hpp"
#include "maskadv/utility.hpp"

namespace maskadv {

using Json = nlohmann::json;

// Summary file: {"total": N, "attributes": {attribute: {value: count}}}.
Json summary_to_json(const std::vector<MarginalDistribution>& marginals);
std::map<std::string, MarginalDistribution> summary_from_json(const Json& j);

// Joint file: row/col domains, total, dense row-major cells, optional
// metadata block ({case, iterations, residual, converged, seed} for
// reconstructions).
Json joint_to_json(const JointDistribution& j);
Json joint_to_json(const JointDistribution& j, const Json& metadata);
JointDistribution joint_from_json(const Json& j);

// The metadata block a serialized reconstruction carries.
Json reconstruction_metadata(const ReconstructionResult& r, std::string_view case_label,
                             std::uint64_t seed);

// Configuration set: [{id, assignments: [{attribute, kind, params}]}].
// Unknown kinds are rejected.
Json configs_to_json(const std::vector<MaskingConfiguration>& configs);
std::vector<MaskingConfiguration> configs_from_json(const Json& j);

Json report_to_json(const AdvisoryReport& report);

// Canonical benchmark record (deterministic fields only) and its timing
// companion; timings live in a separate file so canonical outputs are
// byte-identical across runs.
Json record_to_json(const EvalRecord& r);
Json record_timing_to_json(const EvalRecord& r);
Json benchmark_summary_to_json(const std::map<std::string, TvdQuartiles>& summary);

// Domains file for Case II middleware runs: {attribute: [values...]}.
std::map<std::string, AttributeDomain> domains_from_json(const Json& j);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace maskadv
