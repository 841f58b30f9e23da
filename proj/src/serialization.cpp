#include "maskadv/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace maskadv {

Json summary_to_json(const std::vector<MarginalDistribution>& marginals) {
  if (marginals.empty()) throw std::invalid_argument("summary of zero attributes");
  Json attributes = Json::object();
  std::int64_t total = marginals.front().total;
  for (const auto& m : marginals) {
    if (m.total != total)
      throw std::invalid_argument("marginal totals disagree in summary");
    Json counts = Json::object();
    for (Index i = 0; i < m.domain.size(); ++i)
      counts[m.domain.value(i)] = static_cast<std::int64_t>(std::llround(m.counts[i]));
    attributes[m.domain.name()] = std::move(counts);
  }
  return Json{{"total", total}, {"attributes", std::move(attributes)}};
}

std::map<std::string, MarginalDistribution> summary_from_json(const Json& j) {
  if (!j.contains("total") || !j.contains("attributes"))
    throw std::runtime_error("summary file must contain 'total' and 'attributes'");
  auto total = j.at("total").get<std::int64_t>();
  std::map<std::string, MarginalDistribution> out;
  for (const auto& [name, counts] : j.at("attributes").items()) {
    std::vector<std::string> values;
    for (const auto& [value, _] : counts.items()) values.push_back(value);
    AttributeDomain domain = AttributeDomain::from_values(name, std::move(values));
    Vector c(domain.size());
    for (Index i = 0; i < domain.size(); ++i)
      c[i] = counts.at(domain.value(i)).get<double>();
    MarginalDistribution m = MarginalDistribution::make(std::move(domain), std::move(c));
    if (m.total != total)
      throw std::runtime_error("summary counts for '" + name + "' sum to " +
                               std::to_string(m.total) + ", expected " +
                               std::to_string(total));
    out.emplace(name, std::move(m));
  }
  return out;
}

Json joint_to_json(const JointDistribution& j) { return joint_to_json(j, Json()); }

Json joint_to_json(const JointDistribution& j, const Json& metadata) {
  Json out{
      {"row_domain", {{"name", j.row_domain.name()}, {"values", j.row_domain.values()}}},
      {"col_domain", {{"name", j.col_domain.name()}, {"values", j.col_domain.values()}}},
      {"total", j.total},
  };
  Json cells = Json::array();
  for (Index r = 0; r < j.cells.rows(); ++r)
    for (Index c = 0; c < j.cells.cols(); ++c) cells.push_back(j.cells(r, c));
  out["cells"] = std::move(cells);
  if (!metadata.is_null()) out["metadata"] = metadata;
  return out;
}

Json reconstruction_metadata(const ReconstructionResult& r, std::string_view case_label,
                             std::uint64_t seed) {
  return Json{{"case", std::string(case_label)},
              {"iterations", r.iterations},
              {"residual", r.residual},
              {"converged", r.converged},
              {"seed", seed}};
}

JointDistribution joint_from_json(const Json& j) {
  auto domain_of = [](const Json& d) {
    return AttributeDomain::from_ordered(d.at("name").get<std::string>(),
                                         d.at("values").get<std::vector<std::string>>());
  };
  AttributeDomain rows = domain_of(j.at("row_domain"));
  AttributeDomain cols = domain_of(j.at("col_domain"));
  const Json& cells = j.at("cells");
  if (static_cast<Index>(cells.size()) != rows.size() * cols.size())
    throw std::runtime_error("joint file cell count does not match domain sizes");
  Matrix m(rows.size(), cols.size());
  std::size_t k = 0;
  for (Index r = 0; r < rows.size(); ++r)
    for (Index c = 0; c < cols.size(); ++c) m(r, c) = cells.at(k++).get<double>();
  return JointDistribution::make(std::move(rows), std::move(cols), std::move(m),
                                 j.at("total").get<double>());
}

namespace {

Json function_params(const MaskingFunction& f) {
  Json params = Json::object();
  switch (f.kind) {
    case MaskKind::identity:
    case MaskKind::suppress:
      break;
    case MaskKind::bucketize:
      params["width"] = f.width;
      params["origin"] = f.origin;
      break;
    case MaskKind::blur_numeric:
      params["multiple"] = f.multiple;
      break;
    case MaskKind::blur_prefix:
      params["keep"] = f.keep;
      break;
    case MaskKind::generalize:
      if (!f.mapping.empty()) {
        params["mapping"] = f.mapping;
      } else {
        Json ranges = Json::array();
        for (const auto& r : f.rules) {
          Json range{{"category", r.category}};
          if (std::isfinite(r.lo)) range["lo"] = r.lo;
          if (std::isfinite(r.hi)) range["hi"] = r.hi;
          ranges.push_back(std::move(range));
        }
        params["ranges"] = std::move(ranges);
      }
      break;
  }
  return params;
}

MaskingFunction function_from(const std::string& kind_name, const Json& params) {
  auto kind = mask_kind_from_string(kind_name);
  if (!kind) throw std::runtime_error("unknown masking kind '" + kind_name + "'");
  switch (*kind) {
    case MaskKind::identity: return MaskingFunction::identity();
    case MaskKind::suppress: return MaskingFunction::suppress();
    case MaskKind::bucketize:
      return MaskingFunction::bucketize(params.at("width").get<double>(),
                                        params.value("origin", 0.0));
    case MaskKind::blur_numeric:
      return MaskingFunction::blur_numeric(params.at("multiple").get<double>());
    case MaskKind::blur_prefix:
      return MaskingFunction::blur_prefix(params.at("keep").get<int>());
    case MaskKind::generalize: {
      if (params.contains("mapping"))
        return MaskingFunction::generalize(
            params.at("mapping").get<std::map<std::string, std::string>>());
      std::vector<GeneralizeRule> rules;
      for (const auto& r : params.at("ranges")) {
        GeneralizeRule rule;
        rule.lo = r.value("lo", -std::numeric_limits<double>::infinity());
        rule.hi = r.value("hi", std::numeric_limits<double>::infinity());
        rule.category = r.at("category").get<std::string>();
        rules.push_back(std::move(rule));
      }
      return MaskingFunction::generalize(std::move(rules));
    }
  }
  throw std::logic_error("unreachable kind");
}

}  // namespace

Json configs_to_json(const std::vector<MaskingConfiguration>& configs) {
  Json out = Json::array();
  for (const auto& c : configs) {
    Json assignments = Json::array();
    for (const auto& [attribute, f] : c.assignments)
      assignments.push_back(Json{{"attribute", attribute},
                                 {"kind", std::string(to_string(f.kind))},
                                 {"params", function_params(f)}});
    out.push_back(Json{{"id", c.id}, {"assignments", std::move(assignments)}});
  }
  return out;
}

std::vector<MaskingConfiguration> configs_from_json(const Json& j) {
  if (!j.is_array()) throw std::runtime_error("configuration set must be a JSON array");
  std::vector<MaskingConfiguration> out;
  std::set<std::string> ids;
  for (const auto& cj : j) {
    MaskingConfiguration c;
    c.id = cj.at("id").get<std::string>();
    if (!ids.insert(c.id).second)
      throw std::runtime_error("duplicate configuration id '" + c.id + "'");
    for (const auto& aj : cj.at("assignments"))
      c.assignments.emplace_back(
          aj.at("attribute").get<std::string>(),
          function_from(aj.at("kind").get<std::string>(),
                        aj.value("params", Json::object())));
    out.push_back(std::move(c));
  }
  return out;
}

Json report_to_json(const AdvisoryReport& report) {
  Json per_config = Json::array();
  for (const auto& outcome : report.per_config) {
    Json per_attribute = Json::array();
    for (const auto& dev : outcome.per_attribute)
      per_attribute.push_back(Json{{"attribute", dev.attribute},
                                   {"utility_original", dev.utility_original},
                                   {"utility_masked", dev.utility_masked},
                                   {"deviation", dev.deviation}});
    per_config.push_back(Json{{"config_id", outcome.config_id},
                              {"per_attribute", std::move(per_attribute)},
                              {"total_deviation", outcome.total_deviation}});
  }
  return Json{{"measure", std::string(to_string(report.measure))},
              {"case", report.case_label},
              {"per_config", std::move(per_config)},
              {"selected", report.selected}};
}

Json record_to_json(const EvalRecord& r) {
  return Json{{"config", r.config_id},
              {"attribute", r.attribute},
              {"method", std::string(to_string(r.method))},
              {"tvd", r.tvd},
              {"iterations", r.iterations},
              {"residual", r.residual},
              {"converged", r.converged}};
}

Json record_timing_to_json(const EvalRecord& r) {
  return Json{{"config", r.config_id},
              {"attribute", r.attribute},
              {"method", std::string(to_string(r.method))},
              {"masking_seconds", r.times.masking_seconds},
              {"reconstruction_seconds", r.times.reconstruction_seconds},
              {"utility_seconds", r.times.utility_seconds}};
}

Json benchmark_summary_to_json(const std::map<std::string, TvdQuartiles>& summary) {
  Json out = Json::object();
  for (const auto& [method, q] : summary)
    out[method] = Json{{"median-tvd", q.median}, {"p25", q.p25}, {"p75", q.p75}};
  return out;
}

std::map<std::string, AttributeDomain> domains_from_json(const Json& j) {
  std::map<std::string, AttributeDomain> out;
  for (const auto& [name, values] : j.items())
    out.emplace(name, AttributeDomain::from_values(
                          name, values.get<std::vector<std::string>>()));
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace maskadv
