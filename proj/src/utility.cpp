#include "maskadv/utility.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <set>
#include <stdexcept>

#include "maskadv/parallel.hpp"
#include "maskadv/rng.hpp"

namespace maskadv {

std::string_view to_string(UtilityMeasure m) {
  switch (m) {
    case UtilityMeasure::mutual_information: return "mi";
    case UtilityMeasure::chi_square: return "chi2";
    case UtilityMeasure::g3: return "g3";
  }
  return "?";
}

std::optional<UtilityMeasure> measure_from_string(std::string_view s) {
  if (s == "mi") return UtilityMeasure::mutual_information;
  if (s == "chi2") return UtilityMeasure::chi_square;
  if (s == "g3") return UtilityMeasure::g3;
  return std::nullopt;
}

namespace {

void require_positive_total(const JointDistribution& j) {
  if (!(j.total > 0)) throw std::invalid_argument("utility measure on a zero-total table");
}

}  // namespace

double mutual_information(const JointDistribution& j) {
  require_positive_total(j);
  const double n = j.total;
  Vector rows = j.row_sums();
  Vector cols = j.col_sums();
  double mi = 0;
  for (Index r = 0; r < j.cells.rows(); ++r) {
    for (Index y = 0; y < j.cells.cols(); ++y) {
      double c = j.cells(r, y);
      if (c <= 0) continue;
      double p = c / n;
      mi += p * std::log2(p / ((rows[r] / n) * (cols[y] / n)));
    }
  }
  return std::max(mi, 0.0);
}

double chi_square(const JointDistribution& j) {
  require_positive_total(j);
  Vector rows = j.row_sums();
  Vector cols = j.col_sums();
  double chi2 = 0;
  for (Index r = 0; r < j.cells.rows(); ++r) {
    for (Index y = 0; y < j.cells.cols(); ++y) {
      double expected = rows[r] * cols[y] / j.total;
      if (expected <= 0) continue;
      double d = j.cells(r, y) - expected;
      chi2 += d * d / expected;
    }
  }
  return chi2;
}

double g3(const JointDistribution& j) {
  require_positive_total(j);
  if (!j.integral())
    throw std::invalid_argument("g3 is defined over record counts; round the table first");
  double kept = 0;
  for (Index r = 0; r < j.cells.rows(); ++r) kept += j.cells.row(r).maxCoeff();
  return (j.total - kept) / j.total;
}

double utility(UtilityMeasure measure, const JointDistribution& j) {
  switch (measure) {
    case UtilityMeasure::mutual_information: return mutual_information(j);
    case UtilityMeasure::chi_square: return chi_square(j);
    case UtilityMeasure::g3: {
      if (j.integral()) return g3(j);
      Matrix rounded = j.cells.array().round().matrix();
      double total = rounded.sum();
      return g3(JointDistribution::make(j.row_domain, j.col_domain, std::move(rounded), total));
    }
  }
  throw std::logic_error("unreachable measure");
}

double deviation(UtilityMeasure measure, const JointDistribution& reconstructed,
                 const JointDistribution& masked) {
  if (!reconstructed.col_domain.same_values(masked.col_domain))
    throw std::invalid_argument("deviation requires a shared label domain");
  return std::abs(utility(measure, reconstructed) - utility(measure, masked));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

AdvisoryReport advise(const std::vector<std::string>& attributes,
                      const std::vector<MaskingConfiguration>& configs,
                      const InputProvider& inputs, UtilityMeasure measure,
                      const IpfSettings& settings, int jobs, AdviseStats* stats) {
  if (configs.empty()) throw std::invalid_argument("no masking configurations to compare");
  if (attributes.empty()) throw std::invalid_argument("no attributes to score");
  {
    std::set<std::string> ids;
    for (const auto& c : configs) {
      if (!ids.insert(c.id).second)
        throw std::invalid_argument("duplicate configuration id '" + c.id + "'");
      std::set<std::string> assigned;
      for (const auto& [a, f] : c.assignments) assigned.insert(a);
      for (const auto& a : attributes)
        if (!assigned.contains(a))
          throw std::invalid_argument("configuration '" + c.id +
                                      "' does not cover attribute '" + a + "'");
    }
  }

  const Index k = static_cast<Index>(configs.size());
  const Index m = static_cast<Index>(attributes.size());

  struct PairResult {
    AttributeDeviation dev;
    bool with_marginal = false;
  };
  std::vector<PairResult> results(static_cast<std::size_t>(k * m));

  std::mutex stats_mutex;
  AdviseStats local{};

  parallel_for(jobs, static_cast<std::size_t>(k * m), [&](std::size_t task) {
    const Index ci = static_cast<Index>(task) / m;
    const Index ai = static_cast<Index>(task) % m;
    const std::string& attribute = attributes[static_cast<std::size_t>(ai)];
    try {
      auto t0 = Clock::now();
      ReconstructionInput input = inputs(ci, ai);
      double masking_s = seconds_since(t0);

      auto t1 = Clock::now();
      IpfSettings pair_settings = settings;
      pair_settings.rounding_seed = mix({settings.rounding_seed,
                                         static_cast<std::uint64_t>(ci),
                                         static_cast<std::uint64_t>(ai)});
      ConstraintSet constraints =
          input.marginal
              ? ConstraintSet::with_marginal(input.masked, input.inverse, *input.marginal)
              : ConstraintSet::without_marginal(input.masked, input.inverse);
      ReconstructionResult rec = reconstruct(constraints, pair_settings);
      double reconstruction_s = seconds_since(t1);

      auto t2 = Clock::now();
      double u_masked = utility(measure, input.masked);
      double u_original = measure == UtilityMeasure::g3 ? g3(rec.integral)
                                                        : utility(measure, rec.fractional);
      double utility_s = seconds_since(t2);

      PairResult& out = results[task];
      out.dev = {attribute, u_original, u_masked, std::abs(u_original - u_masked)};
      out.with_marginal = input.marginal.has_value();

      std::lock_guard lock(stats_mutex);
      local.reconstruct_calls += 1;
      local.masking_seconds += masking_s;
      local.reconstruction_seconds += reconstruction_s;
      local.utility_seconds += utility_s;
    } catch (const std::exception& e) {
      throw std::runtime_error("configuration '" + configs[static_cast<std::size_t>(ci)].id +
                               "', attribute '" + attribute + "': " + e.what());
    }
  });

  AdvisoryReport report;
  report.measure = measure;
  bool all_marginals = true;
  for (const auto& r : results) all_marginals = all_marginals && r.with_marginal;
  report.case_label = all_marginals ? "with-1d" : "no-1d";

  report.per_config.reserve(static_cast<std::size_t>(k));
  for (Index ci = 0; ci < k; ++ci) {
    ConfigOutcome outcome;
    outcome.config_id = configs[static_cast<std::size_t>(ci)].id;
    double sum = 0;
    for (Index ai = 0; ai < m; ++ai) {
      const auto& dev = results[static_cast<std::size_t>(ci * m + ai)].dev;
      sum += dev.deviation;
      outcome.per_attribute.push_back(dev);
    }
    outcome.total_deviation = sum / static_cast<double>(m);
    report.per_config.push_back(std::move(outcome));
  }

  const ConfigOutcome* best = &report.per_config.front();
  for (const auto& outcome : report.per_config)
    if (outcome.total_deviation < best->total_deviation ||
        (outcome.total_deviation == best->total_deviation &&
         outcome.config_id < best->config_id))
      best = &outcome;
  report.selected = best->config_id;

  if (stats) {
    stats->reconstruct_calls += local.reconstruct_calls;
    stats->masking_seconds += local.masking_seconds;
    stats->reconstruction_seconds += local.reconstruction_seconds;
    stats->utility_seconds += local.utility_seconds;
  }
  return report;
}

AdvisoryReport advise(const std::vector<std::string>& attributes,
                      const std::vector<MaskingConfiguration>& configs,
                      const std::vector<std::vector<ReconstructionInput>>& inputs,
                      UtilityMeasure measure, const IpfSettings& settings, int jobs,
                      AdviseStats* stats) {
  if (inputs.size() != configs.size())
    throw std::invalid_argument("inputs missing for some configuration");
  for (const auto& row : inputs)
    if (row.size() != attributes.size())
      throw std::invalid_argument("inputs missing for some (configuration, attribute) pair");
  return advise(
      attributes, configs,
      [&](Index ci, Index ai) -> ReconstructionInput {
        return inputs[static_cast<std::size_t>(ci)][static_cast<std::size_t>(ai)];
      },
      measure, settings, jobs, stats);
}

AdvisoryReport advise_from_data(const Dataset& d,
                                const std::vector<MaskingConfiguration>& configs,
                                const ProviderOptions& options, AdviseStats* stats) {
  for (const auto& c : configs)
    validate_configuration(c, d.attribute_names(), d.label_name());

  auto t0 = Clock::now();
  std::vector<MarginalDistribution> marginals;
  if (options.with_marginals) {
    marginals.reserve(static_cast<std::size_t>(d.attribute_count()));
    for (const auto& name : d.attribute_names()) marginals.push_back(marginal(d, name));
  }
  if (stats) stats->masking_seconds += seconds_since(t0);

  InputProvider provider = [&](Index ci, Index ai) -> ReconstructionInput {
    const std::string& attribute = d.attribute_names()[static_cast<std::size_t>(ai)];
    const MaskingFunction& f =
        configs[static_cast<std::size_t>(ci)].function_for(attribute);
    InverseImage inv = inverse_image(f, d.attribute_domain(ai));
    JointDistribution masked = masked_joint(d, attribute, inv);
    ReconstructionInput input{std::move(masked), std::move(inv), std::nullopt};
    if (options.with_marginals) input.marginal = marginals[static_cast<std::size_t>(ai)];
    return input;
  };

  return advise(d.attribute_names(), configs, provider, options.measure, options.settings,
                options.jobs, stats);
}

}  // namespace maskadv
