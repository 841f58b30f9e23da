#include "maskadv/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "maskadv/parallel.hpp"
#include "maskadv/rng.hpp"

namespace maskadv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> union_values(const AttributeDomain& a, const AttributeDomain& b) {
  std::vector<std::string> values = a.values();
  for (const auto& v : b.values())
    if (!a.index_of(v)) values.push_back(v);
  return values;
}

}  // namespace

double tvd(const JointDistribution& p, const JointDistribution& q) {
  if (!(p.total > 0) || !(q.total > 0))
    throw std::invalid_argument("tvd requires positive totals");
  AttributeDomain rows = AttributeDomain::from_values("rows", union_values(p.row_domain, q.row_domain));
  AttributeDomain cols = AttributeDomain::from_values("cols", union_values(p.col_domain, q.col_domain));

  auto normalized = [&](const JointDistribution& j) {
    Matrix out = Matrix::Zero(rows.size(), cols.size());
    for (Index r = 0; r < j.cells.rows(); ++r) {
      Index rr = *rows.index_of(j.row_domain.value(r));
      for (Index c = 0; c < j.cells.cols(); ++c)
        out(rr, *cols.index_of(j.col_domain.value(c))) = j.cells(r, c) / j.total;
    }
    return out;
  };

  return 0.5 * (normalized(p) - normalized(q)).cwiseAbs().sum();
}

Dataset generate_synthetic(const SynthSpec& spec) {
  if (spec.rows < 1 || spec.attributes < 1 || spec.domain_size < 1 || spec.label_classes < 1)
    throw std::invalid_argument("synthetic spec counts must be at least 1");
  if (spec.correlation < 0 || spec.correlation > 1)
    throw std::invalid_argument("correlation must lie in [0, 1]");

  const auto n = static_cast<std::size_t>(spec.rows);

  // Value and class token tables, zero-padded so lexicographic order is
  // the natural one.
  int vw = static_cast<int>(std::to_string(spec.domain_size - 1).size());
  std::vector<std::string> value_tokens(static_cast<std::size_t>(spec.domain_size));
  for (Index v = 0; v < spec.domain_size; ++v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%0*lld", vw, static_cast<long long>(v));
    value_tokens[static_cast<std::size_t>(v)] = buf;
  }
  int cw = static_cast<int>(std::to_string(spec.label_classes - 1).size());
  std::vector<std::string> class_tokens(static_cast<std::size_t>(spec.label_classes));
  for (Index c = 0; c < spec.label_classes; ++c) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "c%0*lld", cw, static_cast<long long>(c));
    class_tokens[static_cast<std::size_t>(c)] = buf;
  }

  Rng label_rng(mix({spec.seed, 0}));
  Dataset::EncodedColumn label{class_tokens, std::vector<std::uint32_t>(n)};
  for (auto& l : label.codes)
    l = static_cast<std::uint32_t>(label_rng.below(static_cast<std::uint64_t>(spec.label_classes)));

  std::vector<Dataset::EncodedColumn> columns(static_cast<std::size_t>(spec.attributes));
  for (Index a = 0; a < spec.attributes; ++a) {
    // One mode value per class, distinct across classes whenever the
    // domain is large enough (partial Fisher-Yates over the domain).
    Rng mode_rng(mix({spec.seed, 1, static_cast<std::uint64_t>(a)}));
    std::vector<std::uint32_t> modes(static_cast<std::size_t>(spec.label_classes));
    if (spec.domain_size >= spec.label_classes) {
      std::vector<std::uint32_t> pool(static_cast<std::size_t>(spec.domain_size));
      for (Index v = 0; v < spec.domain_size; ++v)
        pool[static_cast<std::size_t>(v)] = static_cast<std::uint32_t>(v);
      for (Index c = 0; c < spec.label_classes; ++c) {
        std::size_t pick = static_cast<std::size_t>(c) +
                           mode_rng.below(static_cast<std::uint64_t>(spec.domain_size - c));
        std::swap(pool[static_cast<std::size_t>(c)], pool[pick]);
        modes[static_cast<std::size_t>(c)] = pool[static_cast<std::size_t>(c)];
      }
    } else {
      for (Index c = 0; c < spec.label_classes; ++c)
        modes[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(
            mode_rng.below(static_cast<std::uint64_t>(spec.domain_size)));
    }

    Rng rng(mix({spec.seed, 2, static_cast<std::uint64_t>(a)}));
    auto& col = columns[static_cast<std::size_t>(a)];
    col.values = value_tokens;
    col.codes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.unit() < spec.correlation)
        col.codes[i] = modes[label.codes[i]];
      else
        col.codes[i] =
            static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(spec.domain_size)));
    }
  }

  int aw = static_cast<int>(std::to_string(spec.attributes - 1).size());
  std::vector<std::string> names(static_cast<std::size_t>(spec.attributes));
  for (Index a = 0; a < spec.attributes; ++a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "attr%0*lld", aw, static_cast<long long>(a));
    names[static_cast<std::size_t>(a)] = buf;
  }

  return Dataset::from_encoded(std::move(names), "label", std::move(columns),
                               std::move(label));
}

std::string_view to_string(ReconstructionMethod m) {
  switch (m) {
    case ReconstructionMethod::ipf_with_1d: return "ipf-with-1d";
    case ReconstructionMethod::ipf_no_1d: return "ipf-no-1d";
    case ReconstructionMethod::sampling: return "sampling";
  }
  return "?";
}

std::optional<ReconstructionMethod> method_from_string(std::string_view s) {
  for (ReconstructionMethod m : {ReconstructionMethod::ipf_with_1d,
                                 ReconstructionMethod::ipf_no_1d,
                                 ReconstructionMethod::sampling})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

BenchmarkResult run_benchmark(const Dataset& d,
                              const std::vector<MaskingConfiguration>& configs,
                              const BenchmarkOptions& options) {
  for (const auto& c : configs)
    validate_configuration(c, d.attribute_names(), d.label_name());
  if (options.methods.empty()) throw std::invalid_argument("no reconstruction methods given");

  const Index m = d.attribute_count();
  const std::size_t n_methods = options.methods.size();

  // Ground truth, computed once per attribute; evaluation mode only.
  std::vector<JointDistribution> true_joints;
  std::vector<MarginalDistribution> marginals;
  true_joints.reserve(static_cast<std::size_t>(m));
  for (const auto& name : d.attribute_names()) {
    true_joints.push_back(joint(d, name));
    marginals.push_back(marginal(d, name));
  }

  std::vector<EvalRecord> records(configs.size() * static_cast<std::size_t>(m) * n_methods);

  parallel_for(options.jobs, records.size(), [&](std::size_t task) {
    const std::size_t mi = task % n_methods;
    const std::size_t pair = task / n_methods;
    const Index ai = static_cast<Index>(pair) % m;
    const Index ci = static_cast<Index>(pair) / m;
    const auto& config = configs[static_cast<std::size_t>(ci)];
    const std::string& attribute = d.attribute_names()[static_cast<std::size_t>(ai)];
    const ReconstructionMethod method = options.methods[mi];

    EvalRecord rec;
    rec.config_id = config.id;
    rec.attribute = attribute;
    rec.method = method;

    auto t0 = Clock::now();
    InverseImage inv = inverse_image(config.function_for(attribute), d.attribute_domain(ai));
    JointDistribution masked = masked_joint(d, attribute, inv);
    rec.times.masking_seconds = seconds_since(t0);

    std::uint64_t pair_seed = mix({options.seed, static_cast<std::uint64_t>(ci),
                                   static_cast<std::uint64_t>(ai),
                                   static_cast<std::uint64_t>(mi)});
    auto t1 = Clock::now();
    JointDistribution reconstructed;
    if (method == ReconstructionMethod::sampling) {
      reconstructed = sampling_reconstruct(masked, inv, pair_seed);
    } else {
      IpfSettings settings = options.settings;
      settings.rounding_seed = pair_seed;
      ConstraintSet constraints =
          method == ReconstructionMethod::ipf_with_1d
              ? ConstraintSet::with_marginal(masked, inv,
                                             marginals[static_cast<std::size_t>(ai)])
              : ConstraintSet::without_marginal(masked, inv);
      ReconstructionResult r = reconstruct(constraints, settings);
      rec.iterations = r.iterations;
      rec.residual = r.residual;
      rec.converged = r.converged;
      reconstructed = std::move(r.fractional);
    }
    rec.times.reconstruction_seconds = seconds_since(t1);

    auto t2 = Clock::now();
    for (UtilityMeasure measure : options.measures)
      (void)deviation(measure, reconstructed, masked);
    rec.times.utility_seconds = seconds_since(t2);

    rec.tvd = tvd(true_joints[static_cast<std::size_t>(ai)], reconstructed);
    records[task] = std::move(rec);
  });

  BenchmarkResult result;
  result.records = std::move(records);

  for (ReconstructionMethod method : options.methods) {
    std::vector<double> tvds;
    for (const auto& r : result.records)
      if (r.method == method) tvds.push_back(r.tvd);
    std::sort(tvds.begin(), tvds.end());
    auto quantile = [&](double q) {
      if (tvds.empty()) return 0.0;
      double pos = q * static_cast<double>(tvds.size() - 1);
      std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
      double w = pos - static_cast<double>(lo);
      return tvds[lo] * (1 - w) + tvds[hi] * w;
    };
    result.summary[std::string(to_string(method))] =
        TvdQuartiles{quantile(0.25), quantile(0.5), quantile(0.75)};
  }
  return result;
}

}  // namespace maskadv
