// Acceptance suite. Each criterion prints one PASS/FAIL line; the process
// exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers/oracles.hpp"
#include "helpers/running_example.hpp"
#include "maskadv/evaluation.hpp"
#include "maskadv/rng.hpp"
#include "maskadv/serialization.hpp"
#include "maskadv/utility.hpp"

namespace fs = std::filesystem;
using namespace maskadv;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void criterion(int number, const std::string& name, const std::function<std::string()>& body) {
  std::string detail;
  bool pass = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  std::printf("criterion %d [%s] %s%s%s\n", number, pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// ---- 1. running-example golden suite -------------------------------------

std::string golden_suite() {
  auto t0 = Clock::now();

  Dataset d = testdata::running_example_dataset();
  JointDistribution age = joint(d, "Age");
  require(age.cells.rows() == 8 && age.cells.cols() == 5, "joint shape is not 8x5");
  for (const auto& e : testdata::age_health_entries())
    require(age.cell(e.row, e.col) == e.count,
            fmt("joint cell (%s, %s) != %g", e.row, e.col, e.count));

  double mi = mutual_information(age);
  require(std::abs(mi - 0.640) <= 0.001, fmt("MI %.6f not within 0.640 +/- 0.001", mi));
  double g = g3(age);
  require(g == 0.53, fmt("g3 %.17g != 0.53 exactly", g));
  double chi = chi_square(age);
  require(std::abs(chi - 85.96) <= 0.01, fmt("chi2 %.6f not within 85.96 +/- 0.01", chi));

  JointDistribution masked = masked_joint(d, "Age", testdata::young_old_mask());
  require(masked.cells.rows() == 2, "masked joint does not have 2 rows");
  for (const auto& e : testdata::masked_age_health_entries())
    require(masked.cell(e.row, e.col) == e.count,
            fmt("masked cell (%s, %s) != %g", e.row, e.col, e.count));

  double masked_mi = mutual_information(masked);
  require(std::abs(masked_mi - 0.42) <= 0.005,
          fmt("masked MI %.6f not within 0.42 +/- 0.005", masked_mi));

  double elapsed = seconds_since(t0);
  require(elapsed < 1.0, fmt("golden suite took %.3fs (budget 1s)", elapsed));
  return fmt("MI %.4f, g3 %.2f, chi2 %.2f, masked MI %.4f, %.0f ms", mi, g, chi, masked_mi,
             elapsed * 1e3);
}

// ---- 2. IPF feasibility suite ---------------------------------------------

struct Instance {
  JointDistribution truth;
  InverseImage inverse;
  JointDistribution blocks;
  MarginalDistribution rows;
};

Instance random_instance(Rng& rng, Index max_rows, Index max_cols, double max_n) {
  Index rows = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_rows)));
  Index cols = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_cols)));
  Index groups = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(rows)));

  std::vector<std::string> values;
  std::map<std::string, std::string> grouping;
  for (Index r = 0; r < rows; ++r) {
    values.push_back("v" + std::to_string(r));
    Index g = r < groups ? r : static_cast<Index>(rng.below(static_cast<std::uint64_t>(groups)));
    grouping["v" + std::to_string(r)] = "g" + std::to_string(g);
  }
  AttributeDomain domain = AttributeDomain::from_values("a", values);
  std::vector<std::string> label_values;
  for (Index c = 0; c < cols; ++c) label_values.push_back("l" + std::to_string(c));
  AttributeDomain label = AttributeDomain::from_values("y", label_values);

  double cell_cap = std::max(1.0, max_n / (static_cast<double>(rows) * cols));
  Matrix cells(rows, cols);
  do {
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c)
        cells(r, c) = rng.unit() < 0.2 ? 0.0
                                       : std::floor(rng.unit() * cell_cap);
  } while (cells.sum() == 0);

  Instance inst{JointDistribution::make(domain, label, cells, cells.sum()),
                inverse_image(MaskingFunction::generalize(grouping), domain),
                {},
                {}};
  inst.blocks = masked_joint(inst.truth, inst.inverse);
  inst.rows = MarginalDistribution::make(domain, inst.truth.row_sums());
  return inst;
}

// Residuals recomputed from scratch; the result's own bookkeeping is not
// trusted here.
double max_abs_residual(const JointDistribution& fractional, const Instance& inst,
                        bool case_one) {
  double worst = 0;
  for (Index g = 0; g < inst.blocks.row_domain.size(); ++g) {
    const auto& pre = inst.inverse.preimages[static_cast<std::size_t>(g)];
    for (Index y = 0; y < inst.blocks.col_domain.size(); ++y) {
      double sum = 0;
      for (Index r : pre) sum += fractional.cells(r, y);
      worst = std::max(worst, std::abs(sum - inst.blocks.cells(g, y)));
    }
  }
  if (case_one) {
    Vector sums = fractional.row_sums();
    for (Index r = 0; r < sums.size(); ++r)
      worst = std::max(worst, std::abs(sums[r] - inst.rows.counts[r]));
  }
  return worst;
}

std::string ipf_feasibility() {
  Rng rng(20240517);
  int case_one_count = 0, case_two_count = 0;
  for (int trial = 0; trial < 1200; ++trial) {
    Instance inst = random_instance(rng, 20, 10, 100000.0);
    double n = inst.truth.total;
    bool case_one = trial % 2 == 0;

    ConstraintSet constraints =
        case_one ? ConstraintSet::with_marginal(inst.blocks, inst.inverse, inst.rows)
                 : ConstraintSet::without_marginal(inst.blocks, inst.inverse);
    ReconstructionResult r = reconstruct(constraints);

    require(r.converged, fmt("instance %d did not converge", trial));
    double residual = max_abs_residual(r.fractional, inst, case_one);
    require(residual <= 1e-9 * n,
            fmt("instance %d residual %.3e above 1e-9*N", trial, residual));
    for (std::size_t s = 1; s < r.residual_history.size(); ++s)
      require(r.residual_history[s] <= r.residual_history[s - 1] + 1e-12,
              fmt("instance %d residual increased at sweep %zu", trial, s));
    if (case_one) {
      ++case_one_count;
    } else {
      ++case_two_count;
      require(r.iterations == 1, fmt("case II instance %d took %d sweeps", trial, r.iterations));
      require(r.residual <= 1e-12,
              fmt("case II instance %d residual %.3e not ~0", trial, r.residual));
    }
  }
  return fmt("%d case I + %d case II instances", case_one_count, case_two_count);
}

// ---- 3. rounding unbiasedness ---------------------------------------------

std::string rounding_unbiasedness() {
  Dataset d = testdata::running_example_dataset();
  MarginalDistribution age = marginal(d, "Age");
  InverseImage inv = inverse_image(testdata::young_old_mask(), age.domain);
  ConstraintSet constraints =
      ConstraintSet::with_marginal(testdata::masked_age_health_joint(), inv, age);

  const int trials = 10000;
  Matrix fractional;
  Matrix sum = Matrix::Zero(8, 5);
  for (int t = 0; t < trials; ++t) {
    IpfSettings settings;
    settings.rounding_seed = static_cast<std::uint64_t>(t);
    ReconstructionResult r = reconstruct(constraints, settings);
    if (t == 0) fractional = r.fractional.cells;
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 5; ++j) {
        double c = r.fractional.cells(i, j);
        double v = r.integral.cells(i, j);
        require(v == std::floor(c) || v == std::ceil(c),
                fmt("cell (%lld,%lld) rounded outside floor/ceiling", i, j));
      }
    sum += r.integral.cells;
  }
  double worst_sigmas = 0;
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 5; ++j) {
      double frac = fractional(i, j) - std::floor(fractional(i, j));
      double se = std::sqrt(frac * (1 - frac) / trials);
      double err = std::abs(sum(i, j) / trials - fractional(i, j));
      require(err <= 3 * se + 1e-12,
              fmt("cell (%lld,%lld) mean off by %.3e (3se = %.3e)", i, j, err, 3 * se));
      if (se > 0) worst_sigmas = std::max(worst_sigmas, err / se);
    }
  return fmt("10000 seeds, worst cell at %.2f sigma", worst_sigmas);
}

// ---- 4. oracle equivalence --------------------------------------------------

std::string oracle_equivalence() {
  Rng rng(777);
  int instances = 0;
  while (instances < 100) {
    Index rows = 3 + static_cast<Index>(rng.below(10));  // N <= 12
    std::vector<std::vector<std::string>> columns(2);
    std::vector<std::string> labels;
    for (Index i = 0; i < rows; ++i) {
      columns[0].push_back(std::to_string(rng.below(4)));   // |Dom(A)| <= 4
      columns[1].push_back(std::to_string(rng.below(4)));
      labels.push_back("l" + std::to_string(rng.below(3))); // |Dom(Y)| <= 3
    }
    Dataset d = Dataset::from_columns({"a", "b"}, "y", columns, labels);

    std::vector<MaskingConfiguration> configs;
    {
      MaskingConfiguration identity{"cfg-000", {}};
      for (const auto& attr : d.attribute_names())
        identity.assignments.emplace_back(attr, MaskingFunction::identity());
      configs.push_back(std::move(identity));
    }
    for (int c = 1; c <= 3; ++c) {
      MaskingConfiguration cfg{"cfg-00" + std::to_string(c), {}};
      for (const auto& attr : d.attribute_names()) {
        const AttributeDomain& dom = d.attribute_domain(d.attribute_index(attr));
        if (rng.unit() < 0.4) {
          cfg.assignments.emplace_back(attr, MaskingFunction::identity());
        } else {
          std::map<std::string, std::string> rename;  // injective
          for (const auto& v : dom.values())
            rename[v] = "r" + std::to_string(rng.below(100)) + "_" + v;
          cfg.assignments.emplace_back(attr, MaskingFunction::generalize(rename));
        }
      }
      configs.push_back(std::move(cfg));
    }

    bool with_marginals = instances % 2 == 0;
    std::vector<std::vector<ReconstructionInput>> inputs;
    for (const auto& config : configs) {
      std::vector<ReconstructionInput> row;
      for (const auto& attr : d.attribute_names()) {
        InverseImage inv = inverse_image(config.function_for(attr),
                                         d.attribute_domain(d.attribute_index(attr)));
        ReconstructionInput in{masked_joint(d, attr, inv), std::move(inv), std::nullopt};
        if (with_marginals) in.marginal = marginal(d, attr);
        row.push_back(std::move(in));
      }
      inputs.push_back(std::move(row));
    }

    for (UtilityMeasure measure : {UtilityMeasure::mutual_information,
                                   UtilityMeasure::chi_square, UtilityMeasure::g3}) {
      IpfSettings settings;
      settings.rounding_seed = static_cast<std::uint64_t>(instances);
      AdvisoryReport report =
          advise(d.attribute_names(), configs, inputs, measure, settings);
      oracles::BrutePud oracle = oracles::brute_force_pud(d, configs, measure);
      require(report.selected == oracle.selected,
              fmt("instance %d measure %s: advisor chose %s, oracle %s", instances,
                  std::string(to_string(measure)).c_str(), report.selected.c_str(),
                  oracle.selected.c_str()));
      require(report.per_config[0].total_deviation == 0.0,
              fmt("instance %d: identity configuration deviates", instances));
    }
    ++instances;
  }
  return "100 instances x 3 measures agree with the brute-force oracle";
}

// ---- 5. reconstruction-quality ordering -------------------------------------

std::string quality_ordering() {
  auto t0 = Clock::now();

  SynthSpec spec;
  spec.rows = 10000;
  spec.attributes = 10;
  spec.domain_size = 20;
  spec.label_classes = 4;
  spec.correlation = 0.7;
  spec.seed = 101;
  Dataset d = generate_synthetic(spec);
  auto configs = generate_configurations(d, 50, 2024);

  BenchmarkOptions options;
  options.seed = 55;
  options.jobs = 2;
  BenchmarkResult result = run_benchmark(d, configs, options);

  double with_1d = result.summary.at("ipf-with-1d").median;
  double no_1d = result.summary.at("ipf-no-1d").median;
  double sampling = result.summary.at("sampling").median;
  require(with_1d <= no_1d, fmt("median TVD with-1d %.4f > no-1d %.4f", with_1d, no_1d));
  require(no_1d <= sampling, fmt("median TVD no-1d %.4f > sampling %.4f", no_1d, sampling));
  require(with_1d < sampling,
          fmt("outer gap not strictly positive: %.4f vs %.4f", with_1d, sampling));

  double elapsed = seconds_since(t0);
  require(elapsed < 120.0, fmt("took %.1fs (budget 120s)", elapsed));
  return fmt("median TVD %.4f <= %.4f <= %.4f, %.2fs", with_1d, no_1d, sampling, elapsed);
}

// ---- 6. scalability shape ----------------------------------------------------

struct TimedAdvisory {
  double wall = 0;
  AdviseStats stats;
};

TimedAdvisory advisory_at_scale(Index rows, std::uint64_t seed) {
  SynthSpec spec;
  spec.rows = rows;
  spec.attributes = 50;
  spec.domain_size = 20;
  spec.label_classes = 4;
  spec.correlation = 0.6;
  spec.seed = seed;
  Dataset d = generate_synthetic(spec);
  auto configs = generate_configurations(d, 10, 99);

  ProviderOptions options;
  options.with_marginals = true;
  options.measure = UtilityMeasure::mutual_information;
  options.jobs = 1;

  TimedAdvisory out;
  auto t0 = Clock::now();
  (void)advise_from_data(d, configs, options, &out.stats);
  out.wall = seconds_since(t0);
  return out;
}

std::string scalability_shape() {
  auto t0 = Clock::now();

  // three runs at the small scale; the median damps scheduler noise
  std::vector<double> small_times;
  AdviseStats small_stats;
  for (int i = 0; i < 3; ++i) {
    TimedAdvisory t = advisory_at_scale(100000, 7);
    small_times.push_back(t.wall);
    small_stats = t.stats;
  }
  std::sort(small_times.begin(), small_times.end());
  double small = small_times[1];

  TimedAdvisory large = advisory_at_scale(1000000, 7);

  double ratio = large.wall / small;
  std::printf("  phase breakdown at 1e5 rows: masking %.3fs, reconstruction %.3fs, "
              "utility %.3fs (wall %.3fs)\n",
              small_stats.masking_seconds, small_stats.reconstruction_seconds,
              small_stats.utility_seconds, small);
  std::printf("  phase breakdown at 1e6 rows: masking %.3fs, reconstruction %.3fs, "
              "utility %.3fs (wall %.3fs)\n",
              large.stats.masking_seconds, large.stats.reconstruction_seconds,
              large.stats.utility_seconds, large.wall);

  require(ratio >= 5.0 && ratio <= 20.0,
          fmt("10x rows scaled wall time by %.2fx, outside [5, 20]", ratio));
  require(large.stats.reconstruct_calls == 10 * 50, "reconstruct call count off at scale");
  double elapsed = seconds_since(t0);
  require(elapsed < 600.0, fmt("took %.1fs (budget 600s)", elapsed));
  return fmt("10x rows -> %.2fx wall time, total %.1fs", ratio, elapsed);
}

// ---- 7. cost structure --------------------------------------------------------

std::string cost_structure() {
  SynthSpec spec;
  spec.rows = 2000;
  spec.attributes = 7;
  spec.seed = 3;
  Dataset d = generate_synthetic(spec);

  for (int k : {1, 4, 9}) {
    auto configs = generate_configurations(d, k, 17);
    ProviderOptions options;
    options.measure = UtilityMeasure::g3;
    AdviseStats stats;
    (void)advise_from_data(d, configs, options, &stats);
    require(stats.reconstruct_calls == static_cast<std::int64_t>(k) * 7,
            fmt("K=%d: %lld reconstruct calls, expected %d", k,
                static_cast<long long>(stats.reconstruct_calls), k * 7));
  }
  return "reconstruct calls == |configs| x attributes for K in {1, 4, 9}";
}

// ---- 8. determinism ------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& dir) {
  std::string cmd = std::string(MASKADVISOR_BIN) + " " + args + " >" +
                    (dir / "_stdout").string() + " 2>" + (dir / "_stderr").string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string determinism() {
  fs::path dir = fs::temp_directory_path() / "maskadv_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::string synth = "gen-synth --rows 3000 --attrs 5 --domain-size 12 --classes 3 "
                      "--gamma 0.6 --seed 12 --out ";
  require(run_cli(synth + (dir / "d1.csv").string(), dir) == 0, "gen-synth run 1 failed");
  require(run_cli(synth + (dir / "d2.csv").string(), dir) == 0, "gen-synth run 2 failed");
  require(slurp(dir / "d1.csv") == slurp(dir / "d2.csv"), "gen-synth not byte-identical");

  std::string gen = "gen-configs --data " + (dir / "d1.csv").string() +
                    " --label label --k 12 --seed 5 --out ";
  require(run_cli(gen + (dir / "c1.json").string(), dir) == 0, "gen-configs run 1 failed");
  require(run_cli(gen + (dir / "c2.json").string(), dir) == 0, "gen-configs run 2 failed");
  require(slurp(dir / "c1.json") == slurp(dir / "c2.json"), "gen-configs not byte-identical");

  std::string advise_base = "advise --data " + (dir / "d1.csv").string() +
                            " --label label --configs " + (dir / "c1.json").string() +
                            " --measure g3 --case with-1d --seed 21 ";
  require(run_cli(advise_base + "--jobs 1 --out " + (dir / "r1.json").string(), dir) == 0,
          "advise run 1 failed");
  require(run_cli(advise_base + "--jobs 2 --out " + (dir / "r2.json").string(), dir) == 0,
          "advise run 2 failed");
  require(run_cli(advise_base + "--jobs 1 --out " + (dir / "r3.json").string(), dir) == 0,
          "advise run 3 failed");
  require(slurp(dir / "r1.json") == slurp(dir / "r2.json"),
          "advise reports differ across jobs levels");
  require(slurp(dir / "r1.json") == slurp(dir / "r3.json"),
          "advise reports differ across reruns");

  std::string eval_base = "evaluate --data " + (dir / "d1.csv").string() +
                          " --label label --configs " + (dir / "c1.json").string() +
                          " --seed 9 ";
  require(run_cli(eval_base + "--jobs 1 --out " + (dir / "e1").string(), dir) == 0,
          "evaluate run 1 failed");
  require(run_cli(eval_base + "--jobs 2 --out " + (dir / "e2").string(), dir) == 0,
          "evaluate run 2 failed");
  require(run_cli(eval_base + "--jobs 1 --out " + (dir / "e3").string(), dir) == 0,
          "evaluate run 3 failed");
  for (const char* f : {"records.ndjson", "summary.json"}) {
    require(slurp(dir / "e1" / f) == slurp(dir / "e2" / f),
            std::string(f) + " differs across jobs levels");
    require(slurp(dir / "e1" / f) == slurp(dir / "e3" / f),
            std::string(f) + " differs across reruns");
  }

  fs::remove_all(dir);
  return "gen-synth, gen-configs, advise, evaluate byte-identical across reruns and jobs";
}

}  // namespace

int main() {
  criterion(1, "running-example golden suite", golden_suite);
  criterion(2, "IPF feasibility suite", ipf_feasibility);
  criterion(3, "rounding unbiasedness", rounding_unbiasedness);
  criterion(4, "oracle equivalence of advise", oracle_equivalence);
  criterion(5, "reconstruction-quality ordering", quality_ordering);
  criterion(6, "scalability shape", scalability_shape);
  criterion(7, "cost structure of advise", cost_structure);
  criterion(8, "determinism of the CLI surface", determinism);

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
