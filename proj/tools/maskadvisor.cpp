#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "maskadv/csv.hpp"
#include "maskadv/data_model.hpp"
#include "maskadv/evaluation.hpp"
#include "maskadv/masking.hpp"
#include "maskadv/serialization.hpp"
#include "maskadv/utility.hpp"

namespace fs = std::filesystem;
using namespace maskadv;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string sanitize(std::string_view name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                          c == '-'
                      ? c
                      : '_');
  return out;
}

Dataset load_csv(const std::string& path, const std::string& label,
                 std::optional<int> bins = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_dataset(in, label, {.bins = bins});
}

void write_manifest(const std::string& path, const std::string& command,
                    const Json& inputs, const std::vector<std::string>& outputs) {
  write_json_file(path, Json{{"tool", "maskadvisor"},
                             {"version", kToolVersion},
                             {"command", command},
                             {"inputs", inputs},
                             {"outputs", outputs}});
}

struct IpfFlags {
  double tolerance = 1e-9;
  int max_iters = 1000;
  std::uint64_t seed = 0;
  int jobs = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tolerance", tolerance, "IPF convergence tolerance, relative to N");
    cmd->add_option("--max-iters", max_iters, "IPF sweep limit");
    cmd->add_option("--seed", seed, "master seed for all randomized steps");
    cmd->add_option("--jobs", jobs, "parallel workers for per-(config, attribute) fan-out");
  }

  IpfSettings settings() const {
    IpfSettings s;
    s.tolerance = tolerance;
    s.max_iterations = max_iters;
    s.rounding_seed = seed;
    return s;
  }
};

std::optional<int> bins_option(int bins) {
  return bins > 0 ? std::optional<int>(bins) : std::nullopt;
}

std::vector<MaskingConfiguration> load_configs(const std::string& path) {
  auto configs = configs_from_json(load_json_file(path));
  if (configs.empty()) throw std::runtime_error("configuration set in '" + path + "' is empty");
  return configs;
}

void print_report_table(const AdvisoryReport& report) {
  std::size_t width = 8;
  for (const auto& o : report.per_config) width = std::max(width, o.config_id.size());
  std::printf("measure: %s   case: %s\n", std::string(to_string(report.measure)).c_str(),
              report.case_label.c_str());
  std::printf("%-*s  %18s\n", static_cast<int>(width), "config", "total-deviation");
  for (const auto& o : report.per_config)
    std::printf("%-*s  %18.12g%s\n", static_cast<int>(width), o.config_id.c_str(),
                o.total_deviation, o.config_id == report.selected ? "  *" : "");
  std::printf("%s\n", report.selected.c_str());
}

// ---- summarize ----------------------------------------------------------

struct SummarizeArgs {
  std::string data, label, out;
  int bins = 0;
};

void run_summarize(const SummarizeArgs& a) {
  Dataset d = load_csv(a.data, a.label, bins_option(a.bins));
  std::vector<MarginalDistribution> marginals;
  for (const auto& name : d.attribute_names()) marginals.push_back(marginal(d, name));
  marginals.push_back(marginal(d, a.label));
  write_json_file(a.out, summary_to_json(marginals));
  Json inputs{{"data", a.data}, {"label", a.label}};
  if (a.bins > 0) inputs["bins"] = a.bins;
  write_manifest(a.out + ".manifest.json", "summarize", inputs, {a.out});
}

// ---- advise -------------------------------------------------------------

struct AdviseArgs {
  std::string data, label, configs, masked_dir, summaries, domains;
  std::string measure = "mi";
  std::string case_mode = "with-1d";
  std::string out, emit_masked;
  int bins = 0;
  IpfFlags ipf;
};

std::string masked_joint_path(const std::string& dir, const std::string& config_id,
                              const std::string& attribute) {
  return (fs::path(dir) / sanitize(config_id) / (sanitize(attribute) + ".json")).string();
}

void run_advise(const AdviseArgs& a) {
  const bool provider = !a.data.empty();
  const bool with_1d = a.case_mode == "with-1d";
  UtilityMeasure measure = *measure_from_string(a.measure);
  auto configs = load_configs(a.configs);

  AdvisoryReport report;
  AdviseStats stats;

  if (provider) {
    if (a.label.empty()) throw CLI::ValidationError("--label is required with --data");
    Dataset d = load_csv(a.data, a.label, bins_option(a.bins));

    if (!a.emit_masked.empty()) {
      fs::create_directories(a.emit_masked);
      for (const auto& config : configs) {
        validate_configuration(config, d.attribute_names(), d.label_name());
        fs::create_directories(fs::path(a.emit_masked) / sanitize(config.id));
        for (const auto& attr : d.attribute_names())
          write_json_file(masked_joint_path(a.emit_masked, config.id, attr),
                          joint_to_json(masked_joint(d, attr, config.function_for(attr))));
      }
    }

    ProviderOptions options;
    options.with_marginals = with_1d;
    options.measure = measure;
    options.settings = a.ipf.settings();
    options.jobs = a.ipf.jobs;
    report = advise_from_data(d, configs, options, &stats);
  } else {
    if (a.masked_dir.empty())
      throw CLI::ValidationError("middleware mode needs --masked-dir (or use --data)");
    if (with_1d && a.summaries.empty())
      throw CLI::ValidationError("--case with-1d needs --summaries in middleware mode");
    if (!with_1d && a.domains.empty() && a.summaries.empty())
      throw CLI::ValidationError(
          "--case no-1d needs --domains (or --summaries) in middleware mode");

    std::map<std::string, MarginalDistribution> summaries;
    if (!a.summaries.empty()) summaries = summary_from_json(load_json_file(a.summaries));
    std::map<std::string, AttributeDomain> domains;
    if (!a.domains.empty()) domains = domains_from_json(load_json_file(a.domains));

    std::vector<std::string> attributes;
    for (const auto& [attr, f] : configs.front().assignments) attributes.push_back(attr);

    auto domain_of = [&](const std::string& attr) -> const AttributeDomain& {
      if (auto it = domains.find(attr); it != domains.end()) return it->second;
      if (auto it = summaries.find(attr); it != summaries.end()) return it->second.domain;
      throw std::runtime_error("no domain information for attribute '" + attr + "'");
    };

    std::vector<std::vector<ReconstructionInput>> inputs;
    inputs.reserve(configs.size());
    for (const auto& config : configs) {
      std::vector<ReconstructionInput> row;
      for (const auto& attr : attributes) {
        std::string path = masked_joint_path(a.masked_dir, config.id, attr);
        if (!fs::exists(path))
          throw std::runtime_error("missing masked joint for configuration '" + config.id +
                                   "', attribute '" + attr + "': expected " + path);
        ReconstructionInput in{joint_from_json(load_json_file(path)),
                               inverse_image(config.function_for(attr), domain_of(attr)),
                               std::nullopt};
        if (with_1d) {
          auto it = summaries.find(attr);
          if (it == summaries.end())
            throw std::runtime_error("summaries file has no attribute '" + attr + "'");
          in.marginal = it->second;
        }
        row.push_back(std::move(in));
      }
      inputs.push_back(std::move(row));
    }
    report =
        advise(attributes, configs, inputs, measure, a.ipf.settings(), a.ipf.jobs, &stats);
  }

  write_json_file(a.out, report_to_json(report));
  Json manifest_inputs{{"configs", a.configs},   {"measure", a.measure},
                       {"case", a.case_mode},    {"seed", a.ipf.seed},
                       {"tolerance", a.ipf.tolerance}, {"max_iters", a.ipf.max_iters},
                       {"jobs", a.ipf.jobs}};
  if (provider) {
    manifest_inputs["data"] = a.data;
    manifest_inputs["label"] = a.label;
  } else {
    manifest_inputs["masked_dir"] = a.masked_dir;
    if (!a.summaries.empty()) manifest_inputs["summaries"] = a.summaries;
    if (!a.domains.empty()) manifest_inputs["domains"] = a.domains;
  }
  write_manifest(a.out + ".manifest.json", "advise", manifest_inputs, {a.out});

  std::fprintf(stderr, "timing: masking %.3fs, reconstruction %.3fs, utility %.3fs\n",
               stats.masking_seconds, stats.reconstruction_seconds, stats.utility_seconds);
  print_report_table(report);
}

// ---- mask ---------------------------------------------------------------

struct MaskArgs {
  std::string data, label, configs, id, out;
  int bins = 0;
};

void run_mask(const MaskArgs& a) {
  Dataset d = load_csv(a.data, a.label, bins_option(a.bins));
  auto configs = load_configs(a.configs);
  const MaskingConfiguration* config = nullptr;
  if (!a.id.empty()) {
    for (const auto& c : configs)
      if (c.id == a.id) config = &c;
    if (!config) throw std::runtime_error("no configuration with id '" + a.id + "'");
  } else if (configs.size() == 1) {
    config = &configs.front();
  } else {
    throw CLI::ValidationError("--id is required when the set holds several configurations");
  }
  validate_configuration(*config, d.attribute_names(), d.label_name());

  // Per-column masked-value tables; rows are then streamed through them.
  std::vector<std::vector<std::string>> lut(static_cast<std::size_t>(d.attribute_count()));
  for (Index c = 0; c < d.attribute_count(); ++c) {
    const AttributeDomain& dom = d.attribute_domain(c);
    const MaskingFunction& f =
        config->function_for(d.attribute_names()[static_cast<std::size_t>(c)]);
    for (Index v = 0; v < dom.size(); ++v)
      lut[static_cast<std::size_t>(c)].push_back(apply_mask(f, dom.value(v)));
  }

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + a.out + "'");
  std::vector<std::string> row = d.attribute_names();
  row.push_back(d.label_name());
  csv::write_row(out, row);
  for (Index i = 0; i < d.row_count(); ++i) {
    row.clear();
    for (Index c = 0; c < d.attribute_count(); ++c)
      row.push_back(
          lut[static_cast<std::size_t>(c)][d.codes(c)[static_cast<std::size_t>(i)]]);
    row.push_back(d.label_value(i));
    csv::write_row(out, row);
  }
  out.close();
  write_manifest(a.out + ".manifest.json", "mask",
                 Json{{"data", a.data},
                      {"label", a.label},
                      {"configs", a.configs},
                      {"id", config->id}},
                 {a.out});
}

// ---- gen-configs --------------------------------------------------------

struct GenConfigsArgs {
  std::string data, label, out;
  int bins = 0;
  int k = 50;
  std::uint64_t seed = 0;
  double suppress_prob = 0.15;
};

void run_gen_configs(const GenConfigsArgs& a) {
  Dataset d = load_csv(a.data, a.label, bins_option(a.bins));
  GeneratorPolicy policy;
  policy.suppress_probability = a.suppress_prob;
  auto configs = generate_configurations(d, a.k, a.seed, policy);
  write_json_file(a.out, configs_to_json(configs));
  write_manifest(a.out + ".manifest.json", "gen-configs",
                 Json{{"data", a.data},
                      {"label", a.label},
                      {"k", a.k},
                      {"seed", a.seed},
                      {"suppress_prob", a.suppress_prob}},
                 {a.out});
}

// ---- gen-synth ----------------------------------------------------------

struct GenSynthArgs {
  std::string out;
  std::int64_t rows = 1000;
  std::int64_t attrs = 5;
  std::int64_t domain_size = 20;
  std::int64_t classes = 4;
  double gamma = 0.7;
  std::uint64_t seed = 0;
};

void run_gen_synth(const GenSynthArgs& a) {
  SynthSpec spec;
  spec.rows = a.rows;
  spec.attributes = a.attrs;
  spec.domain_size = a.domain_size;
  spec.label_classes = a.classes;
  spec.correlation = a.gamma;
  spec.seed = a.seed;
  Dataset d = generate_synthetic(spec);

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + a.out + "'");
  std::vector<std::string> header = d.attribute_names();
  header.push_back(d.label_name());
  csv::write_row(out, header);
  for (Index i = 0; i < d.row_count(); ++i) {
    out << d.value(i, 0);
    for (Index c = 1; c < d.attribute_count(); ++c) out << ',' << d.value(i, c);
    out << ',' << d.label_value(i) << '\n';
  }
  out.close();
  write_manifest(a.out + ".manifest.json", "gen-synth",
                 Json{{"rows", a.rows},
                      {"attrs", a.attrs},
                      {"domain_size", a.domain_size},
                      {"classes", a.classes},
                      {"gamma", a.gamma},
                      {"seed", a.seed}},
                 {a.out});
}

// ---- evaluate -----------------------------------------------------------

struct EvaluateArgs {
  std::string data, label, configs, out, csv_path;
  int bins = 0;
  std::string measures = "mi,chi2,g3";
  std::string methods = "ipf-with-1d,ipf-no-1d,sampling";
  IpfFlags ipf;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  for (char c : s) {
    if (c == ',') {
      out.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  out.push_back(token);
  return out;
}

void run_evaluate(const EvaluateArgs& a) {
  BenchmarkOptions options;
  options.measures.clear();
  for (const auto& name : split_list(a.measures)) {
    auto m = measure_from_string(name);
    if (!m) throw CLI::ValidationError("--measures: unknown measure '" + name + "'");
    options.measures.push_back(*m);
  }
  options.methods.clear();
  for (const auto& name : split_list(a.methods)) {
    auto m = method_from_string(name);
    if (!m) throw CLI::ValidationError("--methods: unknown method '" + name + "'");
    options.methods.push_back(*m);
  }
  options.settings = a.ipf.settings();
  options.seed = a.ipf.seed;
  options.jobs = a.ipf.jobs;

  Dataset d = load_csv(a.data, a.label, bins_option(a.bins));
  auto configs = load_configs(a.configs);
  BenchmarkResult result = run_benchmark(d, configs, options);

  fs::create_directories(a.out);
  std::string records_path = (fs::path(a.out) / "records.ndjson").string();
  std::string timings_path = (fs::path(a.out) / "timings.ndjson").string();
  std::string summary_path = (fs::path(a.out) / "summary.json").string();
  {
    std::ofstream records(records_path, std::ios::binary);
    std::ofstream timings(timings_path, std::ios::binary);
    for (const auto& r : result.records) {
      records << record_to_json(r).dump() << '\n';
      timings << record_timing_to_json(r).dump() << '\n';
    }
  }
  write_json_file(summary_path, benchmark_summary_to_json(result.summary));

  std::vector<std::string> outputs{records_path, summary_path};
  if (!a.csv_path.empty()) {
    std::ofstream csv_out(a.csv_path, std::ios::binary);
    if (!csv_out) throw std::runtime_error("cannot write '" + a.csv_path + "'");
    csv_out << "config,attribute,method,tvd,iterations,converged\n";
    for (const auto& r : result.records) {
      std::vector<std::string> row{r.config_id,
                                   r.attribute,
                                   std::string(to_string(r.method)),
                                   format_number(r.tvd),
                                   std::to_string(r.iterations),
                                   r.converged ? "true" : "false"};
      csv::write_row(csv_out, row);
    }
    outputs.push_back(a.csv_path);
  }

  write_manifest((fs::path(a.out) / "manifest.json").string(), "evaluate",
                 Json{{"data", a.data},
                      {"label", a.label},
                      {"configs", a.configs},
                      {"measures", a.measures},
                      {"methods", a.methods},
                      {"seed", a.ipf.seed},
                      {"tolerance", a.ipf.tolerance},
                      {"max_iters", a.ipf.max_iters},
                      {"jobs", a.ipf.jobs}},
                 outputs);

  for (const auto& [method, q] : result.summary)
    std::printf("%-12s median-tvd %.6f (p25 %.6f, p75 %.6f)\n", method.c_str(), q.median,
                q.p25, q.p75);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masking-configuration advisor for tabular ML datasets"};
  app.set_version_flag("--version", std::string("maskadvisor ") + kToolVersion);
  app.require_subcommand(1);

  SummarizeArgs summarize_args;
  auto* summarize = app.add_subcommand(
      "summarize", "write per-attribute value histograms for a CSV dataset");
  summarize->add_option("--data", summarize_args.data, "input CSV")->required();
  summarize->add_option("--label", summarize_args.label, "label column")->required();
  summarize->add_option("--out", summarize_args.out, "summary JSON path")->required();
  summarize->add_option("--bins", summarize_args.bins, "equal-width bins for all-numeric feature columns");

  AdviseArgs advise_args;
  auto* advise_cmd = app.add_subcommand(
      "advise", "select the masking configuration with the least utility deviation");
  advise_cmd->add_option("--data", advise_args.data, "raw CSV (provider mode)");
  advise_cmd->add_option("--label", advise_args.label, "label column (provider mode)");
  advise_cmd->add_option("--masked-dir", advise_args.masked_dir,
                         "directory of per-(config, attribute) masked joints (middleware mode)");
  advise_cmd->add_option("--summaries", advise_args.summaries,
                         "summary JSON with 1D histograms (middleware, case with-1d)");
  advise_cmd->add_option("--domains", advise_args.domains,
                         "domains JSON {attribute: [values]} (middleware, case no-1d)");
  advise_cmd->add_option("--configs", advise_args.configs, "configuration set JSON")
      ->required();
  advise_cmd->add_option("--measure", advise_args.measure, "utility measure")
      ->check(CLI::IsMember({"mi", "chi2", "g3"}));
  advise_cmd->add_option("--case", advise_args.case_mode, "marginal availability")
      ->check(CLI::IsMember({"with-1d", "no-1d"}));
  advise_cmd->add_option("--out", advise_args.out, "report JSON path")->required();
  advise_cmd->add_option("--emit-masked", advise_args.emit_masked,
                         "also write the masked joints (provider mode)");
  advise_cmd->add_option("--bins", advise_args.bins, "equal-width bins for all-numeric feature columns");
  advise_args.ipf.attach(advise_cmd);

  MaskArgs mask_args;
  auto* mask_cmd =
      app.add_subcommand("mask", "materialize a masked copy of the dataset (export path)");
  mask_cmd->add_option("--data", mask_args.data, "input CSV")->required();
  mask_cmd->add_option("--label", mask_args.label, "label column")->required();
  mask_cmd->add_option("--configs", mask_args.configs, "configuration set JSON")->required();
  mask_cmd->add_option("--id", mask_args.id, "configuration id to apply");
  mask_cmd->add_option("--out", mask_args.out, "masked CSV path")->required();
  mask_cmd->add_option("--bins", mask_args.bins, "equal-width bins for all-numeric feature columns");

  GenConfigsArgs gen_configs_args;
  auto* gen_configs =
      app.add_subcommand("gen-configs", "generate a random masking configuration set");
  gen_configs->add_option("--data", gen_configs_args.data, "input CSV")->required();
  gen_configs->add_option("--label", gen_configs_args.label, "label column")->required();
  gen_configs->add_option("--k", gen_configs_args.k, "number of configurations");
  gen_configs->add_option("--seed", gen_configs_args.seed, "generator seed");
  gen_configs->add_option("--suppress-prob", gen_configs_args.suppress_prob,
                          "per-attribute suppression probability");
  gen_configs->add_option("--out", gen_configs_args.out, "configuration set path")
      ->required();
  gen_configs->add_option("--bins", gen_configs_args.bins, "equal-width bins for all-numeric feature columns");

  GenSynthArgs gen_synth_args;
  auto* gen_synth = app.add_subcommand("gen-synth", "generate a synthetic CSV dataset");
  gen_synth->add_option("--rows", gen_synth_args.rows, "record count");
  gen_synth->add_option("--attrs", gen_synth_args.attrs, "attribute count");
  gen_synth->add_option("--domain-size", gen_synth_args.domain_size, "values per attribute");
  gen_synth->add_option("--classes", gen_synth_args.classes, "label classes");
  gen_synth->add_option("--gamma", gen_synth_args.gamma, "label correlation in [0,1]");
  gen_synth->add_option("--seed", gen_synth_args.seed, "generator seed");
  gen_synth->add_option("--out", gen_synth_args.out, "output CSV path")->required();

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand(
      "evaluate", "ground-truth TVD benchmark of the reconstruction methods");
  evaluate->add_option("--data", evaluate_args.data, "input CSV")->required();
  evaluate->add_option("--label", evaluate_args.label, "label column")->required();
  evaluate->add_option("--configs", evaluate_args.configs, "configuration set JSON")
      ->required();
  evaluate->add_option("--measures", evaluate_args.measures, "comma list of measures");
  evaluate->add_option("--methods", evaluate_args.methods, "comma list of methods");
  evaluate->add_option("--out", evaluate_args.out, "output directory")->required();
  evaluate->add_option("--csv", evaluate_args.csv_path, "also write records as CSV");
  evaluate->add_option("--bins", evaluate_args.bins, "equal-width bins for all-numeric feature columns");
  evaluate_args.ipf.attach(evaluate);

  summarize->callback([&] { run_summarize(summarize_args); });
  advise_cmd->callback([&] { run_advise(advise_args); });
  mask_cmd->callback([&] { run_mask(mask_args); });
  gen_configs->callback([&] { run_gen_configs(gen_configs_args); });
  gen_synth->callback([&] { run_gen_synth(gen_synth_args); });
  evaluate->callback([&] { run_evaluate(evaluate_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
