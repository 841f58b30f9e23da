#include <doctest.h>

#include "helpers/running_example.hpp"
#include "maskadv/rng.hpp"
#include "maskadv/serialization.hpp"

using namespace maskadv;

TEST_CASE("summary round trip") {
  Dataset d = testdata::running_example_dataset(true);
  std::vector<MarginalDistribution> marginals;
  for (const auto& a : d.attribute_names()) marginals.push_back(marginal(d, a));
  marginals.push_back(marginal(d, "Health"));

  Json j = summary_to_json(marginals);
  CHECK(j.at("total") == 100);
  CHECK(j.at("attributes").at("Age").at("10") == 4);
  CHECK(j.at("attributes").at("Age").at("80") == 10);

  auto parsed = summary_from_json(j);
  REQUIRE(parsed.size() == 4);
  const MarginalDistribution& age = parsed.at("Age");
  CHECK(age.domain.values() == marginals[0].domain.values());
  CHECK(age.counts == marginals[0].counts);

  SUBCASE("tampered counts are rejected") {
    j["attributes"]["Age"]["10"] = 5;  // sums no longer match total
    CHECK_THROWS_WITH_AS((void)summary_from_json(j), doctest::Contains("Age"),
                         std::runtime_error);
  }
}

TEST_CASE("joint round trip preserves cells bit for bit") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Index rows = 1 + static_cast<Index>(rng.below(6));
    Index cols = 1 + static_cast<Index>(rng.below(4));
    std::vector<std::string> rv, cv;
    for (Index r = 0; r < rows; ++r) rv.push_back("r" + std::to_string(r));
    for (Index c = 0; c < cols; ++c) cv.push_back("c" + std::to_string(c));
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = rng.unit() * 50;
    JointDistribution j = JointDistribution::make(
        AttributeDomain::from_values("a", rv), AttributeDomain::from_values("y", cv),
        m, m.sum());

    JointDistribution back = joint_from_json(joint_to_json(j));
    CHECK(back.cells == j.cells);
    CHECK(back.total == j.total);
    CHECK(back.row_domain.values() == j.row_domain.values());
  }
}

TEST_CASE("reconstructions serialize with their metadata block") {
  AttributeDomain age = testdata::age_health_joint().row_domain;
  InverseImage inv = inverse_image(testdata::young_old_mask(), age);
  IpfSettings settings;
  settings.rounding_seed = 7;
  ReconstructionResult r = reconstruct(
      ConstraintSet::without_marginal(testdata::masked_age_health_joint(), inv), settings);

  Json out = joint_to_json(r.fractional, reconstruction_metadata(r, "no-1d", 7));
  CHECK(out.at("metadata").at("case") == "no-1d");
  CHECK(out.at("metadata").at("iterations") == 1);
  CHECK(out.at("metadata").at("converged") == true);
  CHECK(out.at("metadata").at("seed") == 7);

  JointDistribution back = joint_from_json(out);
  CHECK(back.cells == r.fractional.cells);
}

TEST_CASE("configuration set round trip") {
  Dataset d = testdata::running_example_dataset(true);
  auto configs = generate_configurations(d, 10, 3);
  auto back = configs_from_json(configs_to_json(configs));
  CHECK(back == configs);

  SUBCASE("explicit generalize mapping and interval rules both survive") {
    MaskingConfiguration cfg{
        "cfg-x",
        {{"Age", testdata::young_old_mask()},
         {"Weight", MaskingFunction::generalize(
                        std::map<std::string, std::string>{{"30", "low"}, {"80", "high"}})},
         {"Zip", MaskingFunction::blur_prefix(3)}}};
    auto round = configs_from_json(configs_to_json({cfg}));
    REQUIRE(round.size() == 1);
    CHECK(round[0] == cfg);
    CHECK(apply_mask(round[0].function_for("Age"), "43") == "Young");
    CHECK(apply_mask(round[0].function_for("Age"), "99") == "Old");  // open upper end
  }

  SUBCASE("duplicate ids are rejected") {
    Json j = configs_to_json(configs);
    j.push_back(j[0]);
    CHECK_THROWS_WITH_AS((void)configs_from_json(j), doctest::Contains("duplicate"),
                         std::runtime_error);
  }

  SUBCASE("unknown kinds are rejected") {
    Json j = Json::array();
    j.push_back(Json{{"id", "cfg-0"},
                     {"assignments", Json::array({Json{{"attribute", "Age"},
                                                       {"kind", "tokenize"},
                                                       {"params", Json::object()}}})}});
    CHECK_THROWS_WITH_AS((void)configs_from_json(j),
                         doctest::Contains("unknown masking kind 'tokenize'"),
                         std::runtime_error);
  }
}

TEST_CASE("report serialization carries selection and numbers") {
  AdvisoryReport report;
  report.measure = UtilityMeasure::chi_square;
  report.case_label = "with-1d";
  report.per_config = {{"cfg-000", {{"Age", 1.5, 1.25, 0.25}}, 0.25},
                       {"cfg-001", {{"Age", 1.5, 1.5, 0.0}}, 0.0}};
  report.selected = "cfg-001";

  Json j = report_to_json(report);
  CHECK(j.at("measure") == "chi2");
  CHECK(j.at("selected") == "cfg-001");
  CHECK(j.at("per_config").size() == 2);
  CHECK(j.at("per_config")[0].at("per_attribute")[0].at("deviation") == 0.25);
}

TEST_CASE("benchmark records serialize without timings") {
  EvalRecord r;
  r.config_id = "cfg-000";
  r.attribute = "a";
  r.method = ReconstructionMethod::sampling;
  r.tvd = 0.5;
  r.times.masking_seconds = 123.0;

  Json canonical = record_to_json(r);
  CHECK(canonical.at("method") == "sampling");
  CHECK_FALSE(canonical.contains("masking_seconds"));
  Json timing = record_timing_to_json(r);
  CHECK(timing.at("masking_seconds") == 123.0);
}

TEST_CASE("domains file parses into canonical domains") {
  Json j{{"Age", {"80", "10", "17"}}, {"City", {"b", "a"}}};
  auto domains = domains_from_json(j);
  CHECK(domains.at("Age").values() == std::vector<std::string>{"10", "17", "80"});
  CHECK(domains.at("City").values() == std::vector<std::string>{"a", "b"});
}
