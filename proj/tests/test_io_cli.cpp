#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "commands.hpp"

using namespace singscat;
using io::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("singscat_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

double field(const json& j, const char* a, const char* b) { return j.at(a).at(b).get<double>(); }

}  // namespace

TEST(Serialization, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    double x = std::ldexp(mant(rng), expo(rng));
    EXPECT_EQ(std::stod(io::format_number(x)), x);
  }
  EXPECT_EQ(io::format_number(std::nan("")), "null");
}

TEST(Serialization, DumpIsStable) {
  json j{{"b", 0.1}, {"a", json::array({1, 2.5})}, {"c", json::object()}};
  EXPECT_EQ(io::dump(j), io::dump(io::parse_json_text(io::dump(j), "round trip")));
  EXPECT_NE(io::dump(j).find("0.10000000000000001"), std::string::npos);
}

TEST(PotentialFile, RoundTripAndValidation) {
  auto text = R"({"terms":[{"re":1,"im":0.5,"s":6},{"re":-0.2,"s":3,"tau":2}],"beta":0.1,
                  "table":{"r":[0.5,1,2],"v_re":[-1,-0.5,0],"interp":"linear"}})";
  auto pot = io::parse_potential(io::parse_json_text(text, "potential"));
  ASSERT_EQ(pot.terms.size(), 2u);
  EXPECT_EQ(pot.terms[0].strength, (cplx{1.0, 0.5}));
  EXPECT_EQ(*pot.terms[1].damping_scale, 2.0);
  auto again = io::parse_potential(io::potential_json(pot));
  for (double r : {0.3, 0.7, 1.5, 3.0}) EXPECT_EQ(again.value(r), pot.value(r));

  EXPECT_THROW(io::parse_json_text("{\"terms\": [", "bad"), DomainError);
  EXPECT_THROW(io::parse_potential(json{{"terms", json::array({json{{"re", 1}}})}}), DomainError);
  EXPECT_THROW(io::parse_potential(json{{"terms", json::array({json{{"re", "x"}, {"s", 6}}})}}), DomainError);
  EXPECT_THROW(io::parse_potential(json::array()), DomainError);
}

TEST(Manifest, RoundTripAndSchemaCheck) {
  io::RunManifest m;
  m.command = "length";
  m.inputs = json{{"alpha", 1.0}, {"s", 6.0}};
  m.outputs = {"length.json"};
  m.timestamp = "2026-01-01T00:00:00Z";
  auto back = io::RunManifest::from_json(io::parse_json_text(io::dump(m.to_json()), "manifest"));
  EXPECT_EQ(back.command, m.command);
  EXPECT_EQ(io::dump(back.inputs), io::dump(m.inputs));
  EXPECT_EQ(back.outputs, m.outputs);

  auto j = m.to_json();
  j["versions"]["schema"] = io::schema_version + 1;
  EXPECT_THROW(io::RunManifest::from_json(j), DomainError);
  EXPECT_THROW(io::RunManifest::from_json(json{{"inputs", json::object()}}), DomainError);
}

TEST(LimitConfig, RejectsUnknownFieldsAndBadModes) {
  json ok{{"potential", json{{"terms", json::array({json{{"re", 1}, {"s", 6}}})}}}};
  EXPECT_NO_THROW(cli::parse_limit_config(ok));
  json typo = ok;
  typo["tolerence"] = 1e-6;
  EXPECT_THROW(cli::parse_limit_config(typo), DomainError);
  json mode = ok;
  mode["mode"] = "sideways";
  EXPECT_THROW(cli::parse_limit_config(mode), DomainError);
  json missing = ok;
  missing["mode"] = "r0_sequence";
  EXPECT_THROW(cli::parse_limit_config(missing), DomainError);
}

TEST(Commands, LengthClosedFormExamples) {
  auto six = io::parse_json_text(cli::cmd_length(json{{"alpha", 1.0}, {"s", 6.0}, {"branch", "absorb"}}).text, "out");
  EXPECT_NEAR(field(six, "scattering_length", "re"), 0.478, 5e-4);
  EXPECT_NEAR(field(six, "scattering_length", "im"), -0.478, 5e-4);
  auto four = io::parse_json_text(cli::cmd_length(json{{"alpha", 1.0}, {"s", 4.0}}).text, "out");
  EXPECT_NEAR(field(four, "scattering_length", "re"), 0.0, 1e-14);
  EXPECT_NEAR(field(four, "scattering_length", "im"), -1.0, 1e-14);
  try {
    cli::cmd_length(json{{"alpha", 1.0}, {"s", 3.0}});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "scattering length undefined for s ≤ 3");
  }
}

TEST(Commands, LengthNumericReportsDeviation) {
  auto out = io::parse_json_text(
      cli::cmd_length(json{{"alpha", 1.0}, {"s", 6.0}, {"branch", "create"}, {"numeric", true}}).text, "out");
  EXPECT_LT(out.at("relative_deviation").get<double>(), 1e-3);
  EXPECT_GT(field(out, "scattering_length", "im"), 0.0);
  EXPECT_EQ(out.at("provenance").at("boundary_mode"), "creation");
}

TEST(Commands, PhaseS2Examples) {
  auto half = io::parse_json_text(cli::cmd_phase_s2(json{{"alpha2", 0.5}}).text, "out");
  EXPECT_NEAR(half.at("s_matrix_modulus").get<double>(), 0.2079, 5e-5);
  auto crit = io::parse_json_text(cli::cmd_phase_s2(json{{"alpha2", 0.25}}).text, "out");
  EXPECT_EQ(crit.at("s_matrix_modulus").get<double>(), 1.0);
  EXPECT_THROW(cli::cmd_phase_s2(json{{"alpha2", 0.2}}), DomainError);
  auto num = io::parse_json_text(cli::cmd_phase_s2(json{{"alpha2", 2.0}, {"numeric", true}}).text, "out");
  EXPECT_TRUE(num.at("provenance").at("energy_independent").get<bool>());
}

TEST(Commands, SpectrumRows) {
  auto csv = cli::cmd_spectrum(json{{"alpha2", 0.5}, {"nr_max", 0}}).text;
  EXPECT_EQ(csv, "n_r,re_E,im_E,width\n0,-0.5,-0.5,1\n");
  auto near_critical = cli::cmd_spectrum(json{{"alpha2", 0.25}, {"nr_max", 3}}).text;
  EXPECT_EQ(std::count(near_critical.begin(), near_critical.end(), '\n'), 5);
  EXPECT_EQ(near_critical.find("-0,"), std::string::npos);
}

TEST(Commands, HhbarScalingIsExact) {
  auto out = io::parse_json_text(cli::cmd_hhbar(json{{"c6", 1.0}, {"n", json::array({1.0, 2.0})}}).text, "out");
  double a1 = field(out.at("n_scaling")[0], "scattering_length", "re");
  double a2 = field(out.at("n_scaling")[1], "scattering_length", "re");
  EXPECT_EQ(a2, 2.0 * a1);
  EXPECT_THROW(cli::cmd_hhbar(json{{"c6", 0.0}}), DomainError);
}

TEST(Commands, PerturbBadLevelIsDomainError) {
  json pot{{"terms", json::array({json{{"re", 1e-3}, {"s", 6}}})},
           {"table", json{{"r", json::array({1e-6, 4.47213595499958})},
                          {"v_re", json::array({-0.255793, -0.255793})},
                          {"interp", "linear"}}}};
  EXPECT_THROW(cli::cmd_perturb(json{{"potential", pot}, {"level", 5}}), DomainError);
}

TEST(Replay, ReproducesOutputsAndDetectsTampering) {
  auto dir = scratch_dir("replay");
  json inputs{{"alpha2", 0.7}, {"nr_max", 4}, {"branch", "create"}};
  auto out = cli::execute("spectrum", inputs);
  cli::write_outputs("spectrum", inputs, out, dir);
  auto ok = cli::replay(dir / "manifest.json");
  EXPECT_TRUE(ok.ok());
  EXPECT_EQ(ok.identical, std::vector<std::string>{"spectrum.csv"});

  io::write_file((dir / "spectrum.csv").string(), "tampered\n");
  EXPECT_FALSE(cli::replay(dir / "manifest.json").ok());
  std::filesystem::remove_all(dir);
}

TEST(Replay, SweepIsByteIdenticalAcrossWorkerCounts) {
  auto dir = scratch_dir("sweep");
  json config{{"potential", json{{"terms", json::array({json{{"re", 1.0}, {"s", 6}}})}}},
              {"omega", json{{"start", 0.5}, {"ratio", 0.5}, {"count", 6}}},
              {"tolerance", 1e-4}};
  json inputs{{"config", config}};
  cli::write_outputs("sweep", inputs, cli::execute("sweep", inputs, 1), dir);
  EXPECT_TRUE(cli::replay(dir / "manifest.json", 3).ok());
  std::filesystem::remove_all(dir);
}
