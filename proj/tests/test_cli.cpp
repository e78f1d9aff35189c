#include <gtest/gtest.h>

#include <fstream>

#include "wrt/cli.hpp"

using namespace wrt;
using cli::Json;

namespace
{

std::filesystem::path scenario_path(std::string const &name)
{
  return std::filesystem::path(WRT_SCENARIO_DIR) / (name + ".json");
}

std::filesystem::path scratch_dir(std::string const &name)
{
  auto p = std::filesystem::temp_directory_path() / ("wrt_test_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string parse_message(std::string const &text)
{
  try
  {
    cli::parse_scenario_text(text, "s.json");
  }
  catch (ParseError const &e)
  {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Scenario, ParsesTwist)
{
  auto sc = cli::load_scenario(scenario_path("twist_g2_n1"));
  EXPECT_EQ(sc.name, "twist_g2_n1");
  EXPECT_TRUE(sc.has_sweep());
  EXPECT_EQ(sc.k0, 2);
  EXPECT_EQ(sc.s_max, 16);
  EXPECT_EQ(sc.surface().genus(), 2);
  EXPECT_EQ(sc.extract.order, 4);
}

TEST(Scenario, DiagnosticsNameTheField)
{
  auto msg = parse_message(R"({"schema_version": 1, "surface": {"genus": 2, "N": 2, "points": [{"alpha": [0.5]}]}})");
  EXPECT_NE(msg.find("surface.points[0].alpha[0]"), std::string::npos) << msg;

  msg = parse_message(R"({"schema_version": 1, "surface": {"N": 2}})");
  EXPECT_NE(msg.find("genus"), std::string::npos) << msg;
}

TEST(Scenario, MalformedJsonReportsLineAndColumn)
{
  auto msg = parse_message("{\n  \"schema_version\": 1,\n  \"name\": }\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Scenario, SchemaVersionIsChecked)
{
  EXPECT_NE(parse_message(R"({"name": "x"})").find("schema_version"), std::string::npos);
  EXPECT_NE(parse_message(R"({"schema_version": 7})").find("unsupported version"), std::string::npos);
}

TEST(Scenario, NameDefaultsToFileStem)
{
  auto dir = scratch_dir("stem");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "my_case.json") << R"({"schema_version": 1, "lie": {"N": 2, "k": 3}})";
  EXPECT_EQ(cli::load_scenario(dir / "my_case.json").name, "my_case");
  EXPECT_THROW(cli::load_scenario(dir / "missing.json"), cli::IoError);
}

TEST(Scenario, OverridesApply)
{
  auto sc = cli::load_scenario(scenario_path("twist_g2_n1"));
  cli::Overrides o;
  o.seed = 42;
  o.convention = PhaseConvention::cft;
  o.tolerance = 1e-4;
  cli::apply(sc, o);
  EXPECT_EQ(sc.seed, 42u);
  EXPECT_EQ(sc.convention, PhaseConvention::cft);
  EXPECT_DOUBLE_EQ(sc.tolerance, 1e-4);
}

TEST(ExitCodes, Taxonomy)
{
  EXPECT_EQ(cli::exit_code_for(ParseError("x")), cli::exit_parse);
  EXPECT_EQ(cli::exit_code_for(DomainError("x")), cli::exit_parse);
  EXPECT_EQ(cli::exit_code_for(AdmissibilityError("x")), cli::exit_admissibility);
  EXPECT_EQ(cli::exit_code_for(UnsupportedConfiguration("x")), cli::exit_unsupported);
  EXPECT_EQ(cli::exit_code_for(CapacityError("x")), cli::exit_unsupported);
  EXPECT_EQ(cli::exit_code_for(CollinearityError("x")), cli::exit_numerical);
  EXPECT_EQ(cli::exit_code_for(InvariantViolation("x")), cli::exit_invariant);
  EXPECT_EQ(cli::exit_code_for(EmptySweepError("x")), cli::exit_empty_sweep);
  EXPECT_EQ(cli::exit_code_for(ConsistencyError("x")), cli::exit_consistency);
  EXPECT_EQ(cli::exit_code_for(cli::IoError("x")), cli::exit_usage);
}

TEST(ExpectedPhase, ConventionsAreConjugate)
{
  auto sc = cli::load_scenario(scenario_path("twist_g2_n1"));
  EXPECT_EQ(cli::expected_phase(sc), Rational(15, 16));
  sc.convention = PhaseConvention::cft;
  EXPECT_EQ(cli::expected_phase(sc), Rational(1, 16));
}

TEST(VerifyAec, TwistPassesWithAnchoredChecks)
{
  auto rep = cli::verify_aec(cli::load_scenario(scenario_path("twist_g2_n1")), cli::Precision::extended);
  EXPECT_TRUE(rep.passed());
  for (auto id : {"phases", "leading-degree", "poincare-remainder"})
  {
    auto const *c = rep.find(id);
    ASSERT_NE(c, nullptr) << id;
    EXPECT_TRUE(c->pass) << id << ": " << c->note;
    EXPECT_FALSE(c->anchor.empty());
  }
  auto j = rep.json();
  EXPECT_EQ(j["schema_version"], cli::schema_version);
  EXPECT_EQ(j["checks"].size(), 3u);
}

TEST(VerifyAec, CftConventionPasses)
{
  auto sc = cli::load_scenario(scenario_path("twist_g2_n1"));
  sc.convention = PhaseConvention::cft;
  EXPECT_TRUE(cli::verify_aec(sc, cli::Precision::extended).passed());
}

TEST(VerifyAec, NegativeControlFailsPhaseCheck)
{
  auto rep = cli::verify_aec(cli::load_scenario(scenario_path("negative_control_g2_n1")), cli::Precision::extended);
  EXPECT_FALSE(rep.passed());
  ASSERT_NE(rep.find("phases"), nullptr);
  EXPECT_FALSE(rep.find("phases")->pass);
}

TEST(VerifyGrc, IdentityDegreeMatchesCohomology)
{
  auto rep = cli::verify_grc(cli::load_scenario(scenario_path("identity_g2_n1")), cli::Precision::extended);
  EXPECT_TRUE(rep.passed());
  auto const *c = rep.find("degree-vs-cohomology");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->observed, "4");
}

TEST(Commands, EmptySweepIsReported)
{
  auto sc = cli::load_scenario(scenario_path("empty_sweep"));
  cli::Context ctx{scratch_dir("empty")};
  try
  {
    cli::cmd_invariant(sc, ctx);
    FAIL() << "expected an empty sweep";
  }
  catch (std::exception const &e)
  {
    EXPECT_EQ(cli::exit_code_for(e), cli::exit_empty_sweep);
  }
}

TEST(Commands, LabelsJson)
{
  auto dir = scratch_dir("labels");
  EXPECT_EQ(cli::cmd_labels(cli::load_scenario(scenario_path("labels_su3_k1")), cli::Context{dir}), cli::exit_ok);
  std::ifstream in(dir / "labels.json");
  auto j = Json::parse(in);
  EXPECT_EQ(j["count"], 3);
  EXPECT_EQ(j["labels"].size(), 3u);
}

TEST(Commands, SequenceCsvRoundTrips)
{
  auto dir = scratch_dir("csv");
  auto sc = cli::load_scenario(scenario_path("twist_g2_n1"));
  EXPECT_EQ(cli::cmd_invariant(sc, cli::Context{dir}), cli::exit_ok);
  auto back = cli::read_sequence_csv(dir / "sequence.csv");
  auto direct = cli::sweep_values(sc, cli::sweep(sc, cli::Precision::extended));
  ASSERT_EQ(back.size(), direct.size());
  for (std::size_t i = 0; i < back.size(); ++i)
  {
    EXPECT_EQ(back.level(i), direct.level(i));
    EXPECT_LE(std::abs(back.value(i) - direct.value(i)), 1e-12L * std::abs(direct.value(i)));
  }
}

TEST(Commands, ExtractFromCsvMatchesSweep)
{
  auto dir = scratch_dir("extract");
  auto sc = cli::load_scenario(scenario_path("twist_g2_n1"));
  ASSERT_EQ(cli::cmd_invariant(sc, cli::Context{dir}), cli::exit_ok);
  auto from_csv = sc;
  from_csv.extract.input = dir / "sequence.csv";
  ASSERT_EQ(cli::cmd_extract(from_csv, cli::Context{dir / "csv"}), cli::exit_ok);
  ASSERT_EQ(cli::cmd_extract(sc, cli::Context{dir / "sweep"}), cli::exit_ok);
  std::ifstream a(dir / "csv" / "model.json"), b(dir / "sweep" / "model.json");
  auto ja = Json::parse(a), jb = Json::parse(b);
  EXPECT_EQ(ja["model"]["terms"][0]["q_fraction"], jb["model"]["terms"][0]["q_fraction"]);
  EXPECT_EQ(ja["model"]["terms"][0]["degree"], jb["model"]["terms"][0]["degree"]);
}

TEST(Commands, SeededRunsAreReproducible)
{
  auto sc = cli::load_scenario(scenario_path("identity_g2_n0"));
  auto a = cli::samples_json(cli::cohomology_samples(sc));
  auto b = cli::samples_json(cli::cohomology_samples(sc));
  EXPECT_EQ(a.dump(), b.dump());
}
