#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "wrt/cli.hpp"

namespace
{

using Command = int (*)(wrt::cli::Scenario const &, wrt::cli::Context const &);

struct Outcome
{
  int code = 0;
  std::string log;
  std::string error;
};

Outcome run_one(Command command, std::filesystem::path const &path, wrt::cli::Overrides const &overrides,
                std::filesystem::path const &out_dir, bool per_scenario_dir, wrt::cli::Precision precision)
{
  Outcome o;
  std::ostringstream log;
  try
  {
    auto sc = wrt::cli::load_scenario(path);
    wrt::cli::apply(sc, overrides);
    wrt::cli::Context ctx{per_scenario_dir ? out_dir / sc.name : out_dir, precision, &log};
    o.code = command(sc, ctx);
  }
  catch (std::exception const &e)
  {
    o.code = wrt::cli::exit_code_for(e);
    o.error = path.string() + ": " + e.what();
  }
  o.log = log.str();
  return o;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Quantum invariants of mapping tori: modular data, level sweeps, cohomology and asymptotics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer("Exit codes: 0 ok, 1 usage/io, 2 parse, 3 admissibility, 4 unsupported, 5 numerical,\n"
             "6 invariant violation, 7 empty sweep, 8 consistency, 9 verification FAIL.\n"
             "Default output directory: $" +
             std::string(wrt::cli::out_dir_variable) + " or ./wrt-out.");

  std::vector<std::string> scenarios;
  std::string out;
  std::uint64_t seed = 0;
  std::string convention;
  double tolerance = 0;
  std::string precision = "extended";

  app.add_option("--scenario", scenarios, "scenario JSON file; repeat to run several concurrently")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  auto *seed_opt = app.add_option("--seed", seed, "seed for representation sampling");
  app.add_option("--convention", convention, "phase convention")->check(CLI::IsMember({"cs", "cft"}));
  auto *tol_opt = app.add_option("--tolerance", tolerance, "comparison tolerance")->check(CLI::PositiveNumber);
  app.add_option("--precision", precision, "floating-point precision")->check(CLI::IsMember({"double", "extended"}));

  std::map<std::string, Command> const commands{
      {"labels", wrt::cli::cmd_labels},         {"modular", wrt::cli::cmd_modular},
      {"verlinde", wrt::cli::cmd_verlinde},     {"invariant", wrt::cli::cmd_invariant},
      {"cohomology", wrt::cli::cmd_cohomology}, {"extract", wrt::cli::cmd_extract},
      {"verify-aec", wrt::cli::cmd_verify_aec}, {"verify-grc", wrt::cli::cmd_verify_grc}};
  std::map<std::string, std::string> const help{
      {"labels", "level-k label set with conformal weights"},
      {"modular", "S and T matrices with unitarity, modular-relation and fusion checks"},
      {"verlinde", "conformal-block dimension"},
      {"invariant", "invariant sweep over k = s k0, written as CSV"},
      {"cohomology", "H0 and parabolic H1 of sampled representations and of the mapping torus"},
      {"extract", "phase detection and asymptotic model fit of a sweep or CSV sequence"},
      {"verify-aec", "phases, leading degree and Poincare remainder against the predictions"},
      {"verify-grc", "growth degree against half the 1-eigenspace dimension"}};
  for (auto const &[name, text] : help)
    app.add_subcommand(name, text);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int code = app.exit(e);
    return code == 0 ? 0 : wrt::cli::exit_usage;
  }

  wrt::cli::Overrides overrides;
  if (seed_opt->count())
    overrides.seed = seed;
  if (!convention.empty())
    overrides.convention = wrt::parse_convention(convention);
  if (tol_opt->count())
    overrides.tolerance = tolerance;
  auto const prec = wrt::cli::parse_precision(precision);
  std::filesystem::path const out_dir = out.empty() ? wrt::cli::default_out_dir() : std::filesystem::path(out);
  Command const command = commands.at(app.get_subcommands().front()->get_name());

  bool const many = scenarios.size() > 1;
  std::vector<std::future<Outcome>> jobs;
  for (auto const &s : scenarios)
    jobs.push_back(std::async(std::launch::async, run_one, command, std::filesystem::path(s), overrides, out_dir,
                              many, prec));
  int code = 0;
  for (auto &j : jobs)
  {
    auto o = j.get();
    std::cout << o.log;
    if (!o.error.empty())
      std::cerr << "error: " << o.error << '\n';
    if (code == 0)
      code = o.code;
  }
  return code;
}
