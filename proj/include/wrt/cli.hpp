#pragma once

// Scenario files and the commands of the wrt tool.  Each command reads the
// fragments of a scenario it needs, writes JSON/CSV artifacts into an output
// directory and returns an exit code from the table below.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asymptotics.hpp"
#include "cs_values.hpp"
#include "errors.hpp"
#include "invariants.hpp"
#include "lie_data.hpp"
#include "modular.hpp"
#include "repvar.hpp"
#include "sampling.hpp"
#include "surfaces.hpp"

namespace wrt::cli
{

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;
inline constexpr char const *out_dir_variable = "WRT_OUT_DIR";

enum ExitCode : int
{
  exit_ok = 0,
  exit_usage = 1,         // bad flags, unreadable or unwritable files
  exit_parse = 2,         // malformed scenario or invalid values in it
  exit_admissibility = 3, // a requested level is not admissible
  exit_unsupported = 4,   // configuration outside the implemented cases
  exit_numerical = 5,     // precision budget exceeded or a numerical method failed
  exit_invariant = 6,     // an internal cross-check disagreed
  exit_empty_sweep = 7,   // no admissible level in the sweep
  exit_consistency = 8,   // representation and mapping data do not match
  exit_verification = 9   // a verify command produced a FAIL report
};

inline int exit_code_for(std::exception const &e)
{
  if (dynamic_cast<ParseError const *>(&e) || dynamic_cast<DomainError const *>(&e) ||
      dynamic_cast<DimensionError const *>(&e) || dynamic_cast<WordError const *>(&e))
    return exit_parse;
  if (dynamic_cast<AdmissibilityError const *>(&e))
    return exit_admissibility;
  if (dynamic_cast<UnsupportedConfiguration const *>(&e) || dynamic_cast<CapacityError const *>(&e))
    return exit_unsupported;
  if (dynamic_cast<EmptySweepError const *>(&e))
    return exit_empty_sweep;
  if (dynamic_cast<InvariantViolation const *>(&e))
    return exit_invariant;
  if (dynamic_cast<ConsistencyError const *>(&e))
    return exit_consistency;
  if (dynamic_cast<Error const *>(&e))
    return exit_numerical;
  return exit_usage;
}

enum class Precision
{
  double_precision,
  extended
};

inline Precision parse_precision(std::string const &s)
{
  if (s == "double")
    return Precision::double_precision;
  if (s == "extended")
    return Precision::extended;
  throw ParseError("precision must be 'double' or 'extended', got '" + s + "'");
}

inline std::string to_string(Precision p) { return p == Precision::extended ? "extended" : "double"; }

struct ExtractSettings
{
  int max_terms = 1;
  int order = 4;
  std::optional<Rational> degree_bound; // default: from the growth estimate
  Rational step{1};
  int holdout = 2;                      // trailing levels kept out of the Poincare fit
  std::optional<std::filesystem::path> input;
};

struct SampleSettings
{
  int irreducible = 0;
  int torus = 0;
  bool trivial = false;
  std::size_t count() const { return static_cast<std::size_t>(irreducible + torus) + (trivial ? 1 : 0); }
};

struct LieSpec
{
  int n = 2;
  int k = 1;
};

struct VerlindeSpec
{
  int genus = 0;
  int n = 2;
  int k = 1;
  std::vector<Weight> labels;
};

struct Scenario
{
  std::string name;
  std::optional<SurfaceMarking> marking;
  MappingClassSpec mapping_class = MappingClassSpec::identity();
  int k0 = 0;
  int s_max = 0;
  PhaseConvention convention = PhaseConvention::cs;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  double inject_phase = 0;
  ExtractSettings extract;
  SampleSettings samples;
  std::optional<LieSpec> lie;
  std::optional<VerlindeSpec> verlinde;
  std::filesystem::path source;

  SurfaceMarking const &surface() const
  {
    if (!marking)
      throw ParseError(name + ": scenario has no 'surface' section");
    return *marking;
  }
  bool has_sweep() const { return s_max > 0; }
};

// ---- parsing ------------------------------------------------------------------

namespace detail
{

inline std::string join(std::string const &path, std::string const &key)
{
  return path.empty() ? key : path + "." + key;
}

inline Json const *find(Json const &node, std::string const &key)
{
  auto it = node.find(key);
  return it == node.end() ? nullptr : &*it;
}

inline Json const &require(Json const &node, std::string const &key, std::string const &path)
{
  if (!node.is_object())
    throw ParseError(path + ": expected an object");
  auto const *v = find(node, key);
  if (!v)
    throw ParseError(join(path, key) + ": missing field");
  return *v;
}

inline std::int64_t as_int(Json const &v, std::string const &path)
{
  if (!v.is_number_integer())
    throw ParseError(path + ": expected an integer");
  return v.get<std::int64_t>();
}

inline int as_small_int(Json const &v, std::string const &path)
{
  auto x = as_int(v, path);
  if (x < -1000000 || x > 1000000)
    throw ParseError(path + ": integer out of range");
  return static_cast<int>(x);
}

inline double as_double(Json const &v, std::string const &path)
{
  if (!v.is_number())
    throw ParseError(path + ": expected a number");
  return v.get<double>();
}

inline std::string as_string(Json const &v, std::string const &path)
{
  if (!v.is_string())
    throw ParseError(path + ": expected a string");
  return v.get<std::string>();
}

// Integers or strings "p/q"; floating-point numbers are rejected to keep
// weights exact.
inline Rational as_rational(Json const &v, std::string const &path)
{
  if (v.is_number_integer())
    return Rational(v.get<std::int64_t>());
  if (v.is_string())
  {
    try
    {
      return parse_rational(v.get<std::string>());
    }
    catch (ParseError const &e)
    {
      throw ParseError(path + ": " + e.what());
    }
  }
  throw ParseError(path + ": expected an integer or a string \"p/q\"");
}

inline int int_or(Json const &node, std::string const &key, std::string const &path, int fallback)
{
  auto const *v = find(node, key);
  return v ? as_small_int(*v, join(path, key)) : fallback;
}

inline Coweight parse_alpha(Json const &v, int n, std::string const &path)
{
  if (!v.is_array())
    throw ParseError(path + ": expected an array of Dynkin labels");
  if (static_cast<int>(v.size()) != n - 1)
    throw ParseError(path + ": su(" + std::to_string(n) + ") needs " + std::to_string(n - 1) + " labels, got " +
                     std::to_string(v.size()));
  std::vector<Rational> labels;
  for (std::size_t i = 0; i < v.size(); ++i)
    labels.push_back(as_rational(v[i], path + "[" + std::to_string(i) + "]"));
  return Coweight(n, labels);
}

inline Weight parse_weight(Json const &v, int n, std::string const &path)
{
  if (!v.is_array() || static_cast<int>(v.size()) != n - 1)
    throw ParseError(path + ": expected " + std::to_string(n - 1) + " integer Dynkin labels");
  std::vector<int> labels;
  for (std::size_t i = 0; i < v.size(); ++i)
    labels.push_back(as_small_int(v[i], path + "[" + std::to_string(i) + "]"));
  return Weight(n, labels);
}

inline std::string location(std::string const &text, std::size_t byte)
{
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
  {
    if (text[i] == '\n')
    {
      ++line;
      col = 1;
    }
    else
      ++col;
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Rethrows library errors raised while building values with the field path.
template<typename F>
auto at_field(std::string const &path, F f) -> decltype(f())
{
  try
  {
    return f();
  }
  catch (ParseError const &)
  {
    throw;
  }
  catch (DomainError const &e)
  {
    throw ParseError(path + ": " + e.what());
  }
  catch (DimensionError const &e)
  {
    throw ParseError(path + ": " + e.what());
  }
}

} // namespace detail

inline Scenario parse_scenario(Json const &root, std::string const &origin = "scenario")
{
  using namespace detail;
  if (!root.is_object())
    throw ParseError(origin + ": top level must be an object");
  auto version = as_int(require(root, "schema_version", ""), "schema_version");
  if (version != schema_version)
    throw ParseError("schema_version: unsupported version " + std::to_string(version) + " (expected " +
                     std::to_string(schema_version) + ")");

  Scenario sc;
  sc.name = find(root, "name") ? as_string(root["name"], "name") : origin;

  if (auto const *s = find(root, "surface"))
  {
    int genus = as_small_int(require(*s, "genus", "surface"), "surface.genus");
    int n = as_small_int(require(*s, "N", "surface"), "surface.N");
    if (n < 2)
      throw ParseError("surface.N: su(N) requires N >= 2");
    std::vector<MarkedPoint> points;
    if (auto const *pts = find(*s, "points"))
    {
      if (!pts->is_array())
        throw ParseError("surface.points: expected an array");
      for (std::size_t i = 0; i < pts->size(); ++i)
      {
        std::string const p = "surface.points[" + std::to_string(i) + "]";
        auto alpha = at_field(p, [&] { return parse_alpha(require((*pts)[i], "alpha", p), n, p + ".alpha"); });
        points.push_back({alpha});
      }
    }
    sc.marking = at_field("surface", [&] { return SurfaceMarking(genus, n, points); });
  }

  if (auto const *m = find(root, "mapping_class"))
  {
    auto kind = as_string(require(*m, "kind", "mapping_class"), "mapping_class.kind");
    if (kind == "identity")
      sc.mapping_class = MappingClassSpec::identity();
    else if (kind == "dehn_twists")
    {
      auto const &tw = require(*m, "twists", "mapping_class");
      if (!tw.is_array() || tw.empty())
        throw ParseError("mapping_class.twists: expected a non-empty array");
      std::vector<TwistFactor> factors;
      for (std::size_t i = 0; i < tw.size(); ++i)
      {
        std::string const p = "mapping_class.twists[" + std::to_string(i) + "]";
        int point = as_small_int(require(tw[i], "point", p), p + ".point");
        if (point < 0)
          throw ParseError(p + ".point: must be non-negative");
        factors.push_back({static_cast<std::size_t>(point), int_or(tw[i], "multiplicity", p, 1)});
      }
      sc.mapping_class = MappingClassSpec::dehn_twists(factors);
    }
    else
      throw ParseError("mapping_class.kind: expected 'identity' or 'dehn_twists', got '" + kind + "'");
    if (sc.marking)
      at_field("mapping_class", [&] {
        sc.mapping_class.validate(*sc.marking);
        return 0;
      });
  }

  if (auto const *s = find(root, "sweep"))
  {
    sc.k0 = int_or(*s, "k0", "sweep", sc.marking ? sc.marking->base_level() : 1);
    sc.s_max = as_small_int(require(*s, "s_max", "sweep"), "sweep.s_max");
    if (sc.k0 < 1)
      throw ParseError("sweep.k0: must be positive");
    if (sc.s_max < 1)
      throw ParseError("sweep.s_max: must be positive");
  }

  if (auto const *c = find(root, "convention"))
    sc.convention = at_field("convention", [&] {
      try
      {
        return parse_convention(as_string(*c, "convention"));
      }
      catch (ParseError const &e)
      {
        throw ParseError(std::string("convention: ") + e.what());
      }
    });
  if (auto const *s = find(root, "seed"))
  {
    if (!s->is_number_unsigned())
      throw ParseError("seed: expected a non-negative integer");
    sc.seed = s->get<std::uint64_t>();
  }
  if (auto const *t = find(root, "tolerance"))
  {
    sc.tolerance = as_double(*t, "tolerance");
    if (!(sc.tolerance > 0))
      throw ParseError("tolerance: must be positive");
  }
  if (auto const *ip = find(root, "inject_phase"))
    sc.inject_phase = as_double(*ip, "inject_phase");

  if (auto const *e = find(root, "extract"))
  {
    auto &x = sc.extract;
    x.max_terms = int_or(*e, "max_terms", "extract", x.max_terms);
    x.order = int_or(*e, "order", "extract", x.order);
    x.holdout = int_or(*e, "holdout", "extract", x.holdout);
    if (auto const *d = find(*e, "degree_bound"))
      x.degree_bound = as_rational(*d, "extract.degree_bound");
    if (auto const *st = find(*e, "step"))
      x.step = as_rational(*st, "extract.step");
    if (auto const *in = find(*e, "input"))
      x.input = as_string(*in, "extract.input");
    if (x.max_terms < 1)
      throw ParseError("extract.max_terms: must be positive");
    if (x.order < 0)
      throw ParseError("extract.order: must be non-negative");
    if (x.holdout < 0)
      throw ParseError("extract.holdout: must be non-negative");
    if (x.step <= Rational(0))
      throw ParseError("extract.step: must be positive");
  }

  if (auto const *s = find(root, "samples"))
  {
    sc.samples.irreducible = int_or(*s, "irreducible", "samples", 0);
    sc.samples.torus = int_or(*s, "torus", "samples", 0);
    if (auto const *t = find(*s, "trivial"))
    {
      if (!t->is_boolean())
        throw ParseError("samples.trivial: expected a boolean");
      sc.samples.trivial = t->get<bool>();
    }
    if (sc.samples.irreducible < 0 || sc.samples.torus < 0)
      throw ParseError("samples: counts must be non-negative");
  }

  if (auto const *l = find(root, "lie"))
  {
    sc.lie = LieSpec{as_small_int(require(*l, "N", "lie"), "lie.N"), as_small_int(require(*l, "k", "lie"), "lie.k")};
    if (sc.lie->n < 2 || sc.lie->k < 1)
      throw ParseError("lie: requires N >= 2 and k >= 1");
  }

  if (auto const *v = find(root, "verlinde"))
  {
    VerlindeSpec spec;
    spec.genus = as_small_int(require(*v, "genus", "verlinde"), "verlinde.genus");
    spec.n = as_small_int(require(*v, "N", "verlinde"), "verlinde.N");
    spec.k = as_small_int(require(*v, "k", "verlinde"), "verlinde.k");
    if (spec.n < 2 || spec.k < 1 || spec.genus < 0)
      throw ParseError("verlinde: requires genus >= 0, N >= 2 and k >= 1");
    if (auto const *ls = find(*v, "labels"))
    {
      if (!ls->is_array())
        throw ParseError("verlinde.labels: expected an array");
      for (std::size_t i = 0; i < ls->size(); ++i)
      {
        std::string const p = "verlinde.labels[" + std::to_string(i) + "]";
        spec.labels.push_back(at_field(p, [&] { return parse_weight((*ls)[i], spec.n, p); }));
      }
    }
    sc.verlinde = spec;
  }
  return sc;
}

inline Scenario parse_scenario_text(std::string const &text, std::string const &origin)
{
  Json root;
  try
  {
    root = Json::parse(text);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    throw ParseError(origin + ": " + detail::location(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON");
  }
  return parse_scenario(root, origin);
}

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline Scenario load_scenario(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto sc = parse_scenario_text(buf.str(), path.filename().string());
  if (sc.name == path.filename().string())
    sc.name = path.stem().string();
  sc.source = path;
  if (sc.extract.input && sc.extract.input->is_relative())
    sc.extract.input = path.parent_path() / *sc.extract.input;
  return sc;
}

// Command-line values that take precedence over the scenario.
struct Overrides
{
  std::optional<std::uint64_t> seed;
  std::optional<PhaseConvention> convention;
  std::optional<double> tolerance;
};

inline void apply(Scenario &sc, Overrides const &o)
{
  if (o.seed)
    sc.seed = *o.seed;
  if (o.convention)
    sc.convention = *o.convention;
  if (o.tolerance)
  {
    if (!(*o.tolerance > 0))
      throw ParseError("--tolerance must be positive");
    sc.tolerance = *o.tolerance;
  }
}

// ---- output helpers -----------------------------------------------------------

inline std::string str(Rational const &r) { return wrt::to_string(r); }

inline Json complex_json(LComplex z)
{
  return Json{{"re", static_cast<double>(z.real())}, {"im", static_cast<double>(z.imag())}};
}

inline Json weight_json(Weight const &w)
{
  Json a = Json::array();
  for (int x : w.dynkin_labels())
    a.push_back(x);
  return a;
}

inline Json marking_json(SurfaceMarking const &m)
{
  Json pts = Json::array();
  for (auto const &p : m.points())
  {
    Json a = Json::array();
    for (auto const &x : p.alpha.dynkin_labels())
      a.push_back(str(x));
    pts.push_back(Json{{"alpha", a}});
  }
  return Json{{"genus", m.genus()}, {"N", m.rank_parameter()}, {"points", pts}};
}

class Output
{
public:
  explicit Output(std::filesystem::path dir) : dir_(std::move(dir))
  {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
      throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  std::filesystem::path const &dir() const { return dir_; }

  void json(std::string const &file, Json const &j) const
  {
    write(file, [&](std::ostream &o) { o << std::setw(2) << j << '\n'; });
  }

  template<typename F>
  void write(std::string const &file, F f) const
  {
    auto path = dir_ / file;
    std::ofstream out(path);
    if (!out)
      throw IoError("cannot write " + path.string());
    f(out);
    if (!out)
      throw IoError("write failed for " + path.string());
  }

private:
  std::filesystem::path dir_;
};

inline std::filesystem::path default_out_dir()
{
  if (char const *env = std::getenv(out_dir_variable); env && *env)
    return env;
  return "wrt-out";
}

// ---- pipeline pieces ------------------------------------------------------------

inline InvariantSequence sweep(Scenario const &sc, Precision precision)
{
  if (!sc.has_sweep())
    throw ParseError(sc.name + ": scenario has no 'sweep' section");
  auto const &m = sc.surface();
  int const k0 = sc.k0 > 0 ? sc.k0 : m.base_level();
  return precision == Precision::extended
             ? invariant_sequence<long double>(m, sc.mapping_class, k0, sc.s_max, sc.convention)
             : invariant_sequence<double>(m, sc.mapping_class, k0, sc.s_max, sc.convention);
}

// Sweep values, multiplied by exp(2 pi i k inject_phase) when requested.
inline LevelSequence sweep_values(Scenario const &sc, InvariantSequence const &seq)
{
  auto ls = to_level_sequence(seq);
  if (sc.inject_phase == 0)
    return ls;
  std::vector<LComplex> v;
  for (std::size_t i = 0; i < ls.size(); ++i)
    v.push_back(ls.value(i) * wrt::detail::level_phase(ls.level(i), sc.inject_phase));
  return {ls.levels(), v};
}

inline LevelSequence read_sequence_csv(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read sequence file " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("k,re,im", 0) != 0)
    throw ParseError(path.filename().string() + ": line 1: expected header starting with k,re,im");
  std::vector<int> levels;
  std::vector<LComplex> values;
  int lineno = 1;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
      continue;
    std::stringstream ss(line);
    std::string k, re, im;
    std::getline(ss, k, ',');
    std::getline(ss, re, ',');
    std::getline(ss, im, ',');
    if (re.empty() && im.empty())
      continue; // skipped level
    try
    {
      levels.push_back(std::stoi(k));
      values.emplace_back(std::stold(re), std::stold(im));
    }
    catch (std::exception const &)
    {
      throw ParseError(path.filename().string() + ": line " + std::to_string(lineno) + ": malformed row");
    }
  }
  if (levels.empty())
    throw EmptySweepError(path.filename().string() + ": no values");
  return LevelSequence(levels, values);
}

struct Extraction
{
  PronyResult detection;
  ExpansionModel model;
  Rational degree_bound;
};

inline Extraction extract(LevelSequence const &ls, ExtractSettings const &x)
{
  Extraction out;
  out.detection = prony_detect(ls, x.max_terms);
  out.degree_bound =
      x.degree_bound.value_or(wrt::detail::ceil_to_step(out.detection.degree_estimate + 0.5, x.step));
  FitOptions fo;
  fo.step = x.step;
  out.model = fit_model(ls, out.detection.phases, out.degree_bound, x.order, fo);
  return out;
}

inline Json model_json(ExpansionModel const &m, int rank_parameter)
{
  Json terms = Json::array();
  for (auto const &t : m.terms)
  {
    Json tail = Json::array();
    for (auto const &c : t.tail)
      tail.push_back(complex_json(c));
    // Same term written against the shifted level k + N.
    LComplex shifted = t.leading * wrt::detail::unit_phase(-static_cast<LReal>(rank_parameter) * t.q);
    terms.push_back(Json{{"q", t.q},
                         {"q_fraction", str(approximate_rational(t.q, 4096))},
                         {"degree", str(t.degree)},
                         {"leading", complex_json(t.leading)},
                         {"leading_shifted_level", complex_json(shifted)},
                         {"tail", tail}});
  }
  return Json{{"step", str(m.step)},
              {"order", m.order},
              {"order_reduced", m.order_reduced},
              {"period", m.period},
              {"relative_residual", m.relative_residual},
              // One leading degree per phase is modelled; a large residual
              // may mean several degrees share a phase.
              {"residual_flag", m.relative_residual > 1e-6},
              {"levels", m.levels},
              {"terms", terms}};
}

inline Json detection_json(PronyResult const &d)
{
  return Json{{"phases", d.phases},
              {"weights", d.weights},
              {"grid_step", d.grid_step},
              {"period", d.period},
              {"degree_estimate", d.degree_estimate},
              {"condition_number", d.condition_number},
              {"residual", d.residual}};
}

// ---- reports --------------------------------------------------------------------

struct Check
{
  std::string id;
  std::string anchor;
  std::string expected;
  std::string observed;
  bool pass = false;
  std::string note;
};

struct Report
{
  std::string command;
  std::string scenario;
  std::vector<Check> checks;
  Json details = Json::object();

  bool passed() const
  {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](Check const &c) { return c.pass; });
  }
  Check const *find(std::string const &id) const
  {
    for (auto const &c : checks)
      if (c.id == id)
        return &c;
    return nullptr;
  }
  Json json() const
  {
    Json cs = Json::array();
    for (auto const &c : checks)
    {
      Json j{{"id", c.id},
             {"anchor", c.anchor},
             {"expected", c.expected},
             {"observed", c.observed},
             {"result", c.pass ? "PASS" : "FAIL"}};
      if (!c.note.empty())
        j["note"] = c.note;
      cs.push_back(j);
    }
    return Json{{"schema_version", schema_version},
                {"command", command},
                {"scenario", scenario},
                {"outcome", passed() ? "PASS" : "FAIL"},
                {"checks", cs},
                {"details", details}};
  }
};

inline std::string fixed(double x, int digits = 12)
{
  std::ostringstream o;
  o << std::setprecision(digits) << x;
  return o.str();
}

// Phase predicted for the sweep: the Chern-Simons value, conjugated in the
// cft convention where the twist acts through T^m.
inline Rational expected_phase(Scenario const &sc)
{
  Rational q = cs_value(sc.mapping_class, sc.surface()).q;
  return sc.convention == PhaseConvention::cs ? q : frac(-q);
}

inline Report verify_aec(Scenario const &sc, Precision precision)
{
  Report rep;
  rep.command = "verify-aec";
  rep.scenario = sc.name;
  auto const &m = sc.surface();
  auto seq = sweep(sc, precision);
  auto ls = sweep_values(sc, seq);
  auto ex = extract(ls, sc.extract);

  // (1) phases
  Rational const q = expected_phase(sc);
  double const period = ex.detection.period;
  double const q_reduced = reduce_phase(to_real<double>(q), period);
  double worst = 0;
  std::string observed;
  for (std::size_t i = 0; i < ex.detection.phases.size(); ++i)
  {
    worst = std::max(worst, phase_distance(ex.detection.phases[i], q_reduced, period));
    observed += (i ? ", " : "") + fixed(ex.detection.phases[i]);
  }
  rep.checks.push_back({"phases", "asymptotic-expansion/phases",
                        str(q) + " = " + fixed(q_reduced) + " mod " + fixed(period), observed,
                        !ex.detection.phases.empty() && worst <= sc.tolerance,
                        "max distance " + fixed(worst, 3) + ", tolerance " + fixed(sc.tolerance, 3)});

  // (2) leading degree
  Rational const d_expected(moduli_dimension(m), 2);
  bool const have_terms = !ex.model.terms.empty();
  Rational const d_observed = have_terms ? ex.model.leading_degree() : Rational(0);
  rep.checks.push_back({"leading-degree", "asymptotic-expansion/leading-degree", str(d_expected),
                        have_terms ? str(d_observed) : "none", have_terms && d_observed == d_expected,
                        "half the moduli dimension " + std::to_string(moduli_dimension(m))});

  // (3) Poincare remainder on held-out levels
  std::size_t const fit_count = ls.size() > static_cast<std::size_t>(sc.extract.holdout)
                                    ? ls.size() - static_cast<std::size_t>(sc.extract.holdout)
                                    : 0;
  Check poincare{"poincare-remainder", "asymptotic-expansion/poincare-remainder", "stable C_p on held-out levels",
                 "", false, ""};
  if (sc.extract.holdout < 2 || fit_count == 0)
  {
    poincare.observed = "not assessable";
    poincare.note = "needs at least two held-out levels";
  }
  else
  {
    try
    {
      FitOptions fo;
      fo.step = sc.extract.step;
      auto prefix_model = fit_model(ls.prefix(fit_count), ex.detection.phases, ex.degree_bound, sc.extract.order, fo);
      auto pc = poincare_check(ls, prefix_model, prefix_model.order);
      std::string obs;
      for (auto const &o : pc.orders)
        obs += (obs.empty() ? "" : ", ") + std::string("C_") + std::to_string(o.p) + " = " + fixed(o.constant, 4) +
               (o.stable ? " stable" : " unstable");
      poincare.observed = pc.assessable ? obs : "not assessable";
      poincare.pass = pc.assessable && pc.passed;
      poincare.note = "fitted on " + std::to_string(fit_count) + " levels, order " +
                      std::to_string(prefix_model.order) + ", " + std::to_string(pc.held_out.size()) + " held out";
    }
    catch (Error const &e)
    {
      poincare.observed = "error";
      poincare.note = e.what();
    }
  }
  rep.checks.push_back(poincare);

  rep.details = Json{{"surface", marking_json(m)},
                     {"mapping_class", sc.mapping_class.describe()},
                     {"convention", to_string(sc.convention)},
                     {"precision", to_string(precision)},
                     {"levels", seq.levels()},
                     {"skipped_levels", seq.skipped().size()},
                     {"inject_phase", sc.inject_phase},
                     {"degree_bound", str(ex.degree_bound)},
                     {"detection", detection_json(ex.detection)},
                     {"model", model_json(ex.model, m.rank_parameter())}};
  return rep;
}

struct SampleRecord
{
  std::string kind;
  int index = 0;
  int h0 = 0;
  int h1_par = 0;
  int h0_f = 0;
  int h1_par_f = 0;
  int eigenspace = 0;
  bool wang_exact = false;
  bool precision_warning = false;
  bool generic() const { return h0 == 0; }
};

// Seeded samples with f_* = identity and central eta holonomy; Dehn twists
// about marked points act trivially on the surface group.
inline std::vector<SampleRecord> cohomology_samples(Scenario const &sc)
{
  auto const &m = sc.surface();
  if (sc.samples.count() == 0)
    throw ParseError(sc.name + ": 'samples' must request at least one representation");
  std::mt19937_64 rng(sc.seed);
  std::vector<std::pair<std::string, FlatRepresentation>> reps;
  for (int i = 0; i < sc.samples.irreducible; ++i)
    reps.emplace_back("irreducible", sample_irreducible(m, rng));
  for (int i = 0; i < sc.samples.torus; ++i)
    reps.emplace_back("torus", sample_torus(m, rng));
  if (sc.samples.trivial)
    reps.emplace_back("trivial", trivial_representation(m));

  std::vector<SampleRecord> out;
  int const n = m.rank_parameter();
  for (std::size_t i = 0; i < reps.size(); ++i)
  {
    auto const &[kind, rho] = reps[i];
    auto mapping = MappingData::identity(rho.generators(), CMatrix::Identity(n, n));
    auto eig = eigenspace_dim(rho, mapping);
    auto wang = wang_sequence_check(rho, mapping);
    SampleRecord r;
    r.kind = kind;
    r.index = static_cast<int>(i);
    r.h0 = wang.h0;
    r.h1_par = eig.h1_par;
    r.h0_f = eig.h0_f;
    r.h1_par_f = eig.h1_par_f;
    r.eigenspace = eig.dim;
    r.wang_exact = wang.exact();
    r.precision_warning = eig.precision_warning || wang.precision_warning;
    out.push_back(r);
  }
  return out;
}

inline Json samples_json(std::vector<SampleRecord> const &samples)
{
  Json a = Json::array();
  for (auto const &s : samples)
    a.push_back(Json{{"index", s.index},
                     {"kind", s.kind},
                     {"generic", s.generic()},
                     {"h0", s.h0},
                     {"h1_par", s.h1_par},
                     {"h0_f", s.h0_f},
                     {"h1_par_f", s.h1_par_f},
                     {"eigenspace_dim", s.eigenspace},
                     {"wang_exact", s.wang_exact},
                     {"precision_warning", s.precision_warning}});
  return a;
}

inline Report verify_grc(Scenario const &sc, Precision precision)
{
  Report rep;
  rep.command = "verify-grc";
  rep.scenario = sc.name;
  auto seq = sweep(sc, precision);
  auto growth = growth_degree(sweep_values(sc, seq));
  auto samples = cohomology_samples(sc);

  std::optional<int> best;
  std::vector<int> excluded;
  for (auto const &s : samples)
  {
    if (s.generic())
      best = std::max(best.value_or(s.h1_par_f - s.h0_f), s.h1_par_f - s.h0_f);
    else
      excluded.push_back(s.index);
  }
  Check c{"degree-vs-cohomology", "growth-rate/degree-vs-cohomology", "", str(growth.degree), false, ""};
  if (best)
  {
    Rational const expected(*best, 2);
    c.expected = str(expected) + " = max(h1_par_f - h0_f) / 2";
    c.pass = growth.degree == expected;
    c.note = "sequence degree by " + growth.method + ", cohomology over " +
             std::to_string(samples.size() - excluded.size()) + " generic sample(s)";
    if (!c.pass)
      c.note += "; sequence degree " + str(growth.degree) + " differs from cohomological degree " + str(expected);
  }
  else
  {
    c.expected = "no generic sample";
    c.note = "every sample has h0 > 0";
  }
  rep.checks.push_back(c);
  if (!excluded.empty())
  {
    std::string ids;
    for (int i : excluded)
      ids += (ids.empty() ? "" : ", ") + std::to_string(i);
    rep.checks.push_back({"non-generic-samples", "growth-rate/non-generic-samples", "excluded from the maximum",
                          "samples " + ids, true, "h0 > 0: reducible, not a smooth point"});
  }
  rep.details = Json{{"surface", marking_json(sc.surface())},
                     {"mapping_class", sc.mapping_class.describe()},
                     {"precision", to_string(precision)},
                     {"seed", sc.seed},
                     {"levels", seq.levels()},
                     {"growth", Json{{"degree", str(growth.degree)}, {"method", growth.method}, {"slope", growth.slope}}},
                     {"samples", samples_json(samples)}};
  return rep;
}

// ---- commands -------------------------------------------------------------------

struct Context
{
  std::filesystem::path out_dir;
  Precision precision = Precision::extended;
  std::ostream *log = nullptr;

  void say(std::string const &s) const
  {
    if (log)
      *log << s << '\n';
  }
};

inline LieSpec lie_spec(Scenario const &sc)
{
  if (!sc.lie)
    throw ParseError(sc.name + ": scenario has no 'lie' section");
  return *sc.lie;
}

inline int cmd_labels(Scenario const &sc, Context const &ctx)
{
  auto const spec = lie_spec(sc);
  auto labels = label_set(spec.n, spec.k);
  Json list = Json::array();
  for (auto const &w : labels)
    list.push_back(Json{{"dynkin", weight_json(w)},
                        {"conformal_weight", str(conformal_weight(spec.n, spec.k, w))},
                        {"t_exponent", str(t_exponent(spec.n, spec.k, w))}});
  Output(ctx.out_dir).json("labels.json", Json{{"schema_version", schema_version},
                                               {"N", spec.n},
                                               {"k", spec.k},
                                               {"count", labels.size()},
                                               {"central_charge", str(central_charge(spec.n, spec.k))},
                                               {"labels", list}});
  ctx.say("labels: N=" + std::to_string(spec.n) + " k=" + std::to_string(spec.k) + " count=" +
          std::to_string(labels.size()));
  return exit_ok;
}

// Largest distance of any fusion coefficient from an integer; skipped above
// the label count where the cubic table becomes impractical.
template<typename Real>
std::optional<double> fusion_residue(BasicModularData<Real> const &md, std::size_t limit = 60)
{
  if (md.size() > limit)
    return std::nullopt;
  double worst = 0;
  auto const &S = md.S;
  for (Eigen::Index l = 0; l < S.rows(); ++l)
    for (Eigen::Index m = l; m < S.rows(); ++m)
      for (Eigen::Index v = 0; v < S.rows(); ++v)
      {
        std::complex<Real> sum = 0;
        for (Eigen::Index s = 0; s < S.cols(); ++s)
          sum += S(l, s) * S(m, s) * std::conj(S(v, s)) / S(0, s);
        double re = static_cast<double>(sum.real());
        worst = std::max({worst, std::abs(re - std::round(re)), std::abs(static_cast<double>(sum.imag()))});
      }
  return worst;
}

template<typename Real>
int modular_report(Scenario const &sc, Context const &ctx)
{
  auto const spec = lie_spec(sc);
  auto md = s_matrix<Real>(spec.n, spec.k);
  double const unitarity = static_cast<double>(unitarity_residual(md));
  double const symmetry = static_cast<double>(symmetry_residual(md));
  double const relation = static_cast<double>(modular_relation_residual(md));
  double const conjugation = static_cast<double>(charge_conjugation_residual(md));
  auto fusion = fusion_residue(md);
  Output out(ctx.out_dir);
  out.write("s_matrix.csv", [&](std::ostream &o) {
    o << "row,col,re,im\n" << std::setprecision(17);
    for (Eigen::Index r = 0; r < md.S.rows(); ++r)
      for (Eigen::Index c = 0; c < md.S.cols(); ++c)
        o << r << ',' << c << ',' << static_cast<double>(md.S(r, c).real()) << ','
          << static_cast<double>(md.S(r, c).imag()) << '\n';
  });
  Json t = Json::array();
  for (auto const &w : md.labels)
    t.push_back(str(t_exponent(spec.n, spec.k, w)));
  bool const ok = unitarity <= sc.tolerance && symmetry <= sc.tolerance && relation <= sc.tolerance &&
                  (!fusion || *fusion < integrality_budget);
  Json j{{"schema_version", schema_version},
         {"N", spec.n},
         {"k", spec.k},
         {"size", md.size()},
         {"precision", to_string(ctx.precision)},
         {"tolerance", sc.tolerance},
         {"unitarity_residual", unitarity},
         {"symmetry_residual", symmetry},
         {"modular_relation_residual", relation},
         {"charge_conjugation_residual", conjugation},
         {"t_exponents", t},
         {"within_tolerance", ok}};
  j["fusion_integrality_residue"] = fusion ? Json(*fusion) : Json(nullptr);
  out.json("modular.json", j);
  ctx.say("modular: N=" + std::to_string(spec.n) + " k=" + std::to_string(spec.k) +
          " unitarity=" + fixed(unitarity, 3) + " (ST)^3-S^2=" + fixed(relation, 3));
  if (!ok)
    throw IntegralityError("modular data exceed the tolerance", std::max({unitarity, symmetry, relation}));
  return exit_ok;
}

inline int cmd_modular(Scenario const &sc, Context const &ctx)
{
  return ctx.precision == Precision::extended ? modular_report<long double>(sc, ctx)
                                              : modular_report<double>(sc, ctx);
}

inline int cmd_verlinde(Scenario const &sc, Context const &ctx)
{
  long long value = 0;
  Json j{{"schema_version", schema_version}};
  if (sc.verlinde)
  {
    auto const &v = *sc.verlinde;
    value = ctx.precision == Precision::extended ? verlinde_dimension<long double>(v.genus, v.labels, v.n, v.k)
                                                 : verlinde_dimension<double>(v.genus, v.labels, v.n, v.k);
    Json labels = Json::array();
    for (auto const &w : v.labels)
      labels.push_back(weight_json(w));
    j.update(Json{{"genus", v.genus}, {"N", v.n}, {"k", v.k}, {"labels", labels}});
  }
  else
  {
    auto const &m = sc.surface();
    int const k = sc.k0 > 0 ? sc.k0 : m.base_level();
    wrt::detail::require_admissible(m, k);
    auto labels = m.labels_at(k);
    value = ctx.precision == Precision::extended
                ? verlinde_dimension<long double>(m.genus(), labels, m.rank_parameter(), k)
                : verlinde_dimension<double>(m.genus(), labels, m.rank_parameter(), k);
    Json ls = Json::array();
    for (auto const &w : labels)
      ls.push_back(weight_json(w));
    j.update(Json{{"genus", m.genus()}, {"N", m.rank_parameter()}, {"k", k}, {"labels", ls}});
  }
  j["value"] = value;
  Output(ctx.out_dir).json("verlinde.json", j);
  ctx.say("verlinde: " + std::to_string(value));
  return exit_ok;
}

inline void write_sequence(Output const &out, InvariantSequence const &seq)
{
  out.write("sequence.csv", [&](std::ostream &o) { write_csv(o, seq); });
}

inline int cmd_invariant(Scenario const &sc, Context const &ctx)
{
  auto seq = sweep(sc, ctx.precision);
  Output out(ctx.out_dir);
  write_sequence(out, seq);
  Json skipped = Json::array();
  for (auto const &s : seq.skipped())
  {
    std::string why;
    for (auto const &r : s.report.reasons)
      why += (why.empty() ? "" : "; ") + r;
    skipped.push_back(Json{{"k", s.k}, {"reason", why}});
  }
  auto cs = cs_value(sc.mapping_class, sc.surface());
  out.json("invariant.json", Json{{"schema_version", schema_version},
                                  {"surface", marking_json(sc.surface())},
                                  {"mapping_class", sc.mapping_class.describe()},
                                  {"convention", to_string(sc.convention)},
                                  {"precision", to_string(ctx.precision)},
                                  {"k0", seq.k0()},
                                  {"s_max", seq.s_max()},
                                  {"cs_value", str(cs.q)},
                                  {"cs_provenance", to_string(cs.provenance)},
                                  {"levels", seq.levels()},
                                  {"skipped", skipped}});
  ctx.say("invariant: " + std::to_string(seq.size()) + " levels, " + std::to_string(seq.skipped().size()) +
          " skipped");
  return exit_ok;
}

inline int cmd_cohomology(Scenario const &sc, Context const &ctx)
{
  auto samples = cohomology_samples(sc);
  Output(ctx.out_dir)
      .json("cohomology.json", Json{{"schema_version", schema_version},
                                    {"surface", marking_json(sc.surface())},
                                    {"moduli_dimension", moduli_dimension(sc.surface())},
                                    {"seed", sc.seed},
                                    {"samples", samples_json(samples)}});
  bool exact = std::all_of(samples.begin(), samples.end(), [](SampleRecord const &s) { return s.wang_exact; });
  ctx.say("cohomology: " + std::to_string(samples.size()) + " samples, exact sequence " + (exact ? "yes" : "no"));
  if (!exact)
    throw InvariantViolation("six-term sequence is not exact for some sample");
  return exit_ok;
}

inline int cmd_extract(Scenario const &sc, Context const &ctx)
{
  Output out(ctx.out_dir);
  LevelSequence ls = [&] {
    if (sc.extract.input)
      return read_sequence_csv(*sc.extract.input);
    auto seq = sweep(sc, ctx.precision);
    write_sequence(out, seq);
    return sweep_values(sc, seq);
  }();
  auto ex = extract(ls, sc.extract);
  int const n = sc.marking ? sc.marking->rank_parameter() : 2;
  out.json("model.json", Json{{"schema_version", schema_version},
                              {"degree_bound", str(ex.degree_bound)},
                              {"detection", detection_json(ex.detection)},
                              {"model", model_json(ex.model, n)}});
  ctx.say("extract: " + std::to_string(ex.model.terms.size()) + " term(s), leading degree " +
          (ex.model.terms.empty() ? std::string("none") : str(ex.model.leading_degree())));
  return exit_ok;
}

inline int finish_report(Report const &rep, std::string const &file, Context const &ctx)
{
  Output(ctx.out_dir).json(file, rep.json());
  for (auto const &c : rep.checks)
    ctx.say(std::string(c.pass ? "PASS" : "FAIL") + " [" + c.anchor + "] expected " + c.expected + ", observed " +
            c.observed);
  ctx.say(rep.command + " " + rep.scenario + ": " + (rep.passed() ? "PASS" : "FAIL"));
  return rep.passed() ? exit_ok : exit_verification;
}

inline int cmd_verify_aec(Scenario const &sc, Context const &ctx)
{
  Output out(ctx.out_dir);
  write_sequence(out, sweep(sc, ctx.precision));
  return finish_report(verify_aec(sc, ctx.precision), "aec_report.json", ctx);
}

inline int cmd_verify_grc(Scenario const &sc, Context const &ctx)
{
  Output out(ctx.out_dir);
  write_sequence(out, sweep(sc, ctx.precision));
  return finish_report(verify_grc(sc, ctx.precision), "grc_report.json", ctx);
}

} // namespace wrt::cli
