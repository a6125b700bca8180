#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "calibr/acceptance.hpp"
#include "calibr/io.hpp"
#include "calibr/parallel.hpp"

using namespace calibr;
using io::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Outcome of one subcommand; ok = false maps to exit status 1.
struct Report {
  Json result = Json::object();
  std::optional<io::Table> table;
  bool ok = true;
};

struct Common {
  std::string cal = "omega4";
  std::uint64_t seed = 7;
  int threads = 0;
  std::string format = "auto";
  std::string output;
  std::string emit_csv;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<Report()> run;
  /// Output format used for --format auto.
  std::function<std::string()> auto_format = [] { return std::string("json"); };
};

Json option_value(const CLI::Option* opt) {
  if (opt->get_type_size() == 0) return opt->count() > 0;
  std::string s;
  if (opt->count() > 0) {
    const auto& res = opt->results();
    for (std::size_t i = 0; i < res.size(); ++i) s += (i ? "," : "") + res[i];
  } else {
    s = opt->get_default_str();
  }
  if (s.empty()) return nullptr;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end && *end == '\0' && s.find_first_not_of("0123456789+-.eE") == std::string::npos) {
    if (s.find_first_of(".eE") == std::string::npos) return static_cast<long long>(v);
    return v;
  }
  return s;
}

Json resolved_config(const CLI::App* sub) {
  Json cfg = Json::object();
  cfg["subcommand"] = sub->get_name();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    cfg[name] = option_value(opt);
  }
  return cfg;
}

std::vector<int> parse_index_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError(std::string(what) + ": bad index \"" + tok + "\"");
    }
  }
  return out;
}

std::vector<ScalarField> test_fields(const std::string& spec, int n) {
  std::vector<ScalarField> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "builtin:set1") {
      for (const char* f : {"re_z1", "abs_z1_sq", "re_z1_sq", "normsq"}) out.push_back(builtin_field(f, n));
    } else {
      out.push_back(io::field_from_spec(tok, n));
    }
  }
  if (out.empty()) throw InputError("--tests: no test functions given");
  return out;
}

std::vector<Eigen::VectorXd> default_sites(int n) {
  if (n < 2) throw InputError("default sites need n >= 2");
  std::vector<Eigen::VectorXd> s;
  for (auto [a, b] : {std::pair{1, 1}, std::pair{-1, 1}, std::pair{-1, -1}, std::pair{1, -1}, std::pair{0, 0}}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x[0] = a;
    x[1] = b;
    s.push_back(x);
  }
  return s;
}

std::vector<Eigen::VectorXd> probes_or_default(const std::string& spec, int n) {
  return io::probes_from_spec(spec.empty() ? "grid:(-1..1)^" + std::to_string(n) + ":3" : spec, n);
}

SampleOptions sample_options(const Common& c, int count) {
  SampleOptions so;
  so.count = count;
  so.seed = c.seed;
  so.threads = c.threads;
  return so;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot write");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for calibrated geometry in flat R^n", "calibr"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "TOML/INI file of option values; unknown keys are rejected");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.option_defaults()->always_capture_default();

  Common c;
  std::map<std::string, Command> commands;

  auto add = [&](const std::string& name, const std::string& desc, bool with_cal = true) -> CLI::App* {
    CLI::App* sub = app.add_subcommand(name, desc);
    if (with_cal) sub->add_option("--cal", c.cal, "Catalogue selector or form JSON path");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads (0: CALIBR_THREADS, else 1)")->envname("CALIBR_THREADS");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"auto", "json", "csv"}));
    sub->add_option("-o,--output", c.output, "Report path (default: stdout)");
    sub->add_option("--emit-csv", c.emit_csv, "Also write the report's table as CSV to this path");
    commands[name].app = sub;
    return sub;
  };

  // catalogue
  bool list = false;
  std::string dump_name;
  {
    auto* s = add("catalogue", "List catalogue calibrations or dump one as a form JSON", false);
    s->add_flag("--list", list, "List names, (n, p) and term counts");
    s->add_option("--dump", dump_name, "Selector to dump");
    commands["catalogue"].run = [&] {
      Report r;
      if (!dump_name.empty()) {
        r.result = io::form_to_json(catalogue(dump_name, false).form);
        return r;
      }
      Json entries = Json::array();
      io::Table t{{"name", "n", "p", "terms"}, {}};
      for (const auto& e : catalogue_list()) {
        entries.push_back(Json{{"name", e.name}, {"n", e.n}, {"p", e.p}, {"terms", e.terms}});
        t.rows.push_back({e.name, std::to_string(e.n), std::to_string(e.p), std::to_string(e.terms)});
      }
      r.result = Json{{"entries", entries}};
      r.table = t;
      return r;
    };
  }

  // comass
  std::string form_path;
  int multistarts = 200;
  {
    auto* s = add("comass", "Comass of a form by multistart Grassmannian ascent");
    s->add_option("--form", form_path, "Form JSON (overrides --cal)");
    s->add_option("--multistarts", multistarts, "Random starts")->check(CLI::PositiveNumber);
    commands["comass"].run = [&] {
      Report r;
      ComassOptions co;
      co.multistarts = multistarts;
      co.seed = c.seed;
      co.threads = c.threads;
      const bool user = !form_path.empty();
      const ExteriorElement phi =
          user ? io::form_from_json(io::load_json(form_path), form_path) : io::calibration_from_spec(c.cal).form;
      const auto res = comass(phi, co);
      r.result = io::to_json(res);
      if (!user) {
        r.ok = res.value >= 1.0 - 1e-4 && res.value <= 1.0 + 1e-6;
        r.result["within_unit_tolerance"] = r.ok;
      }
      io::Table t{{"rank", "value"}, {}};
      for (std::size_t i = 0; i < res.local_values.size(); ++i)
        t.rows.push_back({std::to_string(i), io::format_double(res.local_values[i])});
      r.table = t;
      return r;
    };
  }

  // gsample
  int count = 50;
  double tol = 1e-6;
  double dedup = 1e-3;
  {
    auto* s = add("gsample", "Sample the phi-Grassmannian G(phi)");
    s->add_option("--count", count, "Requested distinct planes")->check(CLI::PositiveNumber);
    s->add_option("--tol", tol, "Accept phi(xi) >= 1 - tol");
    s->add_option("--dedup", dedup, "Deduplication angle");
    commands["gsample"].run = [&] {
      Report r;
      auto so = sample_options(c, count);
      so.tol = tol;
      so.dedup_angle = dedup;
      const auto set = sample_grassmannian(io::calibration_from_spec(c.cal), so);
      r.result = io::to_json(set);
      r.table = io::planes_table(set);
      r.ok = !set.empty();
      return r;
    };
  }

  // reduce
  int reduce_count = 30;
  {
    auto* s = add("reduce", "Reduce a calibration to the span W of its planes");
    s->add_option("--count", reduce_count, "Sampled planes")->check(CLI::PositiveNumber);
    commands["reduce"].run = [&] {
      Report r;
      const auto red = reduce_calibration(sample_grassmannian(io::calibration_from_spec(c.cal), sample_options(c, reduce_count)));
      r.result = io::to_json(red);
      return r;
    };
  }

  // positivity
  std::string alpha_path;
  double pos_tol = 1e-6;
  int pos_count = 50;
  {
    auto* s = add("positivity", "Classify a p-form on G(phi): interior, boundary or outside the positive cone");
    s->add_option("--form", alpha_path, "Form JSON")->required();
    s->add_option("--tol", pos_tol, "Classification tolerance");
    s->add_option("--count", pos_count, "Sampled planes")->check(CLI::PositiveNumber);
    commands["positivity"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto alpha = io::form_from_json(io::load_json(alpha_path), alpha_path);
      PositivityOptions po;
      po.tol = pos_tol;
      po.extremum.threads = c.threads;
      const auto rep = positivity_classify(alpha, sample_grassmannian(cal, sample_options(c, pos_count)), po);
      r.result = io::to_json(rep);
      r.ok = rep.status != ConeStatus::Outside;
      return r;
    };
  }

  // lemma25
  std::string pvector_path;
  {
    auto* s = add("lemma25", "Unit-mass p-vector: cone membership, hull membership and phi(xi) = 1 agree");
    s->add_option("--pvector", pvector_path, "p-vector JSON (form format)")->required();
    s->add_option("--tol", pos_tol, "Tolerance");
    s->add_option("--count", pos_count, "Sampled planes")->check(CLI::PositiveNumber);
    commands["lemma25"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto xi = io::form_from_json(io::load_json(pvector_path), pvector_path);
      const auto rep = lemma_2_5_check(xi, sample_grassmannian(cal, sample_options(c, pos_count)), pos_tol);
      r.result = io::to_json(rep);
      r.ok = rep.agree;
      return r;
    };
  }

  // massnorm
  double mass_tol = 1e-6;
  {
    auto* s = add("massnorm", "Bracket the mass norm of a p-vector", false);
    s->add_option("--pvector", pvector_path, "p-vector JSON (form format)")->required();
    s->add_option("--tol", mass_tol, "Relative bracket width at which to stop");
    commands["massnorm"].run = [&] {
      Report r;
      MassOptions mo;
      mo.tol = mass_tol;
      mo.comass.seed = c.seed;
      mo.comass.threads = c.threads;
      const auto m = mass_norm_estimate(io::form_from_json(io::load_json(pvector_path), pvector_path), {}, mo);
      r.result = io::to_json(m);
      return r;
    };
  }

  // psh, modd, flat share field and probe options
  std::string field = "builtin:normsq";
  std::string probes;
  double field_tol = 1e-6;
  {
    auto* s = add("psh", "Classify phi-plurisubharmonicity of a field on probe points");
    s->add_option("--field", field, "builtin:<name> or polynomial JSON path");
    s->add_option("--probes", probes, "grid:(a..b)^n:k, point:x1,...,xn or a JSON file (default grid:(-1..1)^n:3)");
    s->add_option("--tol", field_tol, "Psh tolerance");
    s->add_option("--count", pos_count, "Sampled planes")->check(CLI::PositiveNumber);
    commands["psh"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto f = io::field_from_spec(field, cal.dim());
      PshOptions po;
      po.tol = field_tol;
      po.extremum.threads = c.threads;
      const auto rep = psh_classify(f, probes_or_default(probes, cal.dim()),
                                    sample_grassmannian(cal, sample_options(c, pos_count)), po);
      r.result = io::to_json(rep);
      r.ok = rep.overall != PshStatus::NotPsh;
      io::Table t{{"point", "status", "margin"}, {}};
      for (std::size_t i = 0; i < rep.points.size(); ++i)
        t.rows.push_back({std::to_string(i), to_string(rep.points[i].status), io::format_double(rep.points[i].margin)});
      r.table = t;
      return r;
    };
  }
  {
    auto* s = add("modd", "Residual of phi-pluriharmonicity modulo d at probe points");
    s->add_option("--field", field, "builtin:<name> or polynomial JSON path");
    s->add_option("--probes", probes, "Probe points (default grid:(-1..1)^n:3)");
    s->add_option("--tol", field_tol, "Residual accepted as pluriharmonic mod d");
    commands["modd"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto f = io::field_from_spec(field, cal.dim());
      const auto span = saturated_lambda_span(cal.form, c.seed, c.threads);
      Json pts = Json::array();
      io::Table t{{"point", "residual"}, {}};
      double worst = 0.0;
      const auto xs = probes_or_default(probes, cal.dim());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto m = pluriharmonic_mod_d_residual(f, xs[i], span, cal.form);
        Json p = io::to_json(m);
        p["x"] = io::to_json(xs[i]);
        pts.push_back(p);
        worst = std::max(worst, m.residual);
        t.rows.push_back({std::to_string(i), io::format_double(m.residual)});
      }
      r.ok = worst <= field_tol;
      r.result = Json{{"pluriharmonic_mod_d", r.ok}, {"max_residual", worst}, {"lambda_dim", span.dim()}, {"points", pts}};
      r.table = t;
      return r;
    };
  }
  {
    auto* s = add("flat", "phi-flatness of level sets at probe points");
    s->add_option("--field", field, "builtin:<name> or polynomial JSON path");
    s->add_option("--probes", probes, "Probe points (default grid:(-1..1)^n:3)");
    s->add_option("--tol", field_tol, "Flatness tolerance");
    commands["flat"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto f = io::field_from_spec(field, cal.dim());
      FlatOptions fo;
      fo.tol = field_tol;
      fo.seed = c.seed;
      fo.extremum.threads = c.threads;
      Json pts = Json::array();
      io::Table t{{"point", "flat", "vacuous", "worst_value"}, {}};
      for (const auto& x : probes_or_default(probes, cal.dim())) {
        const auto fr = phi_flat_check(f, x, cal.form, fo);
        Json p = io::to_json(fr);
        p["x"] = io::to_json(x);
        pts.push_back(p);
        r.ok = r.ok && fr.flat;
        t.rows.push_back({std::to_string(t.rows.size()), fr.flat ? "true" : "false", fr.vacuous ? "true" : "false",
                          io::format_double(fr.worst_value)});
      }
      r.result = Json{{"flat", r.ok}, {"points", pts}};
      r.table = t;
      return r;
    };
  }

  // normality
  int trials = 50;
  double mismatch_tol = 1e-8;
  {
    auto* s = add("normality", "Compare Lambda(phi|W)^perp with Lambda(phi)^perp|W on random hyperplanes");
    s->add_option("--trials", trials, "Random hyperplanes")->check(CLI::PositiveNumber);
    s->add_option("--mismatch-tol", mismatch_tol, "Accepted subspace mismatch");
    commands["normality"].run = [&] {
      Report r;
      NormalityOptions no;
      no.mismatch_tol = mismatch_tol;
      no.seed = c.seed;
      no.threads = c.threads;
      const auto rep = normality_check(io::calibration_from_spec(c.cal).form, trials, no);
      r.result = io::to_json(rep);
      r.ok = rep.normal;
      return r;
    };
  }

  // current-check
  std::string mesh = "disc:0.1";
  double current_tol = 1e-9;
  {
    auto* s = add("current-check", "phi-positivity, calibration gap and boundary of a polyhedral current");
    s->add_option("--mesh", mesh, "Mesh file or generator (disc:h, tilted:theta:h, graph:h, cap:height:h)");
    s->add_option("--tol", current_tol, "Positivity tolerance");
    commands["current-check"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto t = io::mesh_from_spec(mesh);
      if (t.dim() != cal.dim() || t.degree() != cal.degree())
        throw InputError("--mesh: current has (n, p) = (" + std::to_string(t.dim()) + ", " + std::to_string(t.degree()) +
                         "), calibration has (" + std::to_string(cal.dim()) + ", " + std::to_string(cal.degree()) + ")");
      const auto pos = phi_positive_check(t, cal.form, current_tol);
      const auto gap = calibration_gap(t, cal.form, current_tol);
      r.result = Json{{"simplices", t.size()},
                      {"mass", mass(t)},
                      {"boundary_mass", mass(boundary(t))},
                      {"positivity", io::to_json(pos)},
                      {"calibration_gap", io::to_json(gap)}};
      r.ok = pos.positive;
      io::Table tab{{"simplex", "volume", "multiplicity", "phi"}, {}};
      for (std::size_t k = 0; k < t.size(); ++k)
        tab.rows.push_back({std::to_string(k), io::format_double(t.volume(k)),
                            io::format_double(t.simplices()[k].multiplicity), io::format_double(pos.phi_values[k])});
      r.table = tab;
      return r;
    };
  }

  // green
  int x_index = 0;
  std::string tests = "builtin:set1";
  bool discrete = false;
  double flatness_tol = 1e-9;
  double residual_tol = 5e-3;
  {
    auto* s = add("green", "Weak Poisson-Jensen identity for the Green's current of a meshed phi-submanifold");
    s->add_option("--mesh", mesh, "Mesh file or generator");
    s->add_option("--x-index", x_index, "Interior vertex carrying the point mass");
    s->add_option("--tests", tests, "Comma-separated test fields; builtin:set1 = re_z1, abs_z1_sq, re_z1_sq, normsq");
    s->add_flag("--discrete", discrete, "Force the discrete cotangent solve");
    s->add_option("--flatness-tol", flatness_tol, "Accepted 1 - phi on mesh simplices");
    s->add_option("--residual-tol", residual_tol, "Residual accepted per test function");
    commands["green"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto m = MeshedSubmanifold::build(io::mesh_from_spec(mesh), cal.form, flatness_tol);
      GreenOptions go;
      go.allow_exact = !discrete;
      const auto rep = green_check(m, x_index, test_fields(tests, cal.dim()), go);
      r.result = io::to_json(rep);
      r.ok = rep.max_residual <= residual_tol;
      io::Table t{{"test", "lhs", "rhs", "residual"}, {}};
      for (const auto& term : rep.terms)
        t.rows.push_back({term.name, io::format_double(term.lhs), io::format_double(term.rhs), io::format_double(term.residual)});
      r.table = t;
      return r;
    };
  }

  // maxprinciple
  std::string mode = "bounds";
  double modd_tol = 1e-8;
  {
    auto* s = add("maxprinciple", "Maximum-principle bounds (or the boundary tangency test) on a meshed submanifold");
    s->add_option("--mesh", mesh, "Mesh file or generator");
    s->add_option("--field", field, "builtin:<name> or polynomial JSON path");
    s->add_option("--mode", mode, "bounds or lemma58")->check(CLI::IsMember({"bounds", "lemma58"}));
    s->add_option("--flatness-tol", flatness_tol, "Accepted 1 - phi on mesh simplices");
    s->add_option("--modd-tol", modd_tol, "Mod-d residual accepted for the bounds precondition");
    commands["maxprinciple"].run = [&] {
      Report r;
      const auto cal = io::calibration_from_spec(c.cal);
      const auto m = MeshedSubmanifold::build(io::mesh_from_spec(mesh), cal.form, flatness_tol);
      const auto f = io::field_from_spec(field, cal.dim());
      const bool bounds = mode == "bounds";
      const LambdaSpan span = bounds ? saturated_lambda_span(cal.form, c.seed, c.threads) : LambdaSpan{};
      MaxPrincipleOptions mo;
      mo.modd_tol = modd_tol;
      const auto rep = max_principle_check(m, f, bounds ? MaxPrincipleMode::Bounds : MaxPrincipleMode::Lemma58, span, mo);
      r.result = io::to_json(rep);
      r.ok = rep.holds;
      return r;
    };
  }

  // duality / jensen
  std::string sites_path;
  std::string boundary_path;
  int degree = 2;
  std::optional<double> lambda;
  int dictionary = 12;
  int random_count = 0;
  std::string k_list = "0,1,2,3";
  int x_site = 4;
  auto model_options = [&] {
    DualityModelOptions mo;
    mo.dictionary = dictionary;
    mo.seed = c.seed;
    mo.threads = c.threads;
    return mo;
  };
  auto batch_report = [&](const std::vector<BatchInstance>& batch) {
    Report r;
    const auto sum = summarize(batch);
    Json inst = Json::array();
    for (const auto& b : batch) {
      Json j = io::to_json(b.result);
      j["instance"] = b.index;
      inst.push_back(j);
    }
    r.result = Json{{"summary", io::to_json(sum)}, {"instances", inst}};
    r.table = io::batch_table(batch);
    r.ok = sum.all_consistent();
    return r;
  };
  auto model_json = [](const FiniteDualityModel& m) {
    return Json{{"sites", m.sites.size()}, {"atoms", m.atom_count()}, {"box_center", io::to_json(m.box_center)},
                {"box_half_width", io::to_json(m.box_half_width)}};
  };
  {
    auto* s = add("duality", "Finite Farkas alternative for a boundary S = d(positive atoms), optionally mass-bounded");
    s->add_option("--sites", sites_path, "Sites JSON (default: square vertices and centre in the x1y1 plane)");
    s->add_option("--deg", degree, "Test-family degree")->check(CLI::Range(0, 8));
    s->add_option("--boundary", boundary_path, "Boundary JSON: values, atoms or mesh");
    s->add_option("--lambda", lambda, "Mass bound");
    s->add_option("--dictionary", dictionary, "Sampled phi-planes per site")->check(CLI::NonNegativeNumber);
    s->add_option("--random", random_count, "Batch mode: random instances, CSV of outcomes")->check(CLI::NonNegativeNumber);
    commands["duality"].auto_format = [&] { return std::string(random_count > 0 ? "csv" : "json"); };
    commands["duality"].run = [&] {
      const auto cal = io::calibration_from_spec(c.cal);
      auto sites = sites_path.empty() ? default_sites(cal.dim())
                                      : io::points_from_json(io::load_json(sites_path), cal.dim(), sites_path);
      const auto model = FiniteDualityModel::build(cal, std::move(sites), model_options());
      const auto bm = assemble_boundary_model(model, degree);
      if (random_count > 0) {
        if (!boundary_path.empty()) throw InputError("--boundary and --random are exclusive");
        Report r = batch_report(random_boundary_batch(bm, random_count, c.seed, lambda, c.threads));
        r.result["model"] = model_json(model);
        return r;
      }
      if (boundary_path.empty()) throw InputError("--boundary is required unless --random is given");
      const auto base = std::filesystem::path(boundary_path).parent_path().string();
      const auto sv = io::boundary_from_json(io::load_json(boundary_path), model, bm, base.empty() ? "." : base,
                                             boundary_path);
      Report r;
      const auto res = boundary_alternative(bm, sv, lambda);
      r.result = io::to_json(res);
      r.result["model"] = model_json(model);
      if (const auto mm = min_mass(bm, sv)) r.result["min_mass"] = *mm;
      r.ok = res.consistent;
      return r;
    };
  }
  {
    auto* s = add("jensen", "Finite Farkas alternative for the Poisson-Jensen equation of (K, x)");
    s->add_option("--sites", sites_path, "Sites JSON (default: square vertices and centre in the x1y1 plane)");
    s->add_option("--K", k_list, "Comma-separated K site indices");
    s->add_option("--x", x_site, "Target site index");
    s->add_option("--deg", degree, "Family degree")->check(CLI::Range(0, 8));
    s->add_option("--dictionary", dictionary, "Sampled phi-planes per site")->check(CLI::NonNegativeNumber);
    s->add_option("--random", random_count, "Batch mode: random instances, CSV of outcomes")->check(CLI::NonNegativeNumber);
    commands["jensen"].auto_format = [&] { return std::string(random_count > 0 ? "csv" : "json"); };
    commands["jensen"].run = [&] {
      const auto cal = io::calibration_from_spec(c.cal);
      if (random_count > 0) return batch_report(random_jensen_batch(cal, random_count, degree, c.seed, model_options()));
      auto sites = sites_path.empty() ? default_sites(cal.dim())
                                      : io::points_from_json(io::load_json(sites_path), cal.dim(), sites_path);
      const auto model = FiniteDualityModel::build(cal, std::move(sites), model_options());
      const auto jm = assemble_jensen_model(model, parse_index_list(k_list, "--K"), x_site, degree);
      const auto res = jensen_alternative(jm, model.tol);
      Report r;
      r.result = io::to_json(res);
      r.result["model"] = model_json(model);
      if (res.feasible) r.result["support"] = io::to_json(support_diagnostic(jm, res, model.tol));
      r.ok = res.consistent;
      return r;
    };
  }

  // verify-all
  std::string only;
  {
    auto* s = add("verify-all", "Run the acceptance suite", false);
    s->add_option("--only", only, "Comma-separated criterion ids (default: all)");
    commands["verify-all"].run = [&] {
      AcceptanceOptions ao;
      ao.seed = c.seed;
      ao.threads = c.threads;
      if (!only.empty()) ao.only = parse_index_list(only, "--only");
      Json crit = Json::array();
      io::Table t{{"id", "name", "passed", "detail"}, {}};
      Report r;
      run_acceptance(ao, [&](const CriterionResult& cr) {
        std::cerr << (cr.passed ? "[PASS] " : "[FAIL] ") << cr.id << ' ' << cr.name << ": " << cr.detail << '\n';
        Json m = Json::object();
        for (const auto& [k, v] : cr.metrics) m[k] = v;
        crit.push_back(Json{{"id", cr.id}, {"name", cr.name}, {"passed", cr.passed}, {"detail", cr.detail}, {"metrics", m}});
        t.rows.push_back({std::to_string(cr.id), cr.name, cr.passed ? "true" : "false", "\"" + cr.detail + "\""});
        r.ok = r.ok && cr.passed;
      });
      r.result = Json{{"passed", r.ok}, {"criteria", crit}};
      r.table = t;
      return r;
    };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  Command& cmd = commands.at(chosen->get_name());
  try {
    if (c.threads < 0) throw InputError("--threads must be non-negative");
    set_default_threads(c.threads > 0 ? c.threads : 0);
    const Report r = cmd.run();
    const std::string format = c.format == "auto" ? cmd.auto_format() : c.format;
    if (format == "csv") {
      if (!r.table) throw InputError(chosen->get_name() + " has no tabular output; use --format json");
      write_text(c.output, r.table->str());
    } else {
      Json report = Json::object();
      report["calibr"] = kVersion;
      report["config"] = resolved_config(chosen);
      report["ok"] = r.ok;
      report["result"] = r.result;
      write_text(c.output, io::dump(report));
    }
    if (!c.emit_csv.empty()) {
      if (!r.table) throw InputError(chosen->get_name() + " has no tabular output for --emit-csv");
      write_text(c.emit_csv, r.table->str());
    }
    return r.ok ? 0 : 1;
  } catch (const InputError& e) {
    std::cerr << "calibr " << chosen->get_name() << ": input error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "calibr " << chosen->get_name() << ": input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "calibr " << chosen->get_name() << ": " << e.what() << '\n';
    return 1;
  }
}
