#include "calibr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace calibr::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw InputError(where + ": " + what); }

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) fail(where, "unknown key \"" + k + "\"");
  }
}

const Json& required(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

int get_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

double get_real(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

Eigen::VectorXd get_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_real(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<double> split_numbers(const std::string& s, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(where, "bad number \"" + tok + "\"");
    }
  }
  return out;
}

double parse_number(const std::string& tok, const std::string& where) {
  const auto v = split_numbers(tok, where);
  if (v.size() != 1) fail(where, "expected one number, got \"" + tok + "\"");
  return v[0];
}

void emit(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [k, v] : j.items()) {
        out += pad + "  " + Json(k).dump() + ": ";
        emit(out, v, indent + 1);
        out += ++i < j.size() ? ",\n" : "\n";
      }
      out += pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(out, j[i], indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad + "  ";
        emit(out, j[i], indent + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw InputError(origin + ": line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  }
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump(const Json& j) {
  std::string out;
  emit(out, j, 0);
  out += "\n";
  return out;
}

ExteriorElement form_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"n", "p", "terms"});
  const int n = get_int(required(j, where, "n"), where + ".n");
  const int p = get_int(required(j, where, "p"), where + ".p");
  if (n < 1 || n > kMaxDim) fail(where + ".n", "must be in [1, " + std::to_string(kMaxDim) + "]");
  if (p < 0 || p > n) fail(where + ".p", "must be in [0, n]");
  const Json& terms = required(j, where, "terms");
  if (!terms.is_array()) fail(where + ".terms", "expected an array");
  ExteriorElement out(n, p);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tw = where + ".terms[" + std::to_string(t) + "]";
    check_keys(terms[t], tw, {"indices", "coeff"});
    const Json& idx = required(terms[t], tw, "indices");
    if (!idx.is_array() || idx.size() != static_cast<std::size_t>(p))
      fail(tw + ".indices", "expected " + std::to_string(p) + " indices");
    std::vector<int> ind;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::string iw = tw + ".indices[" + std::to_string(k) + "]";
      const int i = get_int(idx[k], iw);
      if (i < 1 || i > n) fail(iw, "index " + std::to_string(i) + " outside 1.." + std::to_string(n));
      if (!ind.empty() && i <= ind.back()) fail(iw, "indices must be strictly increasing");
      ind.push_back(i);
    }
    const double c = get_real(required(terms[t], tw, "coeff"), tw + ".coeff");
    const Blade b = Blade::from_indices(ind);
    if (out.terms().count(b)) fail(tw + ".indices", "duplicate multi-index");
    out.add_term(b, c);
  }
  return out;
}

Json form_to_json(const ExteriorElement& a) {
  Json terms = Json::array();
  for (const auto& [b, c] : a.terms()) terms.push_back(Json{{"indices", b.indices()}, {"coeff", c}});
  return Json{{"n", a.dim()}, {"p", a.degree()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"n", "terms"});
  const int n = get_int(required(j, where, "n"), where + ".n");
  if (n < 1) fail(where + ".n", "must be positive");
  const Json& terms = required(j, where, "terms");
  if (!terms.is_array()) fail(where + ".terms", "expected an array");
  Polynomial out(n);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tw = where + ".terms[" + std::to_string(t) + "]";
    check_keys(terms[t], tw, {"exponents", "coeff"});
    const Json& ex = required(terms[t], tw, "exponents");
    if (!ex.is_array() || ex.size() != static_cast<std::size_t>(n))
      fail(tw + ".exponents", "expected " + std::to_string(n) + " exponents");
    Polynomial::Exponents e;
    for (std::size_t k = 0; k < ex.size(); ++k) {
      const int v = get_int(ex[k], tw + ".exponents[" + std::to_string(k) + "]");
      if (v < 0) fail(tw + ".exponents[" + std::to_string(k) + "]", "must be non-negative");
      e.push_back(v);
    }
    out.add_term(e, get_real(required(terms[t], tw, "coeff"), tw + ".coeff"));
  }
  return out;
}

Json polynomial_to_json(const Polynomial& p) {
  Json terms = Json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back(Json{{"exponents", e}, {"coeff", c}});
  return Json{{"n", p.vars()}, {"terms", terms}};
}

Calibration calibration_from_spec(const std::string& spec) {
  if (spec.ends_with(".json") || std::filesystem::exists(spec)) {
    const std::string name = std::filesystem::path(spec).stem().string();
    return user_calibration(name, form_from_json(load_json(spec), spec), false);
  }
  return catalogue(spec);
}

ScalarField field_from_spec(const std::string& spec, int n) {
  if (spec.starts_with("builtin:")) return builtin_field(spec.substr(8), n);
  const Polynomial p = polynomial_from_json(load_json(spec), spec);
  if (p.vars() != n)
    throw InputError(spec + ": field has n = " + std::to_string(p.vars()) + ", calibration has n = " + std::to_string(n));
  return ScalarField::from_polynomial(std::filesystem::path(spec).stem().string(), p);
}

std::vector<Eigen::VectorXd> probes_from_spec(const std::string& spec, int n) {
  if (spec.starts_with("point:")) {
    const auto v = split_numbers(spec.substr(6), spec);
    if (static_cast<int>(v.size()) != n) fail(spec, "expected " + std::to_string(n) + " coordinates");
    return {Eigen::Map<const Eigen::VectorXd>(v.data(), n)};
  }
  if (spec.starts_with("grid:")) {
    // grid:(a..b)^d:k
    const std::string body = spec.substr(5);
    const auto open = body.find('('), dots = body.find(".."), close = body.find(')'), caret = body.find('^'),
               colon = body.rfind(':');
    if (open != 0 || dots == std::string::npos || close == std::string::npos || caret != close + 1 ||
        colon == std::string::npos || colon < caret)
      fail(spec, "expected grid:(a..b)^d:k");
    const double a = parse_number(body.substr(1, dots - 1), spec);
    const double b = parse_number(body.substr(dots + 2, close - dots - 2), spec);
    const double d = parse_number(body.substr(caret + 1, colon - caret - 1), spec);
    const double k = parse_number(body.substr(colon + 1), spec);
    if (d != n) fail(spec, "grid dimension " + body.substr(caret + 1, colon - caret - 1) + " does not match n = " + std::to_string(n));
    if (k < 1 || k != std::floor(k) || k > 64) fail(spec, "points per axis must be an integer in 1..64");
    const int m = static_cast<int>(k);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(m);
    if (total > 1000000) fail(spec, "grid too large");
    std::vector<Eigen::VectorXd> out;
    for (std::size_t idx = 0; idx < total; ++idx) {
      Eigen::VectorXd x(n);
      std::size_t r = idx;
      for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(r % static_cast<std::size_t>(m));
        r /= static_cast<std::size_t>(m);
        x[i] = m == 1 ? 0.5 * (a + b) : a + (b - a) * c / (m - 1);
      }
      out.push_back(x);
    }
    return out;
  }
  return points_from_json(load_json(spec), n, spec);
}

std::vector<Eigen::VectorXd> points_from_json(const Json& j, int n, const std::string& where) {
  const Json* arr = &j;
  std::string w = where;
  if (j.is_object()) {
    check_keys(j, where, {"sites"});
    arr = &required(j, where, "sites");
    w += ".sites";
  }
  if (!arr->is_array() || arr->empty()) fail(w, "expected a non-empty array of points");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const std::string pw = w + "[" + std::to_string(i) + "]";
    out.push_back(get_vector((*arr)[i], pw));
    const int len = static_cast<int>(out.back().size());
    if (n > 0 ? len != n : len != static_cast<int>(out.front().size()) || len == 0)
      fail(pw, "expected " + std::to_string(n > 0 ? n : static_cast<int>(out.front().size())) + " coordinates");
  }
  return out;
}

PolyhedralCurrent mesh_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon != std::string::npos && (kind == "disc" || kind == "tilted" || kind == "graph" || kind == "cap")) {
    std::string rest = spec.substr(colon + 1);
    std::replace(rest.begin(), rest.end(), ':', ',');
    const auto args = split_numbers(rest, spec);
    const std::size_t want = kind == "disc" || kind == "graph" ? 1 : 2;
    if (args.size() != want) fail(spec, "expected " + std::to_string(want) + " numeric argument(s)");
    const double h = args.back();
    if (!(h > 0.0 && h <= 1.0)) fail(spec, "mesh size must be in (0, 1]");
    if (kind == "disc") return disc_mesh(h);
    if (kind == "graph") return graph_curve_mesh(h);
    if (kind == "tilted") return tilted_disc_mesh(args[0], h);
    return cap_mesh(args[0], h);
  }
  return read_mesh_file(spec);
}

Eigen::VectorXd boundary_from_json(const Json& j, const FiniteDualityModel& model, const BoundaryModel& bm,
                                   const std::string& base_dir, const std::string& where) {
  check_keys(j, where, {"values", "atoms", "mesh"});
  if (j.size() != 1) fail(where, "expected exactly one of \"values\", \"atoms\", \"mesh\"");
  if (j.contains("values")) {
    Eigen::VectorXd v = get_vector(j.at("values"), where + ".values");
    if (v.size() != static_cast<Eigen::Index>(bm.tests.size()))
      fail(where + ".values", "expected " + std::to_string(bm.tests.size()) + " values (one per test form)");
    return v;
  }
  if (j.contains("mesh")) {
    if (!j.at("mesh").is_string()) fail(where + ".mesh", "expected a path");
    std::filesystem::path p = j.at("mesh").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    const PolyhedralCurrent s = read_mesh_file(p.string());
    if (s.dim() != model.dim() || s.degree() != model.calibration.degree() - 1)
      fail(where + ".mesh", "expected a " + std::to_string(model.calibration.degree() - 1) + "-current in R^" +
                                std::to_string(model.dim()));
    return boundary_values(bm, s);
  }
  const Json& atoms = j.at("atoms");
  if (!atoms.is_array()) fail(where + ".atoms", "expected an array");
  std::vector<BoundaryAtom> out;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const std::string aw = where + ".atoms[" + std::to_string(a) + "]";
    const Json& e = atoms[a];
    check_keys(e, aw, {"site", "plane", "point", "frame", "weight"});
    const double w = e.contains("weight") ? get_real(e.at("weight"), aw + ".weight") : 1.0;
    if (e.contains("site")) {
      if (e.contains("point") || e.contains("frame")) fail(aw, "give either site/plane or point/frame");
      const int s = get_int(e.at("site"), aw + ".site");
      const int pl = get_int(required(e, aw, "plane"), aw + ".plane");
      if (s < 0 || s >= static_cast<int>(model.sites.size())) fail(aw + ".site", "out of range");
      if (pl < 0 || pl >= static_cast<int>(model.dictionary[static_cast<std::size_t>(s)].size()))
        fail(aw + ".plane", "out of range");
      out.push_back({model.sites[static_cast<std::size_t>(s)], model.dictionary[static_cast<std::size_t>(s)][static_cast<std::size_t>(pl)], w});
      continue;
    }
    const Eigen::VectorXd x = get_vector(required(e, aw, "point"), aw + ".point");
    if (x.size() != model.dim()) fail(aw + ".point", "expected " + std::to_string(model.dim()) + " coordinates");
    const Json& fr = required(e, aw, "frame");
    if (!fr.is_array() || fr.size() != static_cast<std::size_t>(model.calibration.degree()))
      fail(aw + ".frame", "expected " + std::to_string(model.calibration.degree()) + " column vectors");
    Eigen::MatrixXd frame(model.dim(), model.calibration.degree());
    for (std::size_t c = 0; c < fr.size(); ++c) {
      const Eigen::VectorXd col = get_vector(fr[c], aw + ".frame[" + std::to_string(c) + "]");
      if (col.size() != model.dim()) fail(aw + ".frame[" + std::to_string(c) + "]", "wrong length");
      frame.col(static_cast<Eigen::Index>(c)) = col;
    }
    try {
      out.push_back({x, simple_from_frame(frame).plane, w});
    } catch (const std::exception& ex) {
      fail(aw + ".frame", ex.what());
    }
  }
  return boundary_values(bm, out);
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return out;
}

Json to_json(const SimplePlane& plane) {
  Json cols = Json::array();
  for (Eigen::Index c = 0; c < plane.frame().cols(); ++c) cols.push_back(to_json(Eigen::VectorXd(plane.frame().col(c))));
  return Json{{"frame", cols}, {"pvector", form_to_json(plane.pvector())}};
}

Json to_json(const ComassResult& r) {
  Json maxima = Json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(r.local_maxima.size(), 10); ++i) {
    Json m = to_json(r.local_maxima[i]);
    m["value"] = r.local_values[i];
    maxima.push_back(m);
  }
  return Json{{"value", r.value},
              {"frame", to_json(r.maximizer)["frame"]},
              {"saturated", r.saturated},
              {"converged_starts", r.converged_starts},
              {"starts", r.starts},
              {"distinct_local_maxima", r.local_maxima.size()},
              {"local_maxima", maxima}};
}

Json to_json(const PlaneSampleSet& s) {
  Json planes = Json::array();
  for (std::size_t i = 0; i < s.planes.size(); ++i) {
    Json p = to_json(s.planes[i]);
    p["phi"] = s.values[i];
    planes.push_back(p);
  }
  return Json{{"count", s.planes.size()},
              {"requested", s.requested},
              {"exhausted", s.exhausted},
              {"tolerance", s.tolerance},
              {"dedup_angle", s.dedup_angle},
              {"seed", s.seed},
              {"multistart_count", s.multistart_count},
              {"raw_accepted", s.raw_accepted},
              {"planes", planes}};
}

Json to_json(const Reduction& r) {
  Json basis = Json::array();
  for (Eigen::Index c = 0; c < r.basis.cols(); ++c) basis.push_back(to_json(Eigen::VectorXd(r.basis.col(c))));
  return Json{{"dim_W", r.basis.cols()},
              {"basis", basis},
              {"psi", form_to_json(r.psi)},
              {"elliptic", r.elliptic},
              {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)},
              {"witness_defect", r.witness_defect}};
}

Json to_json(const ConeReport& r) {
  Json planes = Json::array();
  for (std::size_t i = 0; i < r.planes.size(); ++i) {
    Json p = to_json(r.planes[i]);
    if (i < r.weights.size()) p["weight"] = r.weights[i];
    planes.push_back(p);
  }
  return Json{{"status", to_string(r.status)},
              {"margin", r.margin},
              {"residual", r.residual},
              {"tol", r.tol},
              {"boundary_tol", r.boundary_tol},
              {"sample_count", r.sample_count},
              {"augmented", r.augmented},
              {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)},
              {"separator", r.separator ? form_to_json(*r.separator) : Json(nullptr)},
              {"atoms", planes}};
}

Json to_json(const Lemma25Report& r) {
  return Json{{"agree", r.agree},
              {"mass_lower", r.mass_lower},
              {"mass_upper", r.mass_upper},
              {"phi_value", r.phi_value},
              {"unit_value", r.unit_value},
              {"in_cone", r.in_cone},
              {"in_hull", r.in_hull},
              {"cone", to_json(r.cone)},
              {"hull", to_json(r.hull)}};
}

Json to_json(const MassBracket& r) {
  Json planes = Json::array();
  for (std::size_t i = 0; i < r.planes.size(); ++i) {
    Json p = to_json(r.planes[i]);
    p["weight"] = r.weights[i];
    planes.push_back(p);
  }
  return Json{{"lower", r.lower},
              {"upper", r.upper},
              {"dual", form_to_json(r.dual)},
              {"generators", r.generators},
              {"rounds", r.rounds},
              {"decomposition", planes}};
}

Json to_json(const PshReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back(Json{{"x", to_json(p.x)}, {"status", to_string(p.status)}, {"margin", p.margin},
                       {"witness", to_json(p.witness)["frame"]}});
  return Json{{"overall", to_string(r.overall)}, {"min_margin", r.min_margin}, {"points", pts}};
}

Json to_json(const ModDResult& r) {
  return Json{{"residual", r.residual}, {"grad_norm", r.grad_norm}, {"alpha", form_to_json(r.alpha)},
              {"sigma", form_to_json(r.sigma)}};
}

Json to_json(const FlatResult& r) {
  return Json{{"flat", r.flat},
              {"vacuous", r.vacuous},
              {"worst_value", r.worst_value},
              {"worst_plane", r.worst_plane ? to_json(*r.worst_plane) : Json(nullptr)},
              {"tangential_comass", r.tangential_comass},
              {"tangential_samples", r.tangential_samples}};
}

Json to_json(const NormalityReport& r) {
  Json fails = Json::array();
  for (const auto& f : r.failures)
    fails.push_back(Json{{"normal", to_json(f.normal)}, {"mismatch", f.mismatch}, {"left_dim", f.left_dim},
                         {"right_dim", f.right_dim}});
  return Json{{"normal", r.normal},   {"trials", r.trials},         {"degenerate", r.degenerate},
              {"max_mismatch", r.max_mismatch}, {"lambda_dim", r.lambda_dim}, {"failures", fails}};
}

Json to_json(const PositiveCheck& r) {
  Json v = Json::array();
  for (const auto& x : r.violations)
    v.push_back(Json{{"simplex", x.simplex}, {"phi", x.phi_value}, {"multiplicity", x.multiplicity}});
  return Json{{"positive", r.positive}, {"violations", v}};
}

Json to_json(const CalibrationGap& r) {
  return Json{{"tphi", r.tphi}, {"mass", r.mass}, {"gap", r.gap}, {"positive", r.positive}};
}

Json to_json(const GreenReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms)
    terms.push_back(Json{{"test", t.name}, {"lhs", t.lhs}, {"rhs", t.rhs}, {"residual", t.residual}});
  return Json{{"exact", r.exact},       {"x_index", r.x_index}, {"max_residual", r.max_residual},
              {"mu_sum", r.mu_sum},     {"mu_min", r.mu_min},   {"g_min", r.g_min},
              {"mu_support", r.mu_vertices.size()}, {"terms", terms}};
}

Json to_json(const MaxPrincipleReport& r) {
  return Json{{"mode", r.mode == MaxPrincipleMode::Bounds ? "bounds" : "lemma58"},
              {"precondition_ok", r.precondition_ok},
              {"precondition", r.precondition},
              {"holds", r.holds},
              {"boundary_min", r.boundary_min},
              {"boundary_max", r.boundary_max},
              {"worst", r.worst}};
}

Json to_json(const SubharmonicReport& r) {
  return Json{{"precondition_ok", r.precondition_ok}, {"precondition", r.precondition}, {"holds", r.holds},
              {"min_laplacian", r.min_laplacian},     {"max_laplacian", r.max_laplacian},
              {"interior_vertices", r.vertices.size()}};
}

Json to_json(const AlternativeResult& r) {
  Json primal = r.feasible ? Json{{"status", "Feasible"},
                                  {"weights", to_json(r.weights)},
                                  {"mu", to_json(r.mu)},
                                  {"residual", r.primal_residual},
                                  {"mass", r.primal_mass}}
                           : Json{{"status", "Infeasible"}, {"residual", r.primal_residual}};
  Json dual = r.certificate ? Json{{"status", "Certificate"},
                                   {"coefficients", to_json(r.coefficients)},
                                   {"scale", r.scale},
                                   {"margin", r.margin}}
                            : Json{{"status", "None"}, {"margin", r.margin}};
  return Json{{"primal", primal},
              {"dual", dual},
              {"consistent", r.consistent},
              {"boundary_tie", r.boundary_tie},
              {"lambda", r.lambda ? Json(*r.lambda) : Json(nullptr)},
              {"family_degree", r.family_degree},
              {"family_size", r.family_size},
              {"dictionary_size", r.dictionary_size},
              {"lp_iterations", r.lp_iterations}};
}

Json to_json(const SupportDiagnostic& r) {
  Json sites = Json::array();
  for (std::size_t i = 0; i < r.sites.size(); ++i) sites.push_back(Json{{"site", r.sites[i]}, {"excess", r.excess[i]}});
  return Json{{"consistent", r.consistent}, {"worst", r.worst}, {"sites", sites}};
}

Json to_json(const BatchSummary& s) {
  return Json{{"instances", s.instances}, {"consistent", s.consistent},       {"ties", s.ties},
              {"feasible", s.feasible},   {"certificates", s.certificates}, {"all_consistent", s.all_consistent()}};
}

void Table::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string Table::str() const {
  std::ostringstream ss;
  write(ss);
  return ss.str();
}

Table planes_table(const PlaneSampleSet& s) {
  Table t;
  const int n = s.form.dim(), p = s.form.degree();
  t.header.push_back("plane");
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < n; ++r) t.header.push_back("v" + std::to_string(c + 1) + "_" + std::to_string(r + 1));
  t.header.push_back("phi");
  for (std::size_t i = 0; i < s.planes.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (double x : s.planes[i].frame().reshaped()) row.push_back(format_double(x));
    row.push_back(format_double(s.values[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table batch_table(const std::vector<BatchInstance>& batch) {
  Table t;
  t.header = {"instance", "primal_feasible", "dual_certificate", "consistent", "boundary_tie", "margin",
              "primal_residual"};
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  for (const auto& x : batch) {
    t.rows.push_back({std::to_string(x.index), b(x.result.feasible), b(x.result.certificate), b(x.result.consistent),
                      b(x.result.boundary_tie), format_double(x.result.margin), format_double(x.result.primal_residual)});
  }
  return t;
}

}  // namespace calibr::io
