#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "calibr/calibration.hpp"
#include "calibr/grassmann.hpp"

namespace calibr {

namespace {

Blade bits_of(std::initializer_list<int> zero_based) {
  Blade b;
  for (int i : zero_based) b.bits |= std::uint64_t{1} << i;
  return b;
}

ExteriorElement two_form_from_matrix(const Eigen::MatrixXd& a) {
  // omega(u, v) = <A u, v>, so omega(e_i, e_j) = A(j, i).
  const int n = static_cast<int>(a.rows());
  ExteriorElement w(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w.add_term(bits_of({i, j}), a(j, i));
  return w.normalize();
}

ExteriorElement shift(const ExteriorElement& a, int n_new, int offset) {
  ExteriorElement out(n_new, a.degree());
  for (const auto& [b, c] : a.terms()) out.add_term(Blade{b.bits << offset}, c);
  return out;
}

std::vector<std::string> split_selector(std::string s) {
  for (char& ch : s) {
    if (ch == '(' || ch == ',') ch = ':';
  }
  s.erase(std::remove(s.begin(), s.end(), ')'), s.end());
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  return parts;
}

int parse_int(const std::string& s, const std::string& sel) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("catalogue: bad integer parameter '" + s + "' in '" + sel + "'");
  }
}

double parse_double(const std::string& s, const std::string& sel) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("catalogue: bad real parameter '" + s + "' in '" + sel + "'");
  }
}

void require_params(const std::vector<std::string>& parts, std::size_t count, const std::string& sel) {
  if (parts.size() != count + 1) {
    throw InputError("catalogue: '" + parts.front() + "' expects " + std::to_string(count) + " parameter(s): '" +
                     sel + "'");
  }
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, double>& comass_cache() {
  static std::map<std::string, double> cache;
  return cache;
}

}  // namespace

Eigen::MatrixXd complex_structure(int complex_dim) {
  const int n = 2 * complex_dim;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < complex_dim; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;   // J e_x = e_y
    j(2 * k, 2 * k + 1) = -1.0;  // J e_y = -e_x
  }
  return j;
}

std::vector<Eigen::MatrixXd> quaternionic_structures(int quaternionic_dim) {
  const int n = 4 * quaternionic_dim;
  std::vector<Eigen::MatrixXd> out(3, Eigen::MatrixXd::Zero(n, n));
  // Left multiplication on q = x0 + x1 i + x2 j + x3 k, written as images of (x0, x1, x2, x3).
  const int li[4][2] = {{1, -1}, {0, 1}, {3, -1}, {2, 1}};  // i q = (-x1, x0, -x3, x2)
  const int lj[4][2] = {{2, -1}, {3, 1}, {0, 1}, {1, -1}};  // j q = (-x2, x3, x0, -x1)
  const int lk[4][2] = {{3, -1}, {2, -1}, {1, 1}, {0, 1}};  // k q = (-x3, -x2, x1, x0)
  const int (*tables[3])[2] = {li, lj, lk};
  for (int a = 0; a < 3; ++a) {
    for (int f = 0; f < quaternionic_dim; ++f) {
      for (int row = 0; row < 4; ++row) {
        out[a](4 * f + row, 4 * f + tables[a][row][0]) = tables[a][row][1];
      }
    }
  }
  return out;
}

ExteriorElement kaehler_form(int complex_dim, int power) {
  if (complex_dim < 1 || power < 1 || power > complex_dim) throw InputError("kaehler: need 1 <= p <= n");
  const int n = 2 * complex_dim;
  ExteriorElement out(n, 2 * power);
  for (Blade k : blades(complex_dim, power)) {
    Blade b;
    for (int idx : k.indices()) b.bits |= bits_of({2 * idx - 2, 2 * idx - 1}).bits;
    out.add_term(b, 1.0);
  }
  return out;
}

ExteriorElement special_lagrangian_form(int complex_dim) {
  if (complex_dim < 1) throw InputError("special_lagrangian: need n >= 1");
  const int m = complex_dim;
  ExteriorElement out(2 * m, m);
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
    const int ys = std::popcount(s);
    if (ys & 1) continue;
    Blade b;
    for (int k = 0; k < m; ++k) b.bits |= std::uint64_t{1} << (2 * k + ((s >> k) & 1u));
    out.add_term(b, (ys / 2) % 2 ? -1.0 : 1.0);
  }
  return out;
}

ExteriorElement associative_form() {
  ExteriorElement phi(7, 3);
  phi += ExteriorElement::basis(7, {1, 2, 3});
  phi += ExteriorElement::basis(7, {1, 4, 5});
  phi += ExteriorElement::basis(7, {1, 6, 7});
  phi += ExteriorElement::basis(7, {2, 4, 6});
  phi += ExteriorElement::basis(7, {2, 5, 7}, -1.0);
  phi += ExteriorElement::basis(7, {3, 4, 7}, -1.0);
  phi += ExteriorElement::basis(7, {3, 5, 6}, -1.0);
  return phi;
}

ExteriorElement coassociative_form() { return hodge_star(associative_form()); }

ExteriorElement cayley_form() {
  const ExteriorElement phi8 = shift(associative_form(), 8, 1);
  const ExteriorElement psi8 = shift(coassociative_form(), 8, 1);
  return wedge(ExteriorElement::basis(8, {1}), phi8) + psi8;
}

ExteriorElement quaternionic_form(int quaternionic_dim) {
  if (quaternionic_dim < 1) throw InputError("quaternionic: need n >= 1");
  ExteriorElement out(4 * quaternionic_dim, 4);
  for (const auto& a : quaternionic_structures(quaternionic_dim)) {
    const ExteriorElement w = two_form_from_matrix(a);
    out += wedge(w, w);
  }
  out *= 1.0 / 6.0;
  return out.normalize();
}

ExteriorElement lambda_example_form(double lambda) {
  if (!(std::abs(lambda) < 1.0)) throw InputError("lambda_example: need |lambda| < 1");
  return ExteriorElement::basis(4, {1, 2}) + ExteriorElement::basis(4, {3, 4}, lambda);
}

Calibration catalogue(const std::string& selector, bool certify) {
  auto parts = split_selector(selector);
  if (parts.empty()) throw InputError("catalogue: empty selector");
  std::string name = parts.front();
  if (name == "omega4") parts = {"kaehler", "2", "1"};
  if (name == "omega6") parts = {"kaehler", "3", "1"};
  if (name == "cayley8") parts = {"cayley"};
  if (name == "sl3") parts = {"special_lagrangian", "3"};
  if (name == "lambda_example") parts.front() = "lambda";
  name = parts.front();

  Calibration cal;
  std::ostringstream canon;
  if (name == "kaehler") {
    require_params(parts, 2, selector);
    const int m = parse_int(parts[1], selector), p = parse_int(parts[2], selector);
    cal.form = kaehler_form(m, p);
    canon << "kaehler(" << m << "," << p << ")";
    cal.grassmannian_hint = "complex " + std::to_string(p) + "-planes";
    cal.normal_flag = true;
  } else if (name == "special_lagrangian") {
    require_params(parts, 1, selector);
    const int m = parse_int(parts[1], selector);
    cal.form = special_lagrangian_form(m);
    canon << "special_lagrangian(" << m << ")";
    cal.grassmannian_hint = "special Lagrangian planes";
    cal.normal_flag = true;
  } else if (name == "associative") {
    require_params(parts, 0, selector);
    cal.form = associative_form();
    canon << "associative";
    cal.grassmannian_hint = "associative 3-planes";
    cal.normal_flag = true;
  } else if (name == "coassociative") {
    require_params(parts, 0, selector);
    cal.form = coassociative_form();
    canon << "coassociative";
    cal.grassmannian_hint = "coassociative 4-planes";
    cal.normal_flag = true;
  } else if (name == "cayley") {
    require_params(parts, 0, selector);
    cal.form = cayley_form();
    canon << "cayley";
    cal.grassmannian_hint = "Cayley 4-planes";
    cal.normal_flag = true;
  } else if (name == "quaternionic") {
    require_params(parts, 1, selector);
    const int m = parse_int(parts[1], selector);
    cal.form = quaternionic_form(m);
    canon << "quaternionic(" << m << ")";
    cal.grassmannian_hint = "quaternionic lines";
    cal.normal_flag = true;
  } else if (name == "lambda") {
    require_params(parts, 1, selector);
    const double lam = parse_double(parts[1], selector);
    cal.form = lambda_example_form(lam);
    std::ostringstream l;
    l.precision(17);
    l << lam;
    canon << "lambda_example(" << l.str() << ")";
    cal.grassmannian_hint = "single plane {1,2}";
  } else if (name == "volume") {
    require_params(parts, 1, selector);
    const int n = parse_int(parts[1], selector);
    cal.form = ExteriorElement::volume(n);
    canon << "volume(" << n << ")";
    cal.grassmannian_hint = "single plane {1.." + std::to_string(n) + "}";
  } else {
    throw InputError("catalogue: unknown calibration '" + selector + "'");
  }
  cal.name = canon.str();
  cal.claimed_comass = 1.0;
  if (certify) {
    std::optional<double> cached;
    {
      std::lock_guard lock(cache_mutex());
      auto it = comass_cache().find(cal.name);
      if (it != comass_cache().end()) cached = it->second;
    }
    if (!cached) {
      ComassOptions opts;
      opts.multistarts = 64;
      opts.seed = 7;
      cached = comass(cal.form, opts).value;
      std::lock_guard lock(cache_mutex());
      comass_cache()[cal.name] = *cached;
    }
    if (std::abs(*cached - cal.claimed_comass) > 1e-4) {
      throw InputError("catalogue: comass of " + cal.name + " measured as " + std::to_string(*cached));
    }
    cal.certified_comass = cached;
  }
  return cal;
}

std::vector<CatalogueEntry> catalogue_list() {
  const std::vector<std::string> sels = {"kaehler:2:1",   "kaehler:3:1", "kaehler:3:2",  "special_lagrangian:3",
                                         "associative",   "coassociative", "cayley",     "quaternionic:2",
                                         "lambda:0.5",    "volume:3"};
  std::vector<CatalogueEntry> out;
  for (const auto& s : sels) {
    const Calibration c = catalogue(s, false);
    out.push_back({c.name, c.dim(), c.degree(), c.form.terms().size()});
  }
  return out;
}

std::vector<std::string> normal_catalogue_selectors() {
  return {"kaehler:2:1",  "kaehler:3:1", "kaehler:3:2", "special_lagrangian:3",
          "associative", "coassociative", "cayley",     "quaternionic:2"};
}

Calibration user_calibration(const std::string& name, ExteriorElement form, bool rescale_to_unit_comass) {
  Calibration cal;
  cal.name = name;
  const double c = comass(form).value;
  if (rescale_to_unit_comass) {
    form *= 1.0 / c;
    cal.claimed_comass = 1.0;
    cal.certified_comass = 1.0;
  } else {
    cal.claimed_comass = std::abs(c - 1.0) <= 1e-4 ? 1.0 : c;
    cal.certified_comass = c;
  }
  cal.form = std::move(form);
  return cal;
}

}  // namespace calibr
