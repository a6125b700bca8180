#include "calibr/currents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Sparse>

#include "calibr/lp.hpp"
#include "calibr/parallel.hpp"

namespace calibr {

namespace {

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// Sorts the indices, returning the permutation sign.
int canonicalize(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  return sign;
}

double triangle_area(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::VectorXd u = b - a, v = c - a;
  return 0.5 * std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - u.dot(v) * u.dot(v)));
}

// cot of the angle at o between oa and ob.
double cot_at(const Eigen::VectorXd& o, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd u = a - o, v = b - o;
  const double cross = std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - u.dot(v) * u.dot(v)));
  return u.dot(v) / cross;
}

struct DiscTopology {
  Eigen::MatrixXd xy;  // 2 x V
  std::vector<Simplex> triangles;
};

// Hexagonal-lattice triangulation of the closed unit disc: ring k of the
// lattice has 6k vertices, the outer ring is spread evenly on the unit circle
// and the interior is placed by a uniform-weight (Tutte) harmonic solve.
DiscTopology ring_disc(double h) {
  if (!(h > 0.0) || h > 1.0) throw InputError("disc mesh size must be in (0, 1]");
  const int rings = static_cast<int>(std::ceil(1.0 / h - 1e-12));
  const int count = 1 + 3 * rings * (rings + 1);
  const int steps[6][2] = {{-1, 1}, {-1, 0}, {0, -1}, {1, -1}, {1, 0}, {0, 1}};
  std::map<std::pair<int, int>, int> index;
  index[{0, 0}] = 0;
  DiscTopology d;
  d.xy = Eigen::MatrixXd::Zero(2, count);
  int next = 1;
  for (int k = 1; k <= rings; ++k) {
    int a = k, b = 0;
    for (int side = 0; side < 6; ++side) {
      for (int j = 0; j < k; ++j) {
        index[{a, b}] = next;
        if (k == rings) {
          const double t = 2 * std::numbers::pi * (next - (count - 6 * rings)) / (6.0 * rings);
          d.xy.col(next) << std::cos(t), std::sin(t);
        }
        ++next;
        a += steps[side][0];
        b += steps[side][1];
      }
    }
  }
  auto find = [&](int a, int b) {
    const auto it = index.find({a, b});
    return it == index.end() ? -1 : it->second;
  };
  for (const auto& [ab, i] : index) {
    const auto [a, b] = ab;
    const int p1 = find(a + 1, b), p2 = find(a, b + 1), p3 = find(a - 1, b + 1);
    if (p1 >= 0 && p2 >= 0) d.triangles.push_back({{i, p1, p2}, 1.0});
    if (p2 >= 0 && p3 >= 0) d.triangles.push_back({{i, p2, p3}, 1.0});
  }
  std::sort(d.triangles.begin(), d.triangles.end(),
            [](const Simplex& x, const Simplex& y) { return x.vertices < y.vertices; });

  const int inner = count - 6 * rings;
  if (inner > 1) {
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(count));
    for (const auto& t : d.triangles)
      for (int u : t.vertices)
        for (int v : t.vertices)
          if (u != v) nb[static_cast<std::size_t>(u)].push_back(v);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(inner, 2);
    for (int i = 0; i < inner; ++i) {
      auto& n = nb[static_cast<std::size_t>(i)];
      std::sort(n.begin(), n.end());
      n.erase(std::unique(n.begin(), n.end()), n.end());
      trip.emplace_back(i, i, static_cast<double>(n.size()));
      for (int j : n) {
        if (j < inner) {
          trip.emplace_back(i, j, -1.0);
        } else {
          rhs.row(i) += d.xy.col(j).transpose();
        }
      }
    }
    Eigen::SparseMatrix<double> lap(inner, inner);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    const Eigen::MatrixXd pos = solver.solve(rhs);
    d.xy.leftCols(inner) = pos.transpose();
    d.xy.col(0).setZero();
  }
  return d;
}

PolyhedralCurrent from_disc(const DiscTopology& d, const std::function<Eigen::VectorXd(double, double)>& embed) {
  const Eigen::VectorXd first = embed(0.0, 0.0);
  Eigen::MatrixXd v(first.size(), d.xy.cols());
  for (Eigen::Index i = 0; i < d.xy.cols(); ++i) v.col(i) = embed(d.xy(0, i), d.xy(1, i));
  return PolyhedralCurrent(2, std::move(v), d.triangles);
}

}  // namespace

PolyhedralCurrent::PolyhedralCurrent(int p, Eigen::MatrixXd vertices, std::vector<Simplex> simplices)
    : p_(p), vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  if (p_ < 0) throw InputError("current dimension must be non-negative");
  if (vertices_.rows() < std::max(1, p_)) throw InputError("ambient dimension smaller than the current dimension");
  for (std::size_t k = 0; k < simplices_.size(); ++k) {
    const auto& s = simplices_[k];
    if (static_cast<int>(s.vertices.size()) != p_ + 1) {
      throw InputError("simplex " + std::to_string(k) + " has " + std::to_string(s.vertices.size()) +
                       " vertices, expected " + std::to_string(p_ + 1));
    }
    for (int v : s.vertices) {
      if (v < 0 || v >= vertices_.cols()) throw InputError("simplex " + std::to_string(k) + ": vertex index out of range");
    }
    if (p_ > 0 && volume(k) <= 1e-12) throw InputError("simplex " + std::to_string(k) + " is degenerate");
  }
}

Eigen::MatrixXd PolyhedralCurrent::edges(std::size_t k) const {
  const auto& s = simplices_.at(k);
  Eigen::MatrixXd e(vertices_.rows(), p_);
  for (int i = 0; i < p_; ++i) e.col(i) = vertices_.col(s.vertices[static_cast<std::size_t>(i) + 1]) - vertices_.col(s.vertices[0]);
  return e;
}

double PolyhedralCurrent::volume(std::size_t k) const {
  if (p_ == 0) return 1.0;
  const Eigen::MatrixXd e = edges(k);
  return std::sqrt(std::max(0.0, (e.transpose() * e).determinant())) / factorial(p_);
}

ExteriorElement PolyhedralCurrent::tangent(std::size_t k) const {
  if (p_ == 0) return ExteriorElement::scalar(dim(), 1.0);
  return simple_from_frame(edges(k)).pvector;
}

SimplePlane PolyhedralCurrent::tangent_plane(std::size_t k) const {
  if (p_ == 0) throw InputError("a 0-simplex has no tangent plane");
  return simple_from_frame(edges(k)).plane;
}

PolyhedralCurrent PolyhedralCurrent::scaled(double s) const {
  PolyhedralCurrent r = *this;
  for (auto& sx : r.simplices_) sx.multiplicity *= s;
  return r;
}

PolyhedralCurrent PolyhedralCurrent::reversed() const {
  PolyhedralCurrent r = *this;
  if (p_ == 0) return scaled(-1.0);
  for (auto& sx : r.simplices_) std::swap(sx.vertices[0], sx.vertices[1]);
  return r;
}

PolyhedralCurrent add(const PolyhedralCurrent& a, const PolyhedralCurrent& b, double merge_tol) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw DimensionError("currents differ in (n, p)");
  std::vector<Eigen::VectorXd> verts;
  for (Eigen::Index i = 0; i < a.vertices().cols(); ++i) verts.push_back(a.vertices().col(i));
  std::vector<int> remap(static_cast<std::size_t>(b.vertices().cols()));
  for (Eigen::Index i = 0; i < b.vertices().cols(); ++i) {
    const Eigen::VectorXd v = b.vertices().col(i);
    int found = -1;
    for (std::size_t j = 0; j < verts.size() && found < 0; ++j) {
      if ((verts[j] - v).lpNorm<Eigen::Infinity>() <= merge_tol) found = static_cast<int>(j);
    }
    if (found < 0) {
      found = static_cast<int>(verts.size());
      verts.push_back(v);
    }
    remap[static_cast<std::size_t>(i)] = found;
  }
  Eigen::MatrixXd v(a.dim(), static_cast<Eigen::Index>(verts.size()));
  for (std::size_t j = 0; j < verts.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = verts[j];
  std::vector<Simplex> s = a.simplices();
  for (auto sx : b.simplices()) {
    for (int& i : sx.vertices) i = remap[static_cast<std::size_t>(i)];
    s.push_back(std::move(sx));
  }
  return PolyhedralCurrent(a.degree(), std::move(v), std::move(s));
}

PolyhedralCurrent boundary(const PolyhedralCurrent& t, double cancel_tol) {
  if (t.degree() == 0) throw DimensionError("boundary of a 0-current");
  std::map<std::vector<int>, double> faces;
  for (const auto& s : t.simplices()) {
    for (std::size_t i = 0; i < s.vertices.size(); ++i) {
      std::vector<int> f;
      for (std::size_t j = 0; j < s.vertices.size(); ++j)
        if (j != i) f.push_back(s.vertices[j]);
      const int sign = canonicalize(f) * ((i % 2) ? -1 : 1);
      faces[f] += sign * s.multiplicity;
    }
  }
  std::vector<Simplex> out;
  for (auto& [f, m] : faces) {
    if (std::abs(m) > cancel_tol) out.push_back({f, m});
  }
  return PolyhedralCurrent(t.degree() - 1, t.vertices(), std::move(out));
}

double mass(const PolyhedralCurrent& t) {
  double m = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) m += std::abs(t.simplices()[k].multiplicity) * t.volume(k);
  return m;
}

double evaluate(const PolyhedralCurrent& t, const std::function<ExteriorElement(const Eigen::VectorXd&)>& alpha,
                int order, int threads) {
  const SimplexRule rule = simplex_rule(t.degree(), std::max(0, order));
  std::vector<double> parts(t.size(), 0.0);
  parallel_for(t.size(), threads, [&](std::size_t k) {
    const auto& s = t.simplices()[k];
    const ExteriorElement xi = t.tangent(k);
    const Eigen::VectorXd v0 = t.vertices().col(s.vertices[0]);
    const Eigen::MatrixXd e = t.degree() > 0 ? t.edges(k) : Eigen::MatrixXd(t.dim(), 0);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Eigen::VectorXd x = v0 + e * rule.points.col(static_cast<Eigen::Index>(q));
      const ExteriorElement a = alpha(x);
      if (a.dim() != t.dim() || a.degree() != t.degree()) throw DimensionError("evaluate: form has wrong (n, p)");
      acc += rule.weights[q] * pairing(a, xi);
    }
    parts[k] = s.multiplicity * t.volume(k) * acc;
  });
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

double evaluate(const PolyhedralCurrent& t, const PolyForm& alpha, int order, int threads) {
  if (alpha.dim() != t.dim() || alpha.degree() != t.degree()) throw DimensionError("evaluate: form has wrong (n, p)");
  const int q = order < 0 ? alpha.poly_degree() : order;
  return evaluate(t, [&](const Eigen::VectorXd& x) { return alpha(x); }, q, threads);
}

PositiveCheck phi_positive_check(const PolyhedralCurrent& t, const ExteriorElement& phi, double tol) {
  if (phi.dim() != t.dim() || phi.degree() != t.degree()) throw DimensionError("phi_positive_check: form has wrong (n, p)");
  PositiveCheck out;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double v = pairing(phi, t.tangent(k));
    const double m = t.simplices()[k].multiplicity;
    out.phi_values.push_back(v);
    if (m < 0.0 || v < 1.0 - tol) out.violations.push_back({k, v, m});
  }
  out.positive = out.violations.empty();
  return out;
}

CalibrationGap calibration_gap(const PolyhedralCurrent& t, const ExteriorElement& phi, double tol) {
  if (phi.dim() != t.dim() || phi.degree() != t.degree()) throw DimensionError("calibration_gap: form has wrong (n, p)");
  CalibrationGap g;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double vol = t.volume(k);
    const double m = t.simplices()[k].multiplicity;
    g.tphi += m * vol * pairing(phi, t.tangent(k));
    g.mass += std::abs(m) * vol;
  }
  g.gap = g.mass - g.tphi;
  g.positive = phi_positive_check(t, phi, tol).positive;
  return g;
}

MeshedSubmanifold MeshedSubmanifold::build(PolyhedralCurrent t, const ExteriorElement& phi, double flatness_tol) {
  if (t.degree() < 1) throw InputError("a meshed submanifold needs dimension >= 1");
  if (t.size() == 0) throw InputError("empty mesh");
  MeshedSubmanifold m;
  m.phi = phi;
  m.flatness_tol = flatness_tol;
  const auto pos = phi_positive_check(t, phi, flatness_tol);
  m.min_phi = *std::min_element(pos.phi_values.begin(), pos.phi_values.end());
  if (!pos.positive) {
    const auto& v = pos.violations.front();
    throw InputError("mesh simplex " + std::to_string(v.simplex) + " is not a phi-plane (phi = " +
                     std::to_string(v.phi_value) + ", multiplicity " + std::to_string(v.multiplicity) + ")");
  }
  // Orientation consistency: every face shared by two simplices must cancel.
  std::map<std::vector<int>, std::pair<int, double>> faces;
  for (const auto& s : t.simplices()) {
    for (std::size_t i = 0; i < s.vertices.size(); ++i) {
      std::vector<int> f;
      for (std::size_t j = 0; j < s.vertices.size(); ++j)
        if (j != i) f.push_back(s.vertices[j]);
      const int sign = canonicalize(f) * ((i % 2) ? -1 : 1);
      auto& e = faces[f];
      e.first += 1;
      e.second += sign;
    }
  }
  const auto nv = static_cast<std::size_t>(t.vertices().cols());
  m.on_boundary.assign(nv, false);
  m.neighbors.assign(nv, {});
  for (const auto& [f, e] : faces) {
    if (e.first > 2) throw InputError("mesh face shared by more than two simplices");
    if (e.first == 2 && e.second != 0) throw InputError("mesh orientations are inconsistent across a shared face");
    if (e.first == 1)
      for (int v : f) m.on_boundary[static_cast<std::size_t>(v)] = true;
  }
  for (const auto& s : t.simplices()) {
    for (int a : s.vertices)
      for (int b : s.vertices)
        if (a != b) m.neighbors[static_cast<std::size_t>(a)].push_back(b);
  }
  for (auto& nb : m.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  m.current = std::move(t);
  return m;
}

std::vector<int> MeshedSubmanifold::interior_vertices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < on_boundary.size(); ++i)
    if (!on_boundary[i] && !neighbors[i].empty()) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> MeshedSubmanifold::boundary_vertices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < on_boundary.size(); ++i)
    if (on_boundary[i]) out.push_back(static_cast<int>(i));
  return out;
}

PolyhedralCurrent embedded_disc_mesh(const Eigen::MatrixXd& frame, const Eigen::VectorXd& center, double radius,
                                     double h) {
  if (frame.cols() != 2 || frame.rows() != center.size()) throw InputError("disc frame must be n x 2");
  const DiscTopology d = ring_disc(h);
  return from_disc(d, [&](double x, double y) -> Eigen::VectorXd {
    return center + radius * (x * frame.col(0) + y * frame.col(1));
  });
}

PolyhedralCurrent disc_mesh(double h) { return tilted_disc_mesh(0.0, h); }

PolyhedralCurrent tilted_disc_mesh(double theta, double h) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, 2);
  f(0, 0) = 1.0;
  f(1, 1) = std::cos(theta);
  f(2, 1) = std::sin(theta);
  return embedded_disc_mesh(f, Eigen::VectorXd::Zero(4), 1.0, h);
}

PolyhedralCurrent graph_curve_mesh(double h) {
  return from_disc(ring_disc(h), [](double x, double y) -> Eigen::VectorXd {
    Eigen::VectorXd v(4);
    v << x, y, x * x - y * y, 2 * x * y;
    return v;
  });
}

PolyhedralCurrent cap_mesh(double height, double h) {
  if (!(height > 0.0)) throw InputError("cap height must be positive");
  const double r_sphere = (1.0 + height * height) / (2.0 * height);
  return from_disc(ring_disc(h), [=](double x, double y) -> Eigen::VectorXd {
    const double r2 = std::min(1.0, x * x + y * y);
    Eigen::VectorXd v(4);
    v << x, y, std::sqrt(r_sphere * r_sphere - r2) - (r_sphere - height), 0.0;
    if (r2 >= 1.0 - 1e-15) v[2] = 0.0;
    return v;
  });
}

PolyhedralCurrent read_mesh(std::istream& in) {
  std::string line;
  int lineno = 0;
  int n = -1, p = -1;
  std::vector<Eigen::VectorXd> verts;
  std::vector<Simplex> simplices;
  auto fail = [&](const std::string& msg) { throw InputError("mesh line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (n < 0) {
      std::istringstream hs(line);
      if (!(hs >> n >> p) || n < 1 || p < 0 || p > n) fail("expected header 'n p'");
      std::string extra;
      if (hs >> extra) fail("unexpected text after header");
      continue;
    }
    if (tag == "v") {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i)
        if (!(ls >> v[i])) fail("vertex needs " + std::to_string(n) + " coordinates");
      verts.push_back(v);
    } else if (tag == "s") {
      Simplex s;
      s.vertices.resize(static_cast<std::size_t>(p) + 1);
      for (auto& i : s.vertices)
        if (!(ls >> i)) fail("simplex needs " + std::to_string(p + 1) + " vertex indices");
      if (!(ls >> s.multiplicity)) fail("simplex needs a multiplicity");
      for (int i : s.vertices)
        if (i < 0 || i >= static_cast<int>(verts.size())) fail("vertex index " + std::to_string(i) + " not yet defined");
      simplices.push_back(std::move(s));
    } else {
      fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) fail("unexpected trailing text '" + extra + "'");
  }
  if (n < 0) throw InputError("mesh: missing header");
  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = verts[i];
  return PolyhedralCurrent(p, std::move(v), std::move(simplices));
}

PolyhedralCurrent read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const PolyhedralCurrent& t) {
  out.precision(17);
  out << t.dim() << ' ' << t.degree() << '\n';
  for (Eigen::Index i = 0; i < t.vertices().cols(); ++i) {
    out << 'v';
    for (Eigen::Index r = 0; r < t.vertices().rows(); ++r) out << ' ' << t.vertices()(r, i);
    out << '\n';
  }
  for (const auto& s : t.simplices()) {
    out << 's';
    for (int i : s.vertices) out << ' ' << i;
    out << ' ' << s.multiplicity << '\n';
  }
}

namespace {

void require_triangle_mesh(const MeshedSubmanifold& m) {
  if (m.current.degree() != 2) throw InputError("only 2-dimensional meshes are supported here");
}

void require_connected(const MeshedSubmanifold& m) {
  const auto& nb = m.neighbors;
  std::vector<bool> seen(nb.size(), false);
  int start = -1;
  for (std::size_t i = 0; i < nb.size() && start < 0; ++i)
    if (!nb[i].empty()) start = static_cast<int>(i);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : nb[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  for (std::size_t i = 0; i < nb.size(); ++i)
    if (!nb[i].empty() && !seen[i]) throw InputError("mesh is disconnected");
}

// Symmetric cotangent stiffness matrix.
Eigen::SparseMatrix<double> stiffness(const PolyhedralCurrent& t) {
  const auto nv = t.vertices().cols();
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& s : t.simplices()) {
    for (int c = 0; c < 3; ++c) {
      const int i = s.vertices[static_cast<std::size_t>((c + 1) % 3)];
      const int j = s.vertices[static_cast<std::size_t>((c + 2) % 3)];
      const int o = s.vertices[static_cast<std::size_t>(c)];
      const double w = 0.5 * cot_at(t.vertices().col(o), t.vertices().col(i), t.vertices().col(j));
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      trip.emplace_back(i, i, w);
      trip.emplace_back(j, j, w);
    }
  }
  Eigen::SparseMatrix<double> k(nv, nv);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

// Integral over the triangle (x, a, b) of -(1/2pi) log(|z - x| / radius) * g(z), singular at x.
double singular_log_integral(const Eigen::VectorXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                             double radius, const std::function<double(const Eigen::VectorXd&)>& g, int order) {
  const Rule1D rt = gauss_legendre(order / 2 + 4);
  const Rule1D ru = gauss_legendre(16);
  const double area2 = 2.0 * triangle_area(x, a, b);
  double acc = 0.0;
  for (std::size_t it = 0; it < rt.nodes.size(); ++it) {
    const double t = rt.nodes[it];
    const Eigen::VectorXd dir = (1 - t) * (a - x) + t * (b - x);
    const double len = dir.norm();
    for (std::size_t iu = 0; iu < ru.nodes.size(); ++iu) {
      // s = u^4 tames the s log s endpoint behaviour.
      const double u = ru.nodes[iu];
      const double s = u * u * u * u;
      const double ds = 4 * u * u * u;
      const double green = -(std::log(s) + std::log(len / radius)) / (2 * std::numbers::pi);
      acc += rt.weights[it] * ru.weights[iu] * ds * s * area2 * green * g(x + s * dir);
    }
  }
  return acc;
}

}  // namespace

GreenReport green_check(const MeshedSubmanifold& m, int x_index, const std::vector<ScalarField>& tests,
                        const GreenOptions& opts) {
  require_triangle_mesh(m);
  const PolyhedralCurrent& t = m.current;
  if (x_index < 0 || x_index >= t.vertices().cols()) throw InputError("green_check: vertex index out of range");
  if (m.on_boundary[static_cast<std::size_t>(x_index)] || m.neighbors[static_cast<std::size_t>(x_index)].empty()) {
    throw InputError("green_check: x must be an interior vertex");
  }
  require_connected(m);
  const ExteriorElement xi0 = t.tangent(0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (pairing(t.tangent(k), xi0) < 1.0 - opts.plane_tol) throw InputError("green_check: mesh is not contained in one plane");
  }
  for (const auto& f : tests)
    if (f.dim() != t.dim()) throw DimensionError("green_check: test function has wrong dimension");

  GreenReport rep;
  rep.x_index = x_index;
  const Eigen::VectorXd x = t.vertices().col(x_index);
  const auto rim = m.boundary_vertices();
  double rmin = kInf, rmax = 0.0;
  for (int b : rim) {
    const double r = (t.vertices().col(b) - x).norm();
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  rep.exact = opts.allow_exact && rmax - rmin <= 1e-9 * rmax;
  const double radius = rmax;
  const auto nv = t.vertices().cols();

  Eigen::VectorXd gval = Eigen::VectorXd::Zero(nv);
  std::vector<double> mu(static_cast<std::size_t>(nv), 0.0);
  if (rep.exact) {
    // Harmonic measure of a disc about x is uniform; lump it onto rim vertices by edge length.
    const PolyhedralCurrent rim_edges = boundary(t);
    double total = 0.0;
    for (std::size_t k = 0; k < rim_edges.size(); ++k) {
      const auto& s = rim_edges.simplices()[k];
      const double len = rim_edges.volume(k);
      mu[static_cast<std::size_t>(s.vertices[0])] += 0.5 * len;
      mu[static_cast<std::size_t>(s.vertices[1])] += 0.5 * len;
      total += len;
    }
    for (auto& w : mu) w /= total;
    for (Eigen::Index i = 0; i < nv; ++i) {
      const double r = (t.vertices().col(i) - x).norm();
      gval[i] = i == x_index ? kInf : -std::log(r / radius) / (2 * std::numbers::pi);
    }
  } else {
    const Eigen::SparseMatrix<double> k = stiffness(t);
    std::vector<int> interior = m.interior_vertices();
    std::vector<int> pos(static_cast<std::size_t>(nv), -1);
    for (std::size_t i = 0; i < interior.size(); ++i) pos[static_cast<std::size_t>(interior[i])] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < k.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
        const int r = pos[static_cast<std::size_t>(it.row())], c = pos[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
      }
    }
    const auto ni = static_cast<Eigen::Index>(interior.size());
    Eigen::SparseMatrix<double> kii(ni, ni);
    kii.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(kii);
    if (solver.info() != Eigen::Success) throw std::runtime_error("green_check: Laplace factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
    rhs[pos[static_cast<std::size_t>(x_index)]] = 1.0;
    const Eigen::VectorXd gi = solver.solve(rhs);
    for (std::size_t i = 0; i < interior.size(); ++i) gval[interior[i]] = gi[static_cast<Eigen::Index>(i)];
    const Eigen::VectorXd flux = k * gval;
    for (int b : rim) mu[static_cast<std::size_t>(b)] = -flux[b];
  }
  rep.g_min = kInf;
  for (Eigen::Index i = 0; i < nv; ++i)
    if (!m.neighbors[static_cast<std::size_t>(i)].empty()) rep.g_min = std::min(rep.g_min, gval[i]);
  rep.mu_min = kInf;
  for (int b : rim) {
    rep.mu_vertices.push_back(b);
    rep.mu_weights.push_back(mu[static_cast<std::size_t>(b)]);
    rep.mu_sum += mu[static_cast<std::size_t>(b)];
    rep.mu_min = std::min(rep.mu_min, mu[static_cast<std::size_t>(b)]);
  }

  const SimplexRule rule = simplex_rule(2, opts.order);
  for (const auto& f : tests) {
    GreenTerm term;
    term.name = f.name();
    std::vector<double> parts(t.size(), 0.0);
    parallel_for(t.size(), 0, [&](std::size_t k) {
      const auto& s = t.simplices()[k];
      const ExteriorElement xi = t.tangent(k);
      auto trace = [&](const Eigen::VectorXd& z) { return pairing(hessian_form(f, z, m.phi), xi); };
      const auto it = std::find(s.vertices.begin(), s.vertices.end(), x_index);
      double acc = 0.0;
      if (rep.exact && it != s.vertices.end()) {
        const auto at = static_cast<std::size_t>(it - s.vertices.begin());
        const Eigen::VectorXd a = t.vertices().col(s.vertices[(at + 1) % 3]);
        const Eigen::VectorXd b = t.vertices().col(s.vertices[(at + 2) % 3]);
        acc = singular_log_integral(x, a, b, radius, trace, opts.order);
      } else {
        const Eigen::VectorXd v0 = t.vertices().col(s.vertices[0]);
        const Eigen::MatrixXd e = t.edges(k);
        const double area = t.volume(k);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
          const Eigen::Vector2d l = rule.points.col(static_cast<Eigen::Index>(q));
          const Eigen::VectorXd z = v0 + e * l;
          double g = 0.0;
          if (rep.exact) {
            g = -std::log((z - x).norm() / radius) / (2 * std::numbers::pi);
          } else {
            g = (1 - l[0] - l[1]) * gval[s.vertices[0]] + l[0] * gval[s.vertices[1]] + l[1] * gval[s.vertices[2]];
          }
          acc += rule.weights[q] * area * g * trace(z);
        }
      }
      parts[k] = s.multiplicity * acc;
    });
    term.lhs = std::accumulate(parts.begin(), parts.end(), 0.0);
    double mu_f = 0.0;
    for (std::size_t i = 0; i < rep.mu_vertices.size(); ++i) mu_f += rep.mu_weights[i] * f(t.vertices().col(rep.mu_vertices[i]));
    term.rhs = mu_f - f(x);
    term.residual = std::abs(term.lhs - term.rhs);
    rep.max_residual = std::max(rep.max_residual, term.residual);
    rep.terms.push_back(term);
  }
  return rep;
}

MaxPrincipleReport max_principle_check(const MeshedSubmanifold& m, const ScalarField& f, MaxPrincipleMode mode,
                                       const LambdaSpan& span, const MaxPrincipleOptions& opts) {
  const PolyhedralCurrent& t = m.current;
  if (f.dim() != t.dim()) throw DimensionError("max_principle_check: field has wrong dimension");
  MaxPrincipleReport rep;
  rep.mode = mode;
  const auto rim = m.boundary_vertices();
  const auto interior = m.interior_vertices();
  if (rim.empty()) throw InputError("max_principle_check: mesh has no boundary");
  rep.boundary_min = kInf;
  rep.boundary_max = -kInf;
  for (int b : rim) {
    const double v = f(t.vertices().col(b));
    rep.boundary_min = std::min(rep.boundary_min, v);
    rep.boundary_max = std::max(rep.boundary_max, v);
  }
  if (mode == MaxPrincipleMode::Bounds) {
    double worst_res = 0.0;
    int worst_vertex = -1;
    for (Eigen::Index i = 0; i < t.vertices().cols(); ++i) {
      if (m.neighbors[static_cast<std::size_t>(i)].empty()) continue;
      const double r = pluriharmonic_mod_d_residual(f, t.vertices().col(i), span, m.phi).residual;
      if (r > worst_res) {
        worst_res = r;
        worst_vertex = static_cast<int>(i);
      }
    }
    rep.precondition_ok = worst_res <= opts.modd_tol;
    std::ostringstream msg;
    msg << "max mod-d residual " << worst_res;
    if (!rep.precondition_ok) msg << " at vertex " << worst_vertex;
    rep.precondition = msg.str();
    rep.worst = -kInf;
    for (int i : interior) {
      const double v = f(t.vertices().col(i));
      rep.worst = std::max({rep.worst, v - rep.boundary_max, rep.boundary_min - v});
    }
    if (interior.empty()) rep.worst = 0.0;
    rep.holds = rep.worst <= opts.tol;
  } else {
    double spread = 0.0;
    const double f0 = f(t.vertices().col(rim.front()));
    for (Eigen::Index i = 0; i < t.vertices().cols(); ++i) {
      if (!m.neighbors[static_cast<std::size_t>(i)].empty()) spread = std::max(spread, std::abs(f(t.vertices().col(i)) - f0));
    }
    rep.precondition_ok = spread <= opts.tol;
    rep.precondition = "max deviation from a constant " + std::to_string(spread);
    const PolyhedralCurrent gamma = boundary(t);
    rep.worst = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const auto& s = gamma.simplices()[k];
      Eigen::VectorXd mid = Eigen::VectorXd::Zero(t.dim());
      for (int v : s.vertices) mid += t.vertices().col(v);
      mid /= static_cast<double>(s.vertices.size());
      rep.worst = std::max(rep.worst, std::abs(pairing(d_phi(f, mid, m.phi), gamma.tangent(k))));
    }
    rep.holds = rep.worst <= opts.tol;
  }
  return rep;
}

std::vector<double> cotangent_laplacian(const MeshedSubmanifold& m, const Eigen::VectorXd& values,
                                        std::vector<int>* vertices) {
  require_triangle_mesh(m);
  const PolyhedralCurrent& t = m.current;
  const auto nv = t.vertices().cols();
  if (values.size() != nv) throw DimensionError("cotangent_laplacian: one value per vertex expected");
  Eigen::VectorXd area = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(nv);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& s = t.simplices()[k];
    const double a = t.volume(k);
    for (int c = 0; c < 3; ++c) {
      const int i = s.vertices[static_cast<std::size_t>((c + 1) % 3)];
      const int j = s.vertices[static_cast<std::size_t>((c + 2) % 3)];
      const int o = s.vertices[static_cast<std::size_t>(c)];
      const double w = 0.5 * cot_at(t.vertices().col(o), t.vertices().col(i), t.vertices().col(j));
      acc[i] += w * (values[j] - values[i]);
      acc[j] += w * (values[i] - values[j]);
    }
    // Mixed Voronoi areas: circumcentric cells, halved/quartered around obtuse corners.
    int obtuse = -1;
    for (int c = 0; c < 3; ++c) {
      const int o = s.vertices[static_cast<std::size_t>(c)];
      const int i = s.vertices[static_cast<std::size_t>((c + 1) % 3)];
      const int j = s.vertices[static_cast<std::size_t>((c + 2) % 3)];
      if ((t.vertices().col(i) - t.vertices().col(o)).dot(t.vertices().col(j) - t.vertices().col(o)) < 0.0) obtuse = c;
    }
    for (int c = 0; c < 3; ++c) {
      const int o = s.vertices[static_cast<std::size_t>(c)];
      const int i = s.vertices[static_cast<std::size_t>((c + 1) % 3)];
      const int j = s.vertices[static_cast<std::size_t>((c + 2) % 3)];
      if (obtuse >= 0) {
        area[o] += obtuse == c ? a / 2.0 : a / 4.0;
      } else {
        const Eigen::VectorXd& vo = t.vertices().col(o);
        area[o] += ((t.vertices().col(i) - vo).squaredNorm() * cot_at(t.vertices().col(j), vo, t.vertices().col(i)) +
                    (t.vertices().col(j) - vo).squaredNorm() * cot_at(t.vertices().col(i), vo, t.vertices().col(j))) /
                   8.0;
      }
    }
  }
  std::vector<double> out;
  const auto interior = m.interior_vertices();
  for (int i : interior) out.push_back(acc[i] / area[i]);
  if (vertices) *vertices = interior;
  return out;
}

SubharmonicReport restriction_subharmonicity(const MeshedSubmanifold& m, const ScalarField& f,
                                             const PlaneSampleSet& samples, const SubharmonicOptions& opts) {
  const PolyhedralCurrent& t = m.current;
  if (f.dim() != t.dim()) throw DimensionError("restriction_subharmonicity: field has wrong dimension");
  SubharmonicReport rep;
  std::vector<Eigen::VectorXd> probes;
  const auto nv = t.vertices().cols();
  const Eigen::Index stride = std::max<Eigen::Index>(1, nv / std::max(1, opts.probes));
  for (Eigen::Index i = 0; i < nv; i += stride) probes.push_back(t.vertices().col(i));
  const PshReport psh = psh_classify(f, probes, samples, opts.psh);
  rep.precondition_ok = psh.overall != PshStatus::NotPsh;
  rep.precondition = std::string("psh status ") + to_string(psh.overall) + " on " + std::to_string(probes.size()) +
                     " probes, min margin " + std::to_string(psh.min_margin);
  Eigen::VectorXd vals(nv);
  for (Eigen::Index i = 0; i < nv; ++i) vals[i] = f(t.vertices().col(i));
  rep.laplacian = cotangent_laplacian(m, vals, &rep.vertices);
  if (rep.laplacian.empty()) {
    rep.holds = true;
    return rep;
  }
  rep.min_laplacian = *std::min_element(rep.laplacian.begin(), rep.laplacian.end());
  rep.max_laplacian = *std::max_element(rep.laplacian.begin(), rep.laplacian.end());
  rep.holds = rep.min_laplacian >= -opts.mesh_tol;
  return rep;
}

}  // namespace calibr
