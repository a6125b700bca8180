#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "calibr/io.hpp"
#include "doctest.h"

using namespace calibr;
using io::Json;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::string temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / ("calibr_test_io_" + name);
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("form JSON round trip") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd v(20);
    for (auto& x : v) x = g(rng);
    const auto a = ExteriorElement::from_dense(6, 3, v);
    const auto back = io::form_from_json(io::parse_json(io::dump(io::form_to_json(a)), "mem"));
    CHECK(back.dim() == 6);
    CHECK(back.degree() == 3);
    // 17 significant digits round-trip every double exactly.
    CHECK((back - a).max_abs() == 0.0);
  }
  const auto w = io::form_from_json(Json::parse(R"({"n":4,"p":2,"terms":[{"indices":[1,2],"coeff":1},{"indices":[3,4],"coeff":1}]})"));
  CHECK((w - catalogue("omega4", false).form).norm() == 0.0);
}

TEST_CASE("form JSON diagnostics name the offending location") {
  auto err = [](const char* text) { return error_of([&] { io::form_from_json(Json::parse(text)); }); };
  CHECK(err(R"({"n":4,"p":2,"terms":[{"indices":[2,1],"coeff":1}]})") ==
        "form.terms[0].indices[1]: indices must be strictly increasing");
  CHECK(err(R"({"n":4,"p":2,"terms":[{"indices":[1,5],"coeff":1}]})") == "form.terms[0].indices[1]: index 5 outside 1..4");
  CHECK(err(R"({"n":4,"p":2,"terms":[{"indices":[0,1],"coeff":1}]})") == "form.terms[0].indices[0]: index 0 outside 1..4");
  CHECK(err(R"({"n":4,"p":2,"terms":[{"indices":[1],"coeff":1}]})") == "form.terms[0].indices: expected 2 indices");
  CHECK(err(R"({"n":4,"p":2,"terms":[{"indices":[1,2],"coeff":"a"}]})") == "form.terms[0].coeff: expected a number");
  CHECK(err(R"({"n":4,"p":2,"terms":[{"indices":[1,2],"coeff":1},{"indices":[1,2],"coeff":2}]})") ==
        "form.terms[1].indices: duplicate multi-index");
  CHECK(err(R"({"n":4,"p":2,"terms":[],"extra":0})") == "form: unknown key \"extra\"");
  CHECK(err(R"({"n":4,"terms":[]})") == "form: missing key \"p\"");
  CHECK(err(R"({"n":4,"p":5,"terms":[]})") == "form.p: must be in [0, n]");
  CHECK(err(R"({"n":4.5,"p":2,"terms":[]})") == "form.n: expected an integer");

  const std::string msg = error_of([] { io::parse_json("{\"n\": 4,\n  \"p\" 2}", "f.json"); });
  CHECK(msg.starts_with("f.json: line 2, column 7:"));
}

TEST_CASE("polynomial JSON and field specs") {
  const auto p = io::polynomial_from_json(
      Json::parse(R"({"n":2,"terms":[{"exponents":[2,0],"coeff":1},{"exponents":[0,1],"coeff":-3}]})"));
  Eigen::VectorXd x(2);
  x << 1.5, 2.0;
  CHECK(p(x) == doctest::Approx(2.25 - 6.0));
  const auto back = io::polynomial_from_json(io::polynomial_to_json(p));
  CHECK(back(x) == p(x));
  CHECK(error_of([] { io::polynomial_from_json(Json::parse(R"({"n":2,"terms":[{"exponents":[1],"coeff":1}]})")); }) ==
        "field.terms[0].exponents: expected 2 exponents");
  CHECK(error_of([] { io::polynomial_from_json(Json::parse(R"({"n":2,"terms":[{"exponents":[1,-1],"coeff":1}]})")); }) ==
        "field.terms[0].exponents[1]: must be non-negative");

  const auto path = temp_file("field.json", R"({"n":4,"terms":[{"exponents":[2,0,0,0],"coeff":1},{"exponents":[0,2,0,0],"coeff":1}]})");
  const auto f = io::field_from_spec(path, 4);
  const auto b = io::field_from_spec("builtin:abs_z1_sq", 4);
  Eigen::VectorXd y(4);
  y << 0.3, -1.2, 2.0, 0.5;
  CHECK(f(y) == doctest::Approx(b(y)));
  CHECK(f.polynomial().has_value());
  CHECK_THROWS_AS(io::field_from_spec(path, 6), InputError);
}

TEST_CASE("probe specs") {
  const auto g = io::probes_from_spec("grid:(-1..1)^3:3", 3);
  CHECK(g.size() == 27);
  CHECK(g.front() == Eigen::Vector3d(-1, -1, -1));
  CHECK(g[13] == Eigen::Vector3d(0, 0, 0));
  CHECK(g.back() == Eigen::Vector3d(1, 1, 1));
  const auto p = io::probes_from_spec("point:1,2.5,-3", 3);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == Eigen::Vector3d(1, 2.5, -3));
  CHECK_THROWS_AS(io::probes_from_spec("grid:(-1..1)^4:3", 3), InputError);
  CHECK_THROWS_AS(io::probes_from_spec("point:1,2", 3), InputError);
  CHECK_THROWS_AS(io::probes_from_spec("point:1,x,2", 3), InputError);
  CHECK_THROWS_AS(io::probes_from_spec("grid:-1..1:3", 3), InputError);
}

TEST_CASE("sites JSON") {
  const auto s = io::points_from_json(Json::parse(R"({"sites":[[0,0],[1,2]]})"), 2);
  CHECK(s.size() == 2);
  CHECK(s[1] == Eigen::Vector2d(1, 2));
  CHECK(error_of([] { io::points_from_json(Json::parse(R"([[0,0],[1,2,3]])"), 2); }) == "sites[1]: expected 2 coordinates");
  CHECK(error_of([] { io::points_from_json(Json::parse(R"([[0,0],[1,"a"]])"), 2); }) == "sites[1][1]: expected a number");
  CHECK(error_of([] { io::points_from_json(Json::parse(R"({"points":[]})"), 2); }) == "sites: unknown key \"points\"");
}

TEST_CASE("mesh specs") {
  CHECK(io::mesh_from_spec("disc:0.2").size() == disc_mesh(0.2).size());
  CHECK(io::mesh_from_spec("tilted:0.5:0.2").vertices() == tilted_disc_mesh(0.5, 0.2).vertices());
  CHECK(io::mesh_from_spec("cap:0.4:0.2").size() == cap_mesh(0.4, 0.2).size());
  CHECK_THROWS_AS(io::mesh_from_spec("disc:0"), InputError);
  CHECK_THROWS_AS(io::mesh_from_spec("tilted:0.5"), InputError);
  const auto path = temp_file("tri.mesh", "2 2\nv 0 0\nv 1 0\nv 0 1\ns 0 1 2 1\n");
  CHECK(io::mesh_from_spec(path).size() == 1);
}

TEST_CASE("boundary JSON forms agree") {
  Eigen::VectorXd o = Eigen::VectorXd::Zero(4), a = Eigen::VectorXd::Zero(4);
  a[0] = 1.0;
  const auto model = FiniteDualityModel::build(catalogue("omega4"), {o, a});
  const auto bm = assemble_boundary_model(model, 1);
  const auto by_site = io::boundary_from_json(Json::parse(R"({"atoms":[{"site":1,"plane":0,"weight":2}]})"), model, bm);
  Json explicit_atom = Json::parse(R"({"atoms":[{"point":[1,0,0,0],"weight":2}]})");
  Json frame = Json::array();
  for (int c = 0; c < 2; ++c) frame.push_back(io::to_json(Eigen::VectorXd(model.dictionary[1][0].frame().col(c))));
  explicit_atom["atoms"][0]["frame"] = frame;
  const auto by_point = io::boundary_from_json(explicit_atom, model, bm);
  CHECK((by_site - by_point).lpNorm<Eigen::Infinity>() < 1e-14);

  Json values = Json::object();
  values["values"] = io::to_json(by_site);
  CHECK(io::boundary_from_json(values, model, bm) == by_site);
  CHECK(error_of([&] { io::boundary_from_json(Json::parse(R"({"values":[1,2]})"), model, bm); })
            .starts_with("boundary.values: expected"));
  CHECK(error_of([&] { io::boundary_from_json(Json::parse(R"({"atoms":[{"site":9,"plane":0}]})"), model, bm); }) ==
        "boundary.atoms[0].site: out of range");
  CHECK(error_of([&] { io::boundary_from_json(Json::parse(R"({"values":[],"atoms":[]})"), model, bm); }) ==
        "boundary: expected exactly one of \"values\", \"atoms\", \"mesh\"");
}

TEST_CASE("report emission is deterministic with 17 significant digits") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(2.0) == "2.0");
  CHECK(io::format_double(-1e-300) == "-1e-300");
  CHECK(io::format_double(1e22) == "1e+22");
  Json j = Json::object();
  j["b"] = 1.0 / 3.0;
  j["a"] = Json::array({1, 2.5, "x", true, nullptr});
  j["nested"] = Json{{"z", std::nan("")}};
  const std::string text = io::dump(j);
  CHECK(text == "{\n  \"b\": 0.33333333333333331,\n  \"a\": [1, 2.5, \"x\", true, null],\n  \"nested\": {\n    \"z\": null\n  }\n}\n");
  CHECK(Json::parse(text)["b"].get<double>() == 1.0 / 3.0);
}

TEST_CASE("CSV tables") {
  io::Table t{{"a", "b"}, {{"1", "x"}, {"2", "y"}}};
  CHECK(t.str() == "a,b\n1,x\n2,y\n");
  const auto s = sample_grassmannian(catalogue("lambda:0.5"), SampleOptions{.count = 5});
  const auto pt = io::planes_table(s);
  CHECK(pt.header.size() == 1 + 4 * 2 + 1);
  CHECK(pt.rows.size() == s.size());
}
