#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibr/calibration.hpp"
#include "calibr/cones.hpp"
#include "calibr/currents.hpp"
#include "calibr/duality.hpp"
#include "calibr/grassmann.hpp"
#include "calibr/hessian.hpp"

namespace calibr::io {

/// Insertion-ordered so reports keep a fixed field order.
using Json = nlohmann::ordered_json;

/// Parses a JSON file; syntax errors are reported as InputError with line and column.
Json load_json(const std::string& path);
Json parse_json(const std::string& text, const std::string& origin);

/// Two-space indented JSON with every float printed to 17 significant digits.
std::string dump(const Json& j);
std::string format_double(double v);

/// {"n": int, "p": int, "terms": [{"indices": [i1, ..., ip], "coeff": real}]}, indices
/// 1-based and strictly increasing. `where` prefixes error messages.
ExteriorElement form_from_json(const Json& j, const std::string& where = "form");
Json form_to_json(const ExteriorElement& a);

/// {"n": int, "terms": [{"exponents": [e1, ..., en], "coeff": real}]}.
Polynomial polynomial_from_json(const Json& j, const std::string& where = "field");
Json polynomial_to_json(const Polynomial& p);

/// Catalogue selector, or a path to a form JSON file taken as a calibration.
Calibration calibration_from_spec(const std::string& spec);
/// "builtin:<name>" or a path to a polynomial JSON file.
ScalarField field_from_spec(const std::string& spec, int n);
/// "grid:(a..b)^n:k" (k points per axis), "point:x1,...,xn", or a JSON file of points.
std::vector<Eigen::VectorXd> probes_from_spec(const std::string& spec, int n);
/// A list of points, or {"sites": [...]}. Every point must have length n when n > 0.
std::vector<Eigen::VectorXd> points_from_json(const Json& j, int n, const std::string& where = "sites");
/// Generator spec ("disc:h", "tilted:theta:h", "graph:h", "cap:height:h") or a mesh file path.
PolyhedralCurrent mesh_from_spec(const std::string& spec);

/// Boundary functional values on the model's test forms, from one of
/// {"values": [...]}, {"atoms": [{"site", "plane", "weight"} | {"point", "frame", "weight"}]}
/// or {"mesh": "<path>"} (a polyhedral (p-1)-current, relative to `base_dir`).
Eigen::VectorXd boundary_from_json(const Json& j, const FiniteDualityModel& model, const BoundaryModel& bm,
                                   const std::string& base_dir = ".", const std::string& where = "boundary");

Json to_json(const Eigen::VectorXd& v);
/// Row-major list of rows.
Json to_json(const Eigen::MatrixXd& m);
/// {"frame": [columns], "pvector": form}.
Json to_json(const SimplePlane& plane);
/// Lists the ten best distinct local maxima.
Json to_json(const ComassResult& r);
Json to_json(const PlaneSampleSet& s);
Json to_json(const Reduction& r);
Json to_json(const ConeReport& r);
Json to_json(const Lemma25Report& r);
Json to_json(const MassBracket& r);
Json to_json(const PshReport& r);
Json to_json(const ModDResult& r);
Json to_json(const FlatResult& r);
Json to_json(const NormalityReport& r);
Json to_json(const PositiveCheck& r);
Json to_json(const CalibrationGap& r);
Json to_json(const GreenReport& r);
Json to_json(const MaxPrincipleReport& r);
Json to_json(const SubharmonicReport& r);
Json to_json(const AlternativeResult& r);
Json to_json(const SupportDiagnostic& r);
Json to_json(const BatchSummary& s);

/// A CSV table; cells are written verbatim, so numbers should come from format_double.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const;
  std::string str() const;
};

Table planes_table(const PlaneSampleSet& s);
Table batch_table(const std::vector<BatchInstance>& batch);

}  // namespace calibr::io
