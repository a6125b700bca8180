#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calibr/exterior.hpp"

namespace calibr {

/// A constant calibration form together with what is known about it.
struct Calibration {
  std::string name;
  ExteriorElement form;
  double claimed_comass = 1.0;
  /// Comass measured by the optimizer when the entry was built.
  std::optional<double> certified_comass;
  /// Exact description of G(phi) when one is known.
  std::optional<std::string> grassmannian_hint;
  /// Normality as asserted in the literature (not computed).
  std::optional<bool> normal_flag;

  int dim() const { return form.dim(); }
  int degree() const { return form.degree(); }
};

struct CatalogueEntry {
  std::string name;
  int n = 0;
  int p = 0;
  std::size_t terms = 0;
};

/// Builds a catalogue calibration from a selector such as "kaehler:2:1",
/// "special_lagrangian:3", "associative", "lambda:0.5", "volume:3" or the
/// aliases "omega4" / "omega6". When `certify` is set the comass is measured
/// and must be within 1e-4 of 1.
Calibration catalogue(const std::string& selector, bool certify = true);

/// Typed constructors used by the selector parser.
ExteriorElement kaehler_form(int complex_dim, int power);
ExteriorElement special_lagrangian_form(int complex_dim);
ExteriorElement associative_form();
ExteriorElement coassociative_form();
ExteriorElement cayley_form();
ExteriorElement quaternionic_form(int quaternionic_dim);
ExteriorElement lambda_example_form(double lambda);

/// The complex structure J on C^m = R^{2m} with coordinates (x1, y1, x2, y2, ...).
Eigen::MatrixXd complex_structure(int complex_dim);
/// Left multiplication by i, j, k on H^m = R^{4m}, coordinates (x0, x1, x2, x3) per factor.
std::vector<Eigen::MatrixXd> quaternionic_structures(int quaternionic_dim);

std::vector<CatalogueEntry> catalogue_list();
/// Selectors for the entries that are asserted normal in the literature.
std::vector<std::string> normal_catalogue_selectors();

/// Wraps a user form; optionally rescales it by 1 / comass.
Calibration user_calibration(const std::string& name, ExteriorElement form, bool rescale_to_unit_comass);

}  // namespace calibr
