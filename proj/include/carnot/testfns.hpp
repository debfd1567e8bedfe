#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "carnot/group.hpp"
#include "carnot/scalar_field.hpp"

namespace carnot {

/// Product bump prod_k max(0, 1 - (x_k - c_k)^2 / r_k^2)^power with analytic partials.
///
/// power >= 2 makes it C^1 with vanishing gradient on the support boundary.
ScalarField make_bump(const CarnotGroup& group, const GroupPoint& center, const std::vector<double>& radii, int power);

/// base * prod_k x_k^{exponents[k]} with product-rule partials; same support as base.
ScalarField make_coordinate_modulated(const ScalarField& base, const std::vector<int>& exponents);

/// A named test function with closed-form reference values where available.
struct CatalogEntry {
  std::string name;
  std::string group;  // catalog group name
  ScalarField field;
  std::function<std::optional<double>(double p)> lp_norm_power;        // ||f||_p^p
  std::function<std::optional<double>(double p)> gradient_norm_power;  // ||grad_H f||_p^p
  std::string description;
};

/// All catalog entries: bumps on R^1, R^2, H^1, free step-2 on 3 generators and
/// Engel, plus a sigma-modulated entry for every non-abelian group.
const std::vector<CatalogEntry>& function_catalog();
const CatalogEntry& catalog_function(const std::string& name);
std::vector<std::string> catalog_function_names();

/// int_{-r}^{r} |x|^a (1 - x^2/r^2)^b dx = r^{a+1} B((a+1)/2, b+1).
double bump_moment(double radius, double a, double b);

}  // namespace carnot
