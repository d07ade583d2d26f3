#pragma once

#include <string>

#include <json.hpp>

#include "phiclosure/closure.hpp"
#include "phiclosure/renorm.hpp"
#include "phiclosure/sos_fit.hpp"

namespace phiclosure {

std::string family_name(MapFamily family);
std::string target_name(Target target);
MapFamily family_from_name(const std::string& name);
Target target_from_name(const std::string& name);

/// Map record {family, target, params, coeffs, domain}; params carries only
/// the fields meaningful for the family (x0 for taylor, interval and
/// objective for optimized).
nlohmann::json to_json(const RenormalizationMap& map);

/// Rebuilds the map from its record, recomputing the derivative polynomial
/// and re-running monotonicity certification.
RenormalizationMap map_from_json(const nlohmann::json& j);

/// Map record plus {objective, starts_tried, converged_starts, seed}.
nlohmann::json to_json(const FitResult& result);

nlohmann::json to_json(const InversionReport& report);

/// Benchmark label in the family_N_degree convention: "beta_3_5",
/// "T_3_5(x0=-2.6)", "O_3_5[-5,5]". N is the harmonic degree of the moment
/// system the map is used in; the second index is the polynomial degree.
std::string model_label(const RenormalizationMap& map, int N);

/// Shortest round-trip decimal representation (%.17g); used for CSV cells so
/// outputs are byte-stable across runs.
std::string format_double(double value);

}  // namespace phiclosure
