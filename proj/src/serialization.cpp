#include "phiclosure/serialization.hpp"

#include <cstdio>
#include <stdexcept>

namespace phiclosure {
namespace {

std::string status_name(InversionStatus status) {
  switch (status) {
    case InversionStatus::Converged:
      return "converged";
    case InversionStatus::MaxIterationsReached:
      return "max_iterations";
    case InversionStatus::SingularJacobian:
      return "singular_jacobian";
    case InversionStatus::TargetOutOfRange:
      return "target_out_of_range";
  }
  return "unknown";
}

std::string compact_double(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

}  // namespace

std::string family_name(MapFamily family) {
  switch (family) {
    case MapFamily::PhiDivergence:
      return "phi_divergence";
    case MapFamily::Taylor:
      return "taylor";
    case MapFamily::Optimized:
      return "optimized";
  }
  return "unknown";
}

std::string target_name(Target target) {
  return target == Target::BoltzmannShannon ? "boltzmann_shannon"
                                            : "bose_einstein";
}

MapFamily family_from_name(const std::string& name) {
  if (name == "phi_divergence" || name == "beta") return MapFamily::PhiDivergence;
  if (name == "taylor") return MapFamily::Taylor;
  if (name == "optimized") return MapFamily::Optimized;
  throw std::invalid_argument("unknown map family: " + name);
}

Target target_from_name(const std::string& name) {
  if (name == "boltzmann_shannon" || name == "BS" || name == "bs")
    return Target::BoltzmannShannon;
  if (name == "bose_einstein" || name == "BE" || name == "be")
    return Target::BoseEinstein;
  throw std::invalid_argument("unknown target: " + name);
}

nlohmann::json to_json(const RenormalizationMap& map) {
  nlohmann::json params;
  params["order"] = map.params.order;
  switch (map.family) {
    case MapFamily::PhiDivergence:
      break;
    case MapFamily::Taylor:
      params["x0"] = map.params.x0;
      break;
    case MapFamily::Optimized:
      params["interval"] = {map.params.interval_lo, map.params.interval_hi};
      params["objective"] = map.params.objective;
      break;
  }
  nlohmann::json j;
  j["family"] = family_name(map.family);
  j["target"] = target_name(map.target);
  j["params"] = params;
  j["coeffs"] = std::vector<double>(
      map.p.coeffs.data(), map.p.coeffs.data() + map.p.coeffs.size());
  j["domain"] = {map.domain_lo, map.domain_hi};
  return j;
}

RenormalizationMap map_from_json(const nlohmann::json& j) {
  RenormalizationMap map;
  map.family = family_from_name(j.at("family").get<std::string>());
  map.target = target_from_name(j.at("target").get<std::string>());
  const auto coeffs = j.at("coeffs").get<std::vector<double>>();
  if (coeffs.empty())
    throw std::invalid_argument("map_from_json: empty coefficient list");
  Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
  for (Eigen::Index k = 0; k < c.size(); ++k)
    c[k] = coeffs[static_cast<std::size_t>(k)];
  map.p = Polynomial(std::move(c));
  map.dp = derivative(map.p);
  map.domain_lo = j.at("domain").at(0).get<double>();
  map.domain_hi = j.at("domain").at(1).get<double>();
  const auto& params = j.at("params");
  map.params.order = params.at("order").get<int>();
  if (map.family == MapFamily::Taylor)
    map.params.x0 = params.at("x0").get<double>();
  if (map.family == MapFamily::Optimized) {
    map.params.interval_lo = params.at("interval").at(0).get<double>();
    map.params.interval_hi = params.at("interval").at(1).get<double>();
    map.params.objective = params.at("objective").get<double>();
  }
  certify_monotone(map);
  return map;
}

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json j = to_json(result.map);
  j["objective"] = result.objective;
  j["starts_tried"] = result.starts_tried;
  j["converged_starts"] = result.converged_starts;
  j["seed"] = result.seed;
  return j;
}

nlohmann::json to_json(const InversionReport& report) {
  nlohmann::json j;
  j["converged"] = report.converged;
  j["status"] = status_name(report.status);
  j["iterations"] = report.iterations;
  j["residual_norm"] = report.residual_norm;
  j["jacobian_min_eigenvalue_estimate"] =
      report.jacobian_min_eigenvalue_estimate;
  j["lambda"] = std::vector<double>(
      report.lambda.data(), report.lambda.data() + report.lambda.size());
  return j;
}

std::string model_label(const RenormalizationMap& map, int N) {
  const int degree = static_cast<int>(trim_exact_zeros(map.p).degree());
  const std::string stem = std::to_string(N) + "_" + std::to_string(degree);
  switch (map.family) {
    case MapFamily::PhiDivergence:
      return "beta_" + stem;
    case MapFamily::Taylor:
      return "T_" + stem + "(x0=" + compact_double(map.params.x0) + ")";
    case MapFamily::Optimized:
      return "O_" + stem + "[" + compact_double(map.params.interval_lo) + "," +
             compact_double(map.params.interval_hi) + "]";
  }
  return stem;
}

std::string format_double(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace phiclosure
