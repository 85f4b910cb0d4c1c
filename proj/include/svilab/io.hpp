#ifndef SVILAB_IO_HPP
#define SVILAB_IO_HPP

// JSON forms of operators, coefficients, problems and study configs.
// Readers throw InputError naming the offending field, e.g. "problem.x".

#include "svilab/experiments.hpp"

#include <json.hpp>

#include <string>

namespace svilab {

inline constexpr int kSchemaVersion = 1;

using nlohmann::json;

json to_json(const OperatorSpec& spec);
OperatorSpec operator_from_json(const json& j, const std::string& where = "operator");

json to_json(const Drift& drift);
Drift drift_from_json(const json& j, int dim, const std::string& where = "drift");

json to_json(const Dispersion& dispersion);
Dispersion dispersion_from_json(const json& j, int dim, const std::string& where = "dispersion");

/// {"dt": h, "values": [[node 0], [node 1], ...]}, or a generated path
/// {"kind": "linear" | "constant" | "zero", "dt", "horizon", "slope" | "value" | "dim"}.
json to_json(const GridPath& path);
GridPath path_from_json(const json& j, const std::string& where = "path");

json to_json(const SviProblem& problem);
SviProblem svi_problem_from_json(const json& j, const std::string& where = "problem");

struct DviConfig {
  DviProblem problem;
  double step = 1e-3;
};
DviConfig dvi_config_from_json(const json& j);

struct SkeletonConfig {
  SkeletonInput input;
  double step = 1e-3;
};
SkeletonConfig skeleton_config_from_json(const json& j);

struct SviRunConfig {
  SviProblem problem;
  int fine_level = 12;
};
SviRunConfig svi_run_config_from_json(const json& j);

struct ProxCheckConfig {
  OperatorSpec spec = OperatorSpec::zero(1);
  std::vector<double> lambdas;
  std::vector<Vector> points;
  int random_cases = 1000;
};
ProxCheckConfig prox_check_config_from_json(const json& j);

struct OracleCompareConfig {
  double x = 0.5;
  double horizon = 1.0;
  int fine_level = 12;
  long trials = 1000;
};
OracleCompareConfig oracle_compare_config_from_json(const json& j);

json to_json(const LimitTheoremConfig& c);
LimitTheoremConfig limit_config_from_json(const json& j);
json to_json(const ContinuityConfig& c);
ContinuityConfig continuity_config_from_json(const json& j);
json to_json(const SmallBallConfig& c);
SmallBallConfig small_ball_config_from_json(const json& j);
json to_json(const LevyAreaConfig& c);
LevyAreaConfig levy_config_from_json(const json& j);
json to_json(const KTailConfig& c);
KTailConfig k_tail_config_from_json(const json& j);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const json& j);

}  // namespace svilab

#endif  // SVILAB_IO_HPP
