#include "svilab/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace svilab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw InputError(where + ": " + why);
}

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing field");
  return *it;
}

double as_double(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
  }
  fail(where, "expected a number");
}

double finite_double(const json& j, const std::string& where) {
  const double x = as_double(j, where);
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

long as_long(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long>();
}

int as_int(const json& j, const std::string& where) {
  const long v = as_long(j, where);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(where, "integer out of range");
  }
  return static_cast<int>(v);
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& where, bool allow_infinite = false) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    v[static_cast<Eigen::Index>(i)] = allow_infinite ? as_double(j[i], at) : finite_double(j[i], at);
  }
  return v;
}

std::vector<double> as_list(const json& j, const std::string& where) {
  const Vector v = as_vector(j, where);
  return {v.begin(), v.end()};
}

/// Array of rows; a bare number is accepted as a 1 x 1 matrix.
Matrix as_matrix(const json& j, const std::string& where) {
  if (j.is_number()) return Matrix::Constant(1, 1, finite_double(j, where));
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) fail(where + "[" + std::to_string(r) + "]", "expected a row array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) fail(where + "[" + std::to_string(r) + "]", "ragged matrix");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = as_vector(j[r], where + "[" + std::to_string(r) + "]");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (double x : v) {
    if (std::isinf(x)) {
      out.push_back(x > 0 ? "inf" : "-inf");
    } else {
      out.push_back(x);
    }
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

/// Wraps a reader so library-level InputErrors carry the field path.
template <class F>
auto located(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind(where, 0) == 0) throw;
    throw InputError(where + ": " + what);
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
}

void check_schema(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a JSON object");
  const auto it = j.find("schema_version");
  if (it == j.end()) return;
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
    fail(where + ".schema_version", "unsupported schema version");
  }
}

json quadratic_json(const Quadratic& q) {
  return {{"q", matrix_json(q.q)}, {"c", vector_json(q.c)}};
}

Quadratic quadratic_from(const json& j, const std::string& where) {
  return {as_matrix(field(j, "q", where), where + ".q"), as_vector(field(j, "c", where), where + ".c")};
}

json constraint_json(const Constraint& c) {
  return std::visit(
      Overloaded{
          [](const IndicatorBox& b) {
            return json{{"kind", "indicator_box"},
                        {"params", {{"lower", vector_json(b.lower)}, {"upper", vector_json(b.upper)}}}};
          },
          [](const IndicatorBall& b) {
            return json{{"kind", "indicator_ball"},
                        {"params", {{"center", vector_json(b.center)}, {"radius", b.radius}}}};
          },
          [](const IndicatorHalfspaces& h) {
            return json{{"kind", "indicator_halfspaces"},
                        {"params",
                         {{"normals", matrix_json(h.normals)}, {"offsets", vector_json(h.offsets)}}}};
          }},
      c);
}

}  // namespace

// ---- operators --------------------------------------------------------------------

json to_json(const OperatorSpec& spec) {
  json params = std::visit(
      Overloaded{[](const ZeroFunction&) { return json::object(); },
                 [](const Quadratic& q) { return quadratic_json(q); },
                 [](const IndicatorBox& b) { return constraint_json(b)["params"]; },
                 [](const IndicatorBall& b) { return constraint_json(b)["params"]; },
                 [](const IndicatorHalfspaces& h) { return constraint_json(h)["params"]; },
                 [](const ScaledL1& l) { return json{{"weight", l.weight}}; },
                 [](const SumFunction& s) {
                   return json{{"smooth", quadratic_json(s.smooth)},
                               {"constraint", constraint_json(s.constraint)}};
                 }},
      spec.kind());
  return {{"kind", spec.kind_name()}, {"dim", spec.dim()}, {"params", std::move(params)}};
}

OperatorSpec operator_from_json(const json& j, const std::string& where) {
  return located(where, [&]() -> OperatorSpec {
    const std::string kind = as_string(field(j, "kind", where), where + ".kind");
    const std::string pw = where + ".params";
    const json empty = json::object();
    const json& params = j.contains("params") ? j.at("params") : empty;
    std::optional<int> dim;
    if (j.contains("dim")) {
      dim = as_int(j.at("dim"), where + ".dim");
      if (*dim < 1) fail(where + ".dim", "must be positive");
    }
    auto need_dim = [&]() {
      if (!dim) fail(where + ".dim", "missing field");
      return *dim;
    };
    OperatorSpec spec = OperatorSpec::zero(1);
    if (kind == "zero") {
      spec = OperatorSpec::zero(need_dim());
    } else if (kind == "quadratic") {
      const Quadratic q = quadratic_from(params, pw);
      spec = OperatorSpec::quadratic(q.q, q.c);
    } else if (kind == "indicator_box") {
      spec = OperatorSpec::box(as_vector(field(params, "lower", pw), pw + ".lower", true),
                               as_vector(field(params, "upper", pw), pw + ".upper", true));
    } else if (kind == "indicator_ball") {
      spec = OperatorSpec::ball(as_vector(field(params, "center", pw), pw + ".center"),
                                finite_double(field(params, "radius", pw), pw + ".radius"));
    } else if (kind == "indicator_halfspaces") {
      spec = OperatorSpec::halfspaces(as_matrix(field(params, "normals", pw), pw + ".normals"),
                                      as_vector(field(params, "offsets", pw), pw + ".offsets"));
    } else if (kind == "scaled_l1") {
      spec = OperatorSpec::scaled_l1(need_dim(),
                                     finite_double(field(params, "weight", pw), pw + ".weight"));
    } else if (kind == "sum") {
      const Quadratic q = quadratic_from(field(params, "smooth", pw), pw + ".smooth");
      const OperatorSpec c = operator_from_json(field(params, "constraint", pw), pw + ".constraint");
      const Constraint constraint = std::visit(
          Overloaded{[](const IndicatorBox& b) -> Constraint { return b; },
                     [](const IndicatorBall& b) -> Constraint { return b; },
                     [](const IndicatorHalfspaces& h) -> Constraint { return h; },
                     [&](const auto&) -> Constraint {
                       fail(pw + ".constraint.kind", "must be an indicator kind");
                     }},
          c.kind());
      spec = OperatorSpec::sum(q, constraint);
    } else {
      fail(where + ".kind", "unknown operator kind '" + kind + "'");
    }
    if (dim && *dim != spec.dim()) fail(where + ".dim", "does not match the parameters");
    return spec;
  });
}

// ---- coefficients -----------------------------------------------------------------

json to_json(const Drift& drift) {
  return std::visit(Overloaded{[](const ConstantDrift& k) {
                                 return json{{"kind", "constant"}, {"value", vector_json(k.value)}};
                               },
                               [](const LinearDrift& k) {
                                 return json{{"kind", "linear"},
                                             {"a", matrix_json(k.a)},
                                             {"c", vector_json(k.c)}};
                               },
                               [](const TanhDrift& k) {
                                 return json{{"kind", "tanh"},
                                             {"a", matrix_json(k.a)},
                                             {"b", matrix_json(k.b)},
                                             {"c", vector_json(k.c)}};
                               }},
                    drift.kind());
}

Drift drift_from_json(const json& j, int dim, const std::string& where) {
  return located(where, [&]() -> Drift {
    const std::string kind = as_string(field(j, "kind", where), where + ".kind");
    Drift drift = Drift::zero(dim);
    if (kind == "zero") {
      return drift;
    } else if (kind == "constant") {
      drift = Drift::constant(as_vector(field(j, "value", where), where + ".value"));
    } else if (kind == "linear") {
      drift = Drift::linear(as_matrix(field(j, "a", where), where + ".a"),
                            as_vector(field(j, "c", where), where + ".c"));
    } else if (kind == "tanh") {
      drift = Drift::tanh(as_matrix(field(j, "a", where), where + ".a"),
                          as_matrix(field(j, "b", where), where + ".b"),
                          as_vector(field(j, "c", where), where + ".c"));
    } else {
      fail(where + ".kind", "unknown drift kind '" + kind + "'");
    }
    if (drift.dim() != dim) fail(where, "dimension differs from the operator");
    return drift;
  });
}

json to_json(const Dispersion& dispersion) {
  return std::visit(
      Overloaded{[](const ConstantDispersion& k) {
                   return json{{"kind", "constant"}, {"value", matrix_json(k.value)}};
                 },
                 [](const LinearDispersion& k) {
                   json slopes = json::array();
                   for (const Matrix& s : k.slopes) slopes.push_back(matrix_json(s));
                   return json{{"kind", "linear"},
                               {"offset", matrix_json(k.offset)},
                               {"slopes", std::move(slopes)}};
                 },
                 [](const SineDispersion& k) {
                   return json{{"kind", "sine"},
                               {"c", matrix_json(k.c)},
                               {"a", matrix_json(k.a)},
                               {"w", matrix_json(k.w)}};
                 }},
      dispersion.kind());
}

Dispersion dispersion_from_json(const json& j, int dim, const std::string& where) {
  return located(where, [&]() -> Dispersion {
    const std::string kind = as_string(field(j, "kind", where), where + ".kind");
    Dispersion sigma = Dispersion::zero(dim, 1);
    if (kind == "zero") {
      const int d = j.contains("noise_dim") ? as_int(j.at("noise_dim"), where + ".noise_dim") : 1;
      if (d < 1) fail(where + ".noise_dim", "must be positive");
      return Dispersion::zero(dim, d);
    } else if (kind == "constant") {
      sigma = Dispersion::constant(as_matrix(field(j, "value", where), where + ".value"));
    } else if (kind == "linear") {
      const json& s = field(j, "slopes", where);
      if (!s.is_array()) fail(where + ".slopes", "expected an array of matrices");
      std::vector<Matrix> slopes;
      for (std::size_t i = 0; i < s.size(); ++i) {
        slopes.push_back(as_matrix(s[i], where + ".slopes[" + std::to_string(i) + "]"));
      }
      sigma = Dispersion::linear(as_matrix(field(j, "offset", where), where + ".offset"),
                                 std::move(slopes));
    } else if (kind == "sine") {
      sigma = Dispersion::sine(as_matrix(field(j, "c", where), where + ".c"),
                               as_matrix(field(j, "a", where), where + ".a"),
                               as_matrix(field(j, "w", where), where + ".w"));
    } else {
      fail(where + ".kind", "unknown dispersion kind '" + kind + "'");
    }
    if (sigma.dim() != dim) fail(where, "dimension differs from the operator");
    return sigma;
  });
}

// ---- paths ------------------------------------------------------------------------

json to_json(const GridPath& path) {
  json values = json::array();
  for (int k = 0; k <= path.steps(); ++k) values.push_back(vector_json(path.node(k)));
  return {{"dt", path.dt()}, {"values", std::move(values)}};
}

GridPath path_from_json(const json& j, const std::string& where) {
  return located(where, [&]() -> GridPath {
    const double dt = finite_double(field(j, "dt", where), where + ".dt");
    if (dt <= 0.0) fail(where + ".dt", "must be positive");
    if (j.contains("values")) {
      const Matrix rows = as_matrix(field(j, "values", where), where + ".values");
      if (rows.rows() < 2) fail(where + ".values", "need at least two nodes");
      return GridPath(dt, rows.transpose());
    }
    const std::string kind = as_string(field(j, "kind", where), where + ".kind");
    const double horizon = finite_double(field(j, "horizon", where), where + ".horizon");
    const double ratio = horizon / dt;
    if (horizon <= 0.0 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      fail(where + ".horizon", "must be a positive multiple of dt");
    }
    const int steps = static_cast<int>(std::round(ratio));
    if (kind == "zero") {
      const int dim = as_int(field(j, "dim", where), where + ".dim");
      if (dim < 1) fail(where + ".dim", "must be positive");
      return GridPath::constant(dt, steps, Vector::Zero(dim));
    }
    if (kind == "constant") {
      return GridPath::constant(dt, steps, as_vector(field(j, "value", where), where + ".value"));
    }
    if (kind == "linear") {
      const Vector slope = as_vector(field(j, "slope", where), where + ".slope");
      return GridPath::sample(dt, steps, static_cast<int>(slope.size()),
                              [&](double t) -> Vector { return slope * t; });
    }
    fail(where + ".kind", "unknown path kind '" + kind + "'");
  });
}

// ---- problems ---------------------------------------------------------------------

json to_json(const SviProblem& p) {
  return {{"operator", to_json(p.spec)},
          {"drift", to_json(p.drift)},
          {"dispersion", to_json(p.dispersion)},
          {"x", vector_json(p.x)},
          {"horizon", p.horizon}};
}

SviProblem svi_problem_from_json(const json& j, const std::string& where) {
  return located(where, [&]() -> SviProblem {
    OperatorSpec spec = operator_from_json(field(j, "operator", where), where + ".operator");
    const int m = spec.dim();
    Drift drift = j.contains("drift") ? drift_from_json(j.at("drift"), m, where + ".drift")
                                      : Drift::zero(m);
    Dispersion sigma = j.contains("dispersion")
                           ? dispersion_from_json(j.at("dispersion"), m, where + ".dispersion")
                           : Dispersion::zero(m, 1);
    const Vector x = as_vector(field(j, "x", where), where + ".x");
    if (x.size() != m) fail(where + ".x", "has the wrong dimension");
    const double horizon =
        j.contains("horizon") ? finite_double(j.at("horizon"), where + ".horizon") : 1.0;
    if (horizon <= 0.0) fail(where + ".horizon", "must be positive");
    SviProblem p{std::move(spec), std::move(drift), std::move(sigma), x, horizon};
    if (domain_distance(p.spec, p.x) > kDomainTolerance) {
      fail(where + ".x", "is outside the closure of D(phi)");
    }
    p.validate();
    return p;
  });
}

namespace {

int level_field(const json& j, const std::string& key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  const int level = as_int(j.at(key), where + "." + key);
  if (level < 0 || level > kMaxDriverLevel) {
    fail(where + "." + key, "must lie in [0, " + std::to_string(kMaxDriverLevel) + "]");
  }
  return level;
}

long positive_count(const json& j, const std::string& key, const std::string& where, long fallback) {
  if (!j.contains(key)) return fallback;
  const long n = as_long(j.at(key), where + "." + key);
  if (n < 1) fail(where + "." + key, "must be positive");
  return n;
}

double positive_number(const json& j, const std::string& key, const std::string& where,
                       double fallback) {
  if (!j.contains(key)) return fallback;
  const double x = finite_double(j.at(key), where + "." + key);
  if (x <= 0.0) fail(where + "." + key, "must be positive");
  return x;
}

std::vector<double> positive_list(const json& j, const std::string& key, const std::string& where,
                                  bool decreasing) {
  const std::vector<double> v = as_list(field(j, key, where), where + "." + key);
  if (v.empty()) fail(where + "." + key, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= 0.0) fail(where + "." + key, "values must be positive");
    if (decreasing && i > 0 && v[i] >= v[i - 1]) fail(where + "." + key, "must be decreasing");
  }
  return v;
}

}  // namespace

DviConfig dvi_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> DviConfig {
    check_schema(j, w);
    OperatorSpec spec = operator_from_json(field(j, "operator", w), w + ".operator");
    const Vector u0 = as_vector(field(j, "u0", w), w + ".u0");
    if (u0.size() != spec.dim()) fail(w + ".u0", "has the wrong dimension");
    const double horizon = positive_number(j, "horizon", w, 1.0);
    const double step = positive_number(j, "step", w, 1e-3);
    GridPath forcing = j.contains("forcing")
                           ? path_from_json(j.at("forcing"), w + ".forcing")
                           : GridPath::constant(horizon, 1, Vector::Zero(spec.dim()));
    if (forcing.dim() != spec.dim()) fail(w + ".forcing", "has the wrong dimension");
    if (domain_distance(spec, u0) > 1e-6) fail(w + ".u0", "is farther than 1e-6 from D(phi)");
    return {DviProblem{std::move(spec), std::move(forcing), u0, horizon}, step};
  });
}

SkeletonConfig skeleton_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> SkeletonConfig {
    check_schema(j, w);
    OperatorSpec spec = operator_from_json(field(j, "operator", w), w + ".operator");
    const int m = spec.dim();
    GridPath control = path_from_json(field(j, "control", w), w + ".control");
    Drift drift = j.contains("drift") ? drift_from_json(j.at("drift"), m, w + ".drift")
                                      : Drift::zero(m);
    Dispersion sigma = j.contains("dispersion")
                           ? dispersion_from_json(j.at("dispersion"), m, w + ".dispersion")
                           : Dispersion::zero(m, control.dim());
    const Vector x = as_vector(field(j, "x", w), w + ".x");
    if (x.size() != m) fail(w + ".x", "has the wrong dimension");
    if (sigma.noise_dim() != control.dim()) {
      fail(w + ".control", "dimension differs from the noise dimension");
    }
    const double step = positive_number(j, "step", w, control.dt());
    return {SkeletonInput{std::move(spec), std::move(control), x, std::move(drift), std::move(sigma)},
            step};
  });
}

SviRunConfig svi_run_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> SviRunConfig {
    check_schema(j, w);
    return {svi_problem_from_json(field(j, "problem", w), w + ".problem"),
            level_field(j, "fine_level", w, 12)};
  });
}

ProxCheckConfig prox_check_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> ProxCheckConfig {
    check_schema(j, w);
    ProxCheckConfig c;
    c.spec = operator_from_json(field(j, "operator", w), w + ".operator");
    c.lambdas = j.contains("lambdas") ? positive_list(j, "lambdas", w, false)
                                      : std::vector<double>{0.1, 1.0};
    if (j.contains("points")) {
      const json& pts = j.at("points");
      if (!pts.is_array()) fail(w + ".points", "expected an array of points");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string at = w + ".points[" + std::to_string(i) + "]";
        Vector p = as_vector(pts[i], at);
        if (p.size() != c.spec.dim()) fail(at, "has the wrong dimension");
        c.points.push_back(std::move(p));
      }
    }
    if (j.contains("random_cases")) {
      c.random_cases = as_int(j.at("random_cases"), w + ".random_cases");
      if (c.random_cases < 0) fail(w + ".random_cases", "must be nonnegative");
    }
    return c;
  });
}

OracleCompareConfig oracle_compare_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> OracleCompareConfig {
    check_schema(j, w);
    OracleCompareConfig c;
    if (j.contains("x")) {
      c.x = finite_double(j.at("x"), w + ".x");
      if (c.x < 0.0) fail(w + ".x", "must be nonnegative");
    }
    c.horizon = positive_number(j, "horizon", w, c.horizon);
    c.fine_level = level_field(j, "fine_level", w, c.fine_level);
    c.trials = positive_count(j, "trials", w, c.trials);
    return c;
  });
}

// ---- study configs ------------------------------------------------------------------

json to_json(const LimitTheoremConfig& c) {
  return {{"schema_version", kSchemaVersion}, {"problem", to_json(c.problem)},
          {"levels", c.levels},               {"fine_level", c.fine_level},
          {"eps", c.eps},                     {"trials", c.trials}};
}

LimitTheoremConfig limit_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> LimitTheoremConfig {
    check_schema(j, w);
    LimitTheoremConfig c{svi_problem_from_json(field(j, "problem", w), w + ".problem")};
    c.fine_level = level_field(j, "fine_level", w, c.fine_level);
    const json& levels = field(j, "levels", w);
    if (!levels.is_array() || levels.empty()) fail(w + ".levels", "expected a non-empty array");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string at = w + ".levels[" + std::to_string(i) + "]";
      const int n = as_int(levels[i], at);
      if (n < 0 || n > c.fine_level) fail(at, "must lie in [0, fine_level]");
      c.levels.push_back(n);
    }
    c.eps = positive_number(j, "eps", w, c.eps);
    c.trials = positive_count(j, "trials", w, c.trials);
    return c;
  });
}

json to_json(const ContinuityConfig& c) {
  json j = {{"schema_version", kSchemaVersion},
            {"problem", to_json(c.problem)},
            {"eps", c.eps},
            {"deltas", c.deltas},
            {"trials_target", c.trials_target},
            {"max_draws", c.max_draws},
            {"fine_level", c.fine_level}};
  if (c.control) j["control"] = to_json(*c.control);
  return j;
}

ContinuityConfig continuity_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> ContinuityConfig {
    check_schema(j, w);
    ContinuityConfig c{svi_problem_from_json(field(j, "problem", w), w + ".problem")};
    if (j.contains("control") && !j.at("control").is_null()) {
      c.control = path_from_json(j.at("control"), w + ".control");
      if (c.control->dim() != c.problem.noise_dim()) {
        fail(w + ".control", "dimension differs from the noise dimension");
      }
      if (!c.control->node(0).isZero(0.0)) fail(w + ".control", "must start at 0");
    }
    c.eps = positive_number(j, "eps", w, c.eps);
    c.deltas = positive_list(j, "deltas", w, true);
    c.trials_target = positive_count(j, "trials_target", w, c.trials_target);
    c.max_draws = positive_count(j, "max_draws", w, c.max_draws);
    c.fine_level = level_field(j, "fine_level", w, c.fine_level);
    return c;
  });
}

json to_json(const SmallBallConfig& c) {
  return {{"schema_version", kSchemaVersion}, {"noise_dim", c.noise_dim},
          {"horizon", c.horizon},             {"eps_grid", c.eps_grid},
          {"trials", c.trials},               {"fine_level", c.fine_level}};
}

SmallBallConfig small_ball_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> SmallBallConfig {
    check_schema(j, w);
    SmallBallConfig c;
    c.noise_dim = static_cast<int>(positive_count(j, "noise_dim", w, c.noise_dim));
    c.horizon = positive_number(j, "horizon", w, c.horizon);
    c.eps_grid = positive_list(j, "eps_grid", w, false);
    c.trials = positive_count(j, "trials", w, c.trials);
    c.fine_level = level_field(j, "fine_level", w, c.fine_level);
    return c;
  });
}

json to_json(const LevyAreaConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"noise_dim", c.noise_dim},
          {"horizon", c.horizon},
          {"deltas", c.deltas},
          {"multipliers", c.multipliers},
          {"trials_target", c.trials_target},
          {"max_draws", c.max_draws},
          {"fine_level", c.fine_level}};
}

LevyAreaConfig levy_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> LevyAreaConfig {
    check_schema(j, w);
    LevyAreaConfig c;
    c.noise_dim = static_cast<int>(positive_count(j, "noise_dim", w, c.noise_dim));
    if (c.noise_dim < 2) fail(w + ".noise_dim", "must be at least 2");
    c.horizon = positive_number(j, "horizon", w, c.horizon);
    c.deltas = positive_list(j, "deltas", w, true);
    c.multipliers = as_list(field(j, "multipliers", w), w + ".multipliers");
    if (c.multipliers.empty()) fail(w + ".multipliers", "must not be empty");
    for (double m : c.multipliers) {
      if (m < 0.0) fail(w + ".multipliers", "values must be nonnegative");
    }
    c.trials_target = positive_count(j, "trials_target", w, c.trials_target);
    c.max_draws = positive_count(j, "max_draws", w, c.max_draws);
    c.fine_level = level_field(j, "fine_level", w, c.fine_level);
    return c;
  });
}

json to_json(const KTailConfig& c) {
  json j = {{"schema_version", kSchemaVersion},
            {"problem", to_json(c.problem)},
            {"trials", c.trials},
            {"fine_level", c.fine_level}};
  // An empty grid means the default one and is left out.
  if (!c.r_grid.empty()) j["r_grid"] = c.r_grid;
  return j;
}

KTailConfig k_tail_config_from_json(const json& j) {
  const std::string w = "config";
  return located(w, [&]() -> KTailConfig {
    check_schema(j, w);
    KTailConfig c{svi_problem_from_json(field(j, "problem", w), w + ".problem")};
    c.trials = positive_count(j, "trials", w, c.trials);
    c.fine_level = level_field(j, "fine_level", w, c.fine_level);
    if (j.contains("r_grid")) c.r_grid = positive_list(j, "r_grid", w, false);
    return c;
  });
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace svilab
