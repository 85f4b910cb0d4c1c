#ifndef SVILAB_MONOTONE_HPP
#define SVILAB_MONOTONE_HPP

// Convex functions phi on R^m and the maximal monotone operators A = d(phi):
// resolvent (prox), Yosida approximation, minimal section, graph sampling.

#include "svilab/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace svilab {

struct ZeroFunction {};

/// phi(x) = 1/2 x'Qx + c'x with Q symmetric positive semidefinite.
struct Quadratic {
  Matrix q;
  Vector c;
};

/// Indicator of prod_i [lower_i, upper_i]; bounds may be infinite.
struct IndicatorBox {
  Vector lower;
  Vector upper;
};

struct IndicatorBall {
  Vector center;
  double radius = 1.0;
};

/// Indicator of {x : a_i . x <= b_i}; row i of `normals` is a_i.
struct IndicatorHalfspaces {
  Matrix normals;
  Vector offsets;
};

/// phi(x) = weight * |x|_1.
struct ScaledL1 {
  double weight = 1.0;
};

using Constraint = std::variant<IndicatorBox, IndicatorBall, IndicatorHalfspaces>;

/// Quadratic plus the indicator of a closed convex set.
struct SumFunction {
  Quadratic smooth;
  Constraint constraint;
};

using OperatorKind = std::variant<ZeroFunction, Quadratic, IndicatorBox, IndicatorBall,
                                  IndicatorHalfspaces, ScaledL1, SumFunction>;

/// A proper l.s.c. convex function from the closed catalog. Construction
/// validates dimensions and convexity data, so every instance is well formed.
class OperatorSpec {
 public:
  static OperatorSpec zero(int dim);
  static OperatorSpec quadratic(Matrix q, Vector c);
  static OperatorSpec box(Vector lower, Vector upper);
  static OperatorSpec ball(Vector center, double radius);
  static OperatorSpec halfspaces(Matrix normals, Vector offsets);
  static OperatorSpec scaled_l1(int dim, double weight);
  static OperatorSpec sum(Quadratic smooth, Constraint constraint);

  int dim() const noexcept { return dim_; }
  const OperatorKind& kind() const noexcept { return kind_; }
  std::string kind_name() const;

  /// True for kinds whose effective domain is a proper subset of R^m.
  bool has_constraint() const noexcept;
  /// True for pure indicator kinds (phi is 0 on its domain).
  bool is_indicator() const noexcept;

 private:
  OperatorSpec(OperatorKind kind, int dim) : kind_(std::move(kind)), dim_(dim) {}

  OperatorKind kind_;
  int dim_;
};

struct ProxOptions {
  double tolerance = 1e-10;
  int max_sweeps = 10000;      // Dykstra sweeps over the halfspaces
  int max_iterations = 100000; // proximal-gradient iterations for SumFunction
};

/// phi(x), +inf outside D(phi).
double evaluate(const OperatorSpec& spec, const Vector& x);

bool in_domain(const OperatorSpec& spec, const Vector& x);

/// Euclidean projection onto the closure of D(phi).
Vector project_domain(const OperatorSpec& spec, const Vector& x, const ProxOptions& opts = {});

double domain_distance(const OperatorSpec& spec, const Vector& x, const ProxOptions& opts = {});

/// argmin_z 1/2 |z - x|^2 + lambda phi(z), i.e. (I + lambda d(phi))^{-1} x.
Vector resolvent(const OperatorSpec& spec, double lambda, const Vector& x,
                 const ProxOptions& opts = {});

/// (x - J_lambda x) / lambda.
Vector yosida(const OperatorSpec& spec, double lambda, const Vector& x,
              const ProxOptions& opts = {});

/// Least-norm element of d(phi)(x); empty when x is not in D(d(phi)).
std::optional<Vector> minimal_section(const OperatorSpec& spec, const Vector& x);

struct GraphPair {
  Vector alpha;
  Vector beta;  // beta is in d(phi)(alpha)
};

/// Points of Gr(d(phi)) from closed-form subdifferentials. For constrained
/// kinds about 30% of the pairs sit on the boundary with outward normals of
/// magnitude in [0, 10].
std::vector<GraphPair> sample_graph(const OperatorSpec& spec, int count, std::uint64_t seed);

/// a, c1, c2 such that B(a, c1) lies in D(d(phi)) and |A°| <= c2 on it.
struct InteriorCertificate {
  Vector a;
  double c1 = 1.0;
  double c2 = 0.0;
};

InteriorCertificate interior_certificate(const OperatorSpec& spec);

/// Worst-case deviations from the resolvent and Yosida laws over random cases;
/// a law holds when its entry is at most the matching tolerance.
struct OperatorLawReport {
  int cases = 0;
  double nonexpansive_excess = 0.0;  // max |Jx - Jy| - |x - y|
  double lipschitz_excess = 0.0;     // max |A_l x - A_l y| - |x - y| / l
  double monotone_deficit = 0.0;     // max -(A_l x - A_l y).(x - y)
  double moreau_error = 0.0;         // max |x - J_l x - l A_l x|
  double norm_decrease = 0.0;        // max drop of |A_l x| as l decreases, x in D(A)
  double section_gap = 0.0;          // max ||A_l x| - |A°x|| at l = 1e-8

  /// Laws to 1e-9, the Moreau identity to 1e-12, |A_l x| -> |A°x| to 1e-6.
  bool pass() const noexcept {
    return nonexpansive_excess <= 1e-9 && lipschitz_excess <= 1e-9 && monotone_deficit <= 1e-9 &&
           moreau_error <= 1e-12 && norm_decrease <= 1e-9 && section_gap <= 1e-6;
  }
};

OperatorLawReport check_operator_laws(const OperatorSpec& spec, int cases, std::uint64_t seed);

}  // namespace svilab

#endif  // SVILAB_MONOTONE_HPP
