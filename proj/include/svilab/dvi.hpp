#ifndef SVILAB_DVI_HPP
#define SVILAB_DVI_HPP

// Deterministic variational inequalities u' in -d(phi)(u) + f, integrated by
// the implicit proximal (catching-up) scheme, and the controlled skeleton
// pairs (xi(h, x), eta(h, x)).

#include "svilab/coefficients.hpp"
#include "svilab/monotone.hpp"
#include "svilab/paths.hpp"

#include <span>

namespace svilab {

struct DviProblem {
  OperatorSpec spec;
  GridPath forcing;  // f, values in R^m
  Vector u0;
  double horizon = 1.0;
};

/// u_{k+1} = J_step(u_k + step f(t_k)). The forcing is read as piecewise linear.
GridPath solve_dvi(const DviProblem& problem, double step, const ProxOptions& opts = {});

struct EnergyReport {
  double lhs = 0.0;  // (sum |du|^2 / step)^{1/2}
  double rhs = 0.0;  // (sum |f|^2 step)^{1/2} + |phi(u0)|^{1/2}
  bool pass = false;
};

/// Discrete form of the energy bound for solutions of u' in -d(phi)(u) + f.
/// Passes when lhs <= 1.05 rhs.
EnergyReport brezis_energy_check(const DviProblem& problem, const GridPath& u);

struct SkeletonInput {
  OperatorSpec spec;
  GridPath control;  // h with h(0) = 0, values in R^d
  Vector x;
  Drift drift;
  Dispersion dispersion;
};

struct SkeletonPair {
  GridPath xi;
  GridPath eta;
  /// max_k |eta_k - accumulated prox displacement_k|; round-off only.
  double recovery_defect = 0.0;
};

/// xi_{k+1} = J_step(xi_k + step b(xi_k) + 1/2 (sigma(xi_k) + sigma(xi_pred)) dh_k) with the Heun
/// predictor xi_pred = xi_k + step b(xi_k) + sigma(xi_k) dh_k, and
/// eta_k = sum_{j<k} [step b + sigma-bar dh]_j - xi_k + x.
SkeletonPair skeleton(const SkeletonInput& input, double step, const ProxOptions& opts = {});

/// min over grid intervals k and pairs of <u_{k+1} - alpha, dg_k - beta step> / step.
/// The right endpoint matches the implicit scheme, where dg_k / step lies in d(phi)(u_{k+1}).
double validate_flow(const OperatorSpec& spec, const GridPath& u, const GridPath& g,
                     std::span<const GraphPair> pairs);

/// min over grid-aligned s < t of
///   int_s^t <u - a, dg> - c1 (|g|_t - |g|_s) + c2 int_s^t |u - a| + c1 c2 (t - s).
double interior_inequality_slack(const GridPath& u, const GridPath& g,
                                 const InteriorCertificate& cert);

}  // namespace svilab

#endif  // SVILAB_DVI_HPP
