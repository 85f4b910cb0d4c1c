#ifndef SVILAB_SVI_HPP
#define SVILAB_SVI_HPP

// Stochastic variational inequalities dX in b dt + sigma o dw - d(phi)(X) dt:
// dyadic Brownian drivers, Wong-Zakai approximants, reference solutions,
// the exact Skorokhod reflection at 0, and solution validation.

#include "svilab/coefficients.hpp"
#include "svilab/dvi.hpp"
#include "svilab/monotone.hpp"
#include "svilab/paths.hpp"

#include <cstdint>
#include <span>

namespace svilab {

struct SviProblem {
  OperatorSpec spec;
  Drift drift;
  Dispersion dispersion;
  Vector x;
  double horizon = 1.0;

  int dim() const noexcept { return spec.dim(); }
  int noise_dim() const noexcept { return dispersion.noise_dim(); }
  /// Throws InputError when the pieces disagree in dimension or x is off the domain.
  void validate() const;
};

inline constexpr int kMaxDriverLevel = 24;

/// Brownian path on the dyadic grid dt = T 2^{-level}, w(0) = 0.
struct DyadicDriver {
  int level = 0;
  GridPath w;

  double horizon() const noexcept { return w.horizon(); }
  double dt() const noexcept { return w.dt(); }
  int noise_dim() const noexcept { return w.dim(); }
};

/// Deterministic in `seed`; increments are drawn step by step, coordinate by coordinate.
DyadicDriver generate_driver(int noise_dim, double horizon, int level, std::uint64_t seed);

/// The same Brownian path observed on the coarser grid of `level`.
DyadicDriver restrict_driver(const DyadicDriver& driver, int level);

/// w_n: the piecewise-linear interpolation of w at the level-n dyadic nodes,
/// with its slope 2^n [w(t_n^+) - w(t_n)] (per unit horizon) on each slab.
struct CoarseDriver {
  int level = 0;
  GridPath path;   // nodes at k T 2^{-n}
  GridPath slope;  // slope on [t_k, t_{k+1}); the last node repeats the last slab
};

CoarseDriver coarsen_driver(const DyadicDriver& driver, int level);

/// w_n sampled on a grid of step `substep` (which must divide the slab width).
GridPath piecewise_linear_driver(const DyadicDriver& driver, int level, double substep);

struct SolutionPair {
  GridPath x;
  GridPath k;           // K(0) = 0, dX = b dt + sigma o dw - dK
  double tv_k = 0.0;    // |K|_T
  double residual = 0.0;
};

/// X_n of the Wong-Zakai inequality driven by w_n, integrated with `skeleton` on the
/// substep grid; K_n = int b + int sigma dw_n - X_n + x.
SolutionPair wong_zakai_solve(const SviProblem& problem, const DyadicDriver& driver, int level,
                              double substep, const ProxOptions& opts = {});

/// The finest-level approximant on the driver's own grid.
SolutionPair reference_solve(const SviProblem& problem, const DyadicDriver& driver,
                             const ProxOptions& opts = {});

/// Reflection at 0 for phi = indicator of [0, inf), b = 0, sigma = 1:
/// X = x + w + max(0, max_{s<=t} -(x + w(s))), K = x + w - X.
SolutionPair skorokhod_oracle(double x, const GridPath& w);

struct ValidationReport {
  bool initial_ok = false;      // (i) X(0) = x
  bool feasibility_ok = false;  // (i) X(t) in the closure of D within 1e-8
  bool variation_ok = false;    // (ii) K(0) = 0, |K|_T finite
  bool dynamics_ok = false;     // (iii) residual within budget
  bool flow_ok = false;         // (iv) dK in d(phi)(X) dt against the test pairs
  bool interior_ok = false;     // interior-point inequality with the certificate

  double feasibility_error = 0.0;
  double dynamics_residual = 0.0;
  double dynamics_budget = 0.0;
  double flow_slack = 0.0;
  double interior_slack = 0.0;

  bool all_pass() const noexcept {
    return initial_ok && feasibility_ok && variation_ok && dynamics_ok && flow_ok && interior_ok;
  }
};

inline constexpr double kFlowTolerance = 1e-6;

/// Checks a candidate (X, K) against the driver w it was computed from. The
/// Stratonovich integral uses trapezoidal (Heun-consistent) sums.
ValidationReport validate_solution(const SviProblem& problem, const SolutionPair& solution,
                                   const GridPath& w, std::span<const GraphPair> pairs,
                                   const InteriorCertificate& cert);

}  // namespace svilab

#endif  // SVILAB_SVI_HPP
