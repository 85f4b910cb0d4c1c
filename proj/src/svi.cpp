#include "svilab/svi.hpp"

#include "svilab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace svilab {

void SviProblem::validate() const {
  const int m = spec.dim();
  require(drift.dim() == m, "problem: drift dimension differs from the operator");
  require(dispersion.dim() == m, "problem: dispersion dimension differs from the operator");
  require(x.size() == m, "problem: initial point has wrong dimension");
  require(horizon > 0.0 && std::isfinite(horizon), "problem: horizon must be positive");
  require(domain_distance(spec, x) <= kDomainTolerance,
          "problem: initial point is outside the closure of D(phi)");
}

DyadicDriver generate_driver(int noise_dim, double horizon, int level, std::uint64_t seed) {
  require(noise_dim >= 1, "generate_driver: noise dimension must be positive");
  require(horizon > 0.0 && std::isfinite(horizon), "generate_driver: horizon must be positive");
  require(level >= 0 && level <= kMaxDriverLevel,
          "generate_driver: level must lie in [0, " + std::to_string(kMaxDriverLevel) + "]");
  const int steps = 1 << level;
  const double dt = horizon / steps;
  IncrementSource source(seed, dt);
  Matrix w(noise_dim, steps + 1);
  w.col(0).setZero();
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < noise_dim; ++i) w(i, k + 1) = w(i, k) + source.next();
  }
  return {level, GridPath(dt, std::move(w))};
}

DyadicDriver restrict_driver(const DyadicDriver& driver, int level) {
  require(level >= 0 && level <= driver.level, "restrict_driver: level out of range");
  const int stride = 1 << (driver.level - level);
  const int steps = 1 << level;
  Matrix w(driver.noise_dim(), steps + 1);
  for (int k = 0; k <= steps; ++k) w.col(k) = driver.w.node(k * stride);
  return {level, GridPath(driver.dt() * stride, std::move(w))};
}

CoarseDriver coarsen_driver(const DyadicDriver& driver, int level) {
  const DyadicDriver coarse = restrict_driver(driver, level);
  const int slabs = coarse.w.steps();
  Matrix slope(driver.noise_dim(), slabs + 1);
  for (int k = 0; k < slabs; ++k) {
    slope.col(k) = (coarse.w.node(k + 1) - coarse.w.node(k)) / coarse.dt();
  }
  slope.col(slabs) = slope.col(slabs - 1);
  return {level, coarse.w, GridPath(coarse.dt(), std::move(slope))};
}

GridPath piecewise_linear_driver(const DyadicDriver& driver, int level, double substep) {
  require(level >= 0 && level <= driver.level, "piecewise_linear_driver: level out of range");
  const double slab = driver.horizon() / (1 << level);
  const double ratio = slab / substep;
  require(substep > 0.0 && std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio && ratio >= 1 - 1e-9,
          "piecewise_linear_driver: substep must divide the slab width");
  return resample(restrict_driver(driver, level).w, substep);
}

namespace {

SolutionPair to_solution(SkeletonPair pair) {
  const double tv = running_variation(pair.eta).tail(1)[0];
  return {std::move(pair.xi), std::move(pair.eta), tv, pair.recovery_defect};
}

}  // namespace

SolutionPair wong_zakai_solve(const SviProblem& problem, const DyadicDriver& driver, int level,
                              double substep, const ProxOptions& opts) {
  problem.validate();
  require(driver.noise_dim() == problem.noise_dim(),
          "wong_zakai_solve: driver dimension differs from the noise dimension");
  require(std::abs(driver.horizon() - problem.horizon) <= 1e-12 * problem.horizon,
          "wong_zakai_solve: driver horizon differs from the problem horizon");
  SkeletonInput input{problem.spec, piecewise_linear_driver(driver, level, substep), problem.x,
                      problem.drift, problem.dispersion};
  return to_solution(skeleton(input, substep, opts));
}

SolutionPair reference_solve(const SviProblem& problem, const DyadicDriver& driver,
                             const ProxOptions& opts) {
  return wong_zakai_solve(problem, driver, driver.level, driver.dt(), opts);
}

SolutionPair skorokhod_oracle(double x, const GridPath& w) {
  require(x >= 0.0, "skorokhod_oracle: x must be nonnegative");
  require(w.dim() == 1, "skorokhod_oracle: driver must be one-dimensional");
  const int n = w.steps();
  Matrix big_x(1, n + 1);
  Matrix big_k(1, n + 1);
  double deficit = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double free = x + w.values()(0, k);
    deficit = std::max(deficit, -free);
    big_x(0, k) = free + deficit;
    big_k(0, k) = -deficit;
  }
  GridPath k_path(w.dt(), std::move(big_k));
  const double tv = running_variation(k_path).tail(1)[0];
  return {GridPath(w.dt(), std::move(big_x)), std::move(k_path), tv, 0.0};
}

ValidationReport validate_solution(const SviProblem& problem, const SolutionPair& solution,
                                   const GridPath& w, std::span<const GraphPair> pairs,
                                   const InteriorCertificate& cert) {
  const GridPath& big_x = solution.x;
  const GridPath& big_k = solution.k;
  require(big_x.same_grid(big_k) && big_x.same_grid(w), "validate_solution: grid mismatch");
  require(big_x.dim() == problem.dim() && w.dim() == problem.noise_dim(),
          "validate_solution: dimension mismatch");

  ValidationReport report;
  report.initial_ok = (big_x.node(0) - problem.x).norm() <= 1e-12;
  for (int k = 0; k <= big_x.steps(); ++k) {
    report.feasibility_error =
        std::max(report.feasibility_error, domain_distance(problem.spec, big_x.node(k)));
  }
  report.feasibility_ok = report.feasibility_error <= 1e-8;
  report.variation_ok = big_k.node(0).norm() <= 1e-12 && std::isfinite(solution.tv_k);

  const double dt = big_x.dt();
  Vector drift_sum = Vector::Zero(problem.dim());
  Vector noise_sum = Vector::Zero(problem.dim());
  for (int k = 0; k < big_x.steps(); ++k) {
    const Vector left = big_x.node(k);
    const Vector right = big_x.node(k + 1);
    drift_sum += dt * problem.drift(left);
    noise_sum += 0.5 * (problem.dispersion(left) + problem.dispersion(right)) *
                 (w.node(k + 1) - w.node(k));
    const Vector residual = right - problem.x - drift_sum - noise_sum + big_k.node(k + 1);
    report.dynamics_residual = std::max(report.dynamics_residual, residual.norm());
  }
  report.dynamics_budget = 5.0 * std::sqrt(dt) * (1.0 + sup_norm(w));
  report.dynamics_ok = report.dynamics_residual <= report.dynamics_budget;

  report.flow_slack = validate_flow(problem.spec, big_x, big_k, pairs);
  report.flow_ok = report.flow_slack >= -kFlowTolerance;
  report.interior_slack = interior_inequality_slack(big_x, big_k, cert);
  report.interior_ok = report.interior_slack >= -kFlowTolerance;
  return report;
}

}  // namespace svilab
