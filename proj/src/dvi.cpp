#include "svilab/dvi.hpp"

#include <algorithm>
#include <cmath>

namespace svilab {
namespace {

int steps_over(double horizon, double step, const char* what) {
  require(step > 0.0 && std::isfinite(step), std::string(what) + ": step must be positive");
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  require(rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio),
          std::string(what) + ": step does not divide the horizon");
  return static_cast<int>(rounded);
}

void check_start(const OperatorSpec& spec, const Vector& start, const char* what) {
  require(start.size() == spec.dim(), std::string(what) + ": initial point has wrong dimension");
  require(domain_distance(spec, start) <= 1e-6,
          std::string(what) + ": initial point is farther than 1e-6 from D(phi)");
}

}  // namespace

GridPath solve_dvi(const DviProblem& problem, double step, const ProxOptions& opts) {
  const OperatorSpec& spec = problem.spec;
  check_start(spec, problem.u0, "solve_dvi");
  require(problem.forcing.dim() == spec.dim(), "solve_dvi: forcing has wrong dimension");
  require(problem.forcing.horizon() >= problem.horizon * (1 - 1e-12),
          "solve_dvi: forcing does not cover [0, T]");
  const int steps = steps_over(problem.horizon, step, "solve_dvi");
  const GridPath forcing = problem.forcing.horizon() == problem.horizon
                               ? resample(problem.forcing, step)
                               : GridPath::sample(step, steps, spec.dim(),
                                                  [&](double t) { return problem.forcing.at(t); });

  Matrix u(spec.dim(), steps + 1);
  u.col(0) = problem.u0;
  for (int k = 0; k < steps; ++k) {
    u.col(k + 1) = resolvent(spec, step, u.col(k) + step * forcing.node(k), opts);
  }
  return GridPath(step, std::move(u));
}

EnergyReport brezis_energy_check(const DviProblem& problem, const GridPath& u) {
  const double step = u.dt();
  double kinetic = 0.0;
  double forcing = 0.0;
  for (int k = 0; k < u.steps(); ++k) {
    kinetic += (u.node(k + 1) - u.node(k)).squaredNorm() / step;
    forcing += problem.forcing.at(k * step).squaredNorm() * step;
  }
  double phi0 = evaluate(problem.spec, u.node(0));
  if (!std::isfinite(phi0)) phi0 = evaluate(problem.spec, project_domain(problem.spec, u.node(0)));
  EnergyReport report;
  report.lhs = std::sqrt(kinetic);
  report.rhs = std::sqrt(forcing) + std::sqrt(std::abs(phi0));
  report.pass = report.lhs <= report.rhs * 1.05;
  return report;
}

SkeletonPair skeleton(const SkeletonInput& input, double step, const ProxOptions& opts) {
  const OperatorSpec& spec = input.spec;
  const int m = spec.dim();
  check_start(spec, input.x, "skeleton");
  require(input.drift.dim() == m, "skeleton: drift dimension differs from the operator");
  require(input.dispersion.dim() == m, "skeleton: dispersion dimension differs from the operator");
  require(input.dispersion.noise_dim() == input.control.dim(),
          "skeleton: control dimension differs from the noise dimension");
  require(input.control.node(0).isZero(0.0), "skeleton: control must start at 0");

  const int steps = steps_over(input.control.horizon(), step, "skeleton");
  const GridPath h = resample(input.control, step);
  const bool drift_free = input.drift.is_zero();
  const bool noise_free = input.dispersion.is_zero();

  Matrix xi(m, steps + 1);
  Matrix eta(m, steps + 1);
  xi.col(0) = input.x;
  eta.col(0).setZero();
  Vector drive_sum = Vector::Zero(m);
  Vector displacement = Vector::Zero(m);
  double defect = 0.0;
  Vector increment(m);
  for (int k = 0; k < steps; ++k) {
    const Vector current = xi.col(k);
    increment.setZero();
    if (!drift_free) increment += step * input.drift(current);
    if (!noise_free) {
      const Vector dh = h.node(k + 1) - h.node(k);
      const Matrix sigma_now = input.dispersion(current);
      const Vector predictor = current + increment + sigma_now * dh;
      increment += 0.5 * (sigma_now + input.dispersion(predictor)) * dh;
    }
    const Vector shifted = current + increment;
    xi.col(k + 1) = resolvent(spec, step, shifted, opts);
    drive_sum += increment;
    displacement += shifted - xi.col(k + 1);
    eta.col(k + 1) = drive_sum - xi.col(k + 1) + input.x;
    defect = std::max(defect, (eta.col(k + 1) - displacement).norm());
  }
  return {GridPath(step, std::move(xi)), GridPath(step, std::move(eta)), defect};
}

double validate_flow(const OperatorSpec& spec, const GridPath& u, const GridPath& g,
                     std::span<const GraphPair> pairs) {
  require(u.same_grid(g), "validate_flow: paths are on different grids");
  require(u.dim() == spec.dim() && g.dim() == spec.dim(), "validate_flow: dimension mismatch");
  const double step = u.dt();
  double worst = kInfinity;
  for (int k = 0; k < u.steps(); ++k) {
    const Vector rate = (g.node(k + 1) - g.node(k)) / step;
    const auto right = u.node(k + 1);
    for (const GraphPair& pair : pairs) {
      worst = std::min(worst, (right - pair.alpha).dot(rate - pair.beta));
    }
  }
  return worst;
}

double interior_inequality_slack(const GridPath& u, const GridPath& g,
                                 const InteriorCertificate& cert) {
  require(u.same_grid(g) && u.dim() == g.dim(), "interior_inequality_slack: grid mismatch");
  require(cert.a.size() == u.dim(), "interior_inequality_slack: certificate dimension mismatch");
  const double step = u.dt();
  // F(t) - F(s) is the inequality's slack on [s, t]; track the running max of F.
  double f = 0.0;
  double running_max = 0.0;
  double worst = kInfinity;
  for (int k = 0; k < u.steps(); ++k) {
    const Vector dg = g.node(k + 1) - g.node(k);
    const Vector offset = u.node(k + 1) - cert.a;
    f += offset.dot(dg) - cert.c1 * dg.norm() + cert.c2 * offset.norm() * step +
         cert.c1 * cert.c2 * step;
    worst = std::min(worst, f - running_max);
    running_max = std::max(running_max, f);
  }
  return worst;
}

}  // namespace svilab
