#include "svilab/monotone.hpp"

#include "svilab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace svilab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const OperatorSpec& spec, const Vector& x) {
  if (x.size() != spec.dim()) {
    throw InputError("dimension mismatch: operator has dim " + std::to_string(spec.dim()) +
                     ", point has dim " + std::to_string(x.size()));
  }
}

int constraint_dim(const Constraint& c) {
  return std::visit(Overloaded{[](const IndicatorBox& b) { return int(b.lower.size()); },
                               [](const IndicatorBall& b) { return int(b.center.size()); },
                               [](const IndicatorHalfspaces& h) { return int(h.normals.cols()); }},
                    c);
}

void validate_quadratic(const Quadratic& q) {
  require(q.q.rows() == q.q.cols(), "quadratic: Q must be square");
  require(q.q.rows() == q.c.size(), "quadratic: Q and c dimensions differ");
  require(q.q.rows() > 0, "quadratic: dimension must be positive");
  require((q.q - q.q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + q.q.cwiseAbs().maxCoeff()),
          "quadratic: Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q.q, Eigen::EigenvaluesOnly);
  require(eig.eigenvalues().minCoeff() >= -1e-12, "quadratic: Q must be positive semidefinite");
}

void validate_constraint(const Constraint& c) {
  std::visit(Overloaded{
                 [](const IndicatorBox& b) {
                   require(b.lower.size() == b.upper.size() && b.lower.size() > 0,
                           "box: bounds must have equal positive length");
                   for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
                     require(!std::isnan(b.lower[i]) && !std::isnan(b.upper[i]), "box: NaN bound");
                     require(b.lower[i] <= b.upper[i], "box: lower bound exceeds upper bound");
                     require(b.lower[i] < kInfinity && b.upper[i] > -kInfinity,
                             "box: empty coordinate interval");
                   }
                 },
                 [](const IndicatorBall& b) {
                   require(b.center.size() > 0, "ball: empty center");
                   require(b.center.allFinite(), "ball: center must be finite");
                   require(b.radius > 0 && std::isfinite(b.radius), "ball: radius must be positive");
                 },
                 [](const IndicatorHalfspaces& h) {
                   require(h.normals.rows() == h.offsets.size() && h.normals.rows() > 0,
                           "halfspaces: need one offset per normal");
                   require(h.normals.cols() > 0, "halfspaces: dimension must be positive");
                   require(h.normals.allFinite() && h.offsets.allFinite(),
                           "halfspaces: data must be finite");
                   for (Eigen::Index i = 0; i < h.normals.rows(); ++i) {
                     require(h.normals.row(i).norm() > 0, "halfspaces: zero normal");
                   }
                 }},
             c);
}

// ---- projections ----------------------------------------------------------

Vector project_box(const IndicatorBox& b, const Vector& x) {
  return x.cwiseMax(b.lower).cwiseMin(b.upper);
}

Vector project_ball(const IndicatorBall& b, const Vector& x) {
  const Vector d = x - b.center;
  const double n = d.norm();
  if (n <= b.radius) return x;
  return b.center + (b.radius / n) * d;
}

double halfspace_violation(const IndicatorHalfspaces& h, const Vector& z) {
  double worst = -kInfinity;
  for (Eigen::Index i = 0; i < h.normals.rows(); ++i) {
    worst = std::max(worst, (h.normals.row(i).dot(z) - h.offsets[i]) / h.normals.row(i).norm());
  }
  return worst;
}

// Exact projection onto {a_i . z = b_i, i in active} with a sign check on the
// multipliers; refines the Dykstra iterate to machine precision.
std::optional<Vector> polish_halfspaces(const IndicatorHalfspaces& h, const Vector& x,
                                        const std::vector<Eigen::Index>& active) {
  if (active.empty()) return std::nullopt;
  const auto k = static_cast<Eigen::Index>(active.size());
  Matrix a(k, h.normals.cols());
  Vector b(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    a.row(r) = h.normals.row(active[r]);
    b[r] = h.offsets[active[r]];
  }
  const Matrix gram = a * a.transpose();
  const Vector nu = gram.completeOrthogonalDecomposition().solve(a * x - b);
  if (nu.minCoeff() < -1e-12) return std::nullopt;
  Vector z = x - a.transpose() * nu;
  if (halfspace_violation(h, z) > kDomainTolerance) return std::nullopt;
  return z;
}

// Dykstra's alternating projection; for halfspaces this is Hildreth's dual
// coordinate ascent on the multipliers.
Vector project_halfspaces(const IndicatorHalfspaces& h, const Vector& x, const ProxOptions& opts) {
  if (halfspace_violation(h, x) <= 0.0) return x;
  const Eigen::Index n = h.normals.rows();
  Vector mu = Vector::Zero(n);
  Vector z = x;
  Vector norms2(n);
  for (Eigen::Index i = 0; i < n; ++i) norms2[i] = h.normals.row(i).squaredNorm();

  double change = kInfinity;
  double violation = kInfinity;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = h.normals.row(i).dot(z) - h.offsets[i];
      const double delta = std::max(-mu[i], v / norms2[i]);
      if (delta != 0.0) {
        mu[i] += delta;
        z -= delta * h.normals.row(i).transpose();
        change = std::max(change, std::abs(delta) * std::sqrt(norms2[i]));
      }
    }
    violation = halfspace_violation(h, z);
    if (change <= opts.tolerance && violation <= kDomainTolerance) {
      std::vector<Eigen::Index> active;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (mu[i] > 0.0) active.push_back(i);
      }
      if (auto polished = polish_halfspaces(h, x, active)) return *polished;
      return z;
    }
  }
  throw NumericalError("halfspace projection did not converge", std::max(change, violation));
}

Vector project_constraint(const Constraint& c, const Vector& x, const ProxOptions& opts) {
  return std::visit(
      Overloaded{[&](const IndicatorBox& b) { return project_box(b, x); },
                 [&](const IndicatorBall& b) { return project_ball(b, x); },
                 [&](const IndicatorHalfspaces& h) { return project_halfspaces(h, x, opts); }},
      c);
}

bool in_constraint(const Constraint& c, const Vector& x) {
  return std::visit(
      Overloaded{[&](const IndicatorBox& b) {
                   return ((b.lower - x).array() <= kDomainTolerance).all() &&
                          ((x - b.upper).array() <= kDomainTolerance).all();
                 },
                 [&](const IndicatorBall& b) {
                   return (x - b.center).norm() <= b.radius + kDomainTolerance;
                 },
                 [&](const IndicatorHalfspaces& h) {
                   return halfspace_violation(h, x) <= kDomainTolerance;
                 }},
      c);
}

double quadratic_value(const Quadratic& q, const Vector& x) {
  return 0.5 * x.dot(q.q * x) + q.c.dot(x);
}

double spectral_norm(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Vector prox_quadratic(const Quadratic& q, double lambda, const Vector& x) {
  const Eigen::Index m = x.size();
  const Matrix system = Matrix::Identity(m, m) + lambda * q.q;
  return system.ldlt().solve(x - lambda * q.c);
}

// Projected gradient on z -> 1/2|z - x|^2 + lambda q(z) over the constraint.
Vector prox_sum(const SumFunction& s, double lambda, const Vector& x, const ProxOptions& opts) {
  const double lipschitz = 1.0 + lambda * spectral_norm(s.smooth.q);
  const double step = 1.0 / lipschitz;
  const double stop = opts.tolerance * std::min(1.0, lambda);
  Vector z = project_constraint(s.constraint, x, opts);
  double change = kInfinity;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vector grad = (z - x) + lambda * (s.smooth.q * z + s.smooth.c);
    Vector next = project_constraint(s.constraint, z - step * grad, opts);
    change = (next - z).norm();
    z = std::move(next);
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + z.norm());
    if (change <= std::max(stop, floor)) return z;
  }
  throw NumericalError("proximal-gradient resolvent did not converge", change);
}

// Least-norm element of g + cone{a_i : i in active}.
Vector least_norm_in_cone(const IndicatorHalfspaces& h, const std::vector<Eigen::Index>& active,
                          const Vector& g) {
  if (active.empty()) return g;
  const auto k = static_cast<Eigen::Index>(active.size());
  Matrix a(k, g.size());
  for (Eigen::Index r = 0; r < k; ++r) a.row(r) = h.normals.row(active[r]);
  Vector mu = Vector::Zero(k);
  Vector r = g;
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double n2 = a.row(i).squaredNorm();
      const double next = std::max(0.0, mu[i] - a.row(i).dot(r) / n2);
      const double delta = next - mu[i];
      if (delta != 0.0) {
        mu[i] = next;
        r += delta * a.row(i).transpose();
        change = std::max(change, std::abs(delta) * std::sqrt(n2));
      }
    }
    if (change <= 1e-15 * (1.0 + g.norm())) break;
  }
  // Exact solve on the positive multipliers.
  std::vector<Eigen::Index> positive;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (mu[i] > 0.0) positive.push_back(i);
  }
  if (!positive.empty()) {
    const auto p = static_cast<Eigen::Index>(positive.size());
    Matrix ap(p, g.size());
    for (Eigen::Index i = 0; i < p; ++i) ap.row(i) = a.row(positive[i]);
    const Vector nu = (ap * ap.transpose()).completeOrthogonalDecomposition().solve(-ap * g);
    const Vector candidate = g + ap.transpose() * nu;
    const bool kkt = nu.minCoeff() >= -1e-12 &&
                     ((a * candidate).array() >= -1e-10 * (1.0 + g.norm())).all();
    if (kkt) return candidate;
  }
  return r;
}

std::vector<Eigen::Index> active_halfspaces(const IndicatorHalfspaces& h, const Vector& x) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < h.normals.rows(); ++i) {
    const double slack = (h.offsets[i] - h.normals.row(i).dot(x)) / h.normals.row(i).norm();
    if (slack <= kDomainTolerance) active.push_back(i);
  }
  return active;
}

// Least-norm element of g + N_C(x) for x in C.
Vector least_norm_with_normal_cone(const Constraint& c, const Vector& x, const Vector& g) {
  return std::visit(
      Overloaded{
          [&](const IndicatorBox& b) {
            Vector out = g;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              const bool at_lower = x[i] <= b.lower[i] + kDomainTolerance;
              const bool at_upper = x[i] >= b.upper[i] - kDomainTolerance;
              if (at_lower && at_upper) {
                out[i] = 0.0;
              } else if (at_lower) {
                out[i] = std::min(g[i], 0.0);
              } else if (at_upper) {
                out[i] = std::max(g[i], 0.0);
              }
            }
            return out;
          },
          [&](const IndicatorBall& b) {
            const Vector d = x - b.center;
            const double n = d.norm();
            if (n < b.radius - kDomainTolerance) return Vector(g);
            const Vector u = d / n;
            const double t = std::max(0.0, -g.dot(u));
            return Vector(g + t * u);
          },
          [&](const IndicatorHalfspaces& h) {
            return least_norm_in_cone(h, active_halfspaces(h, x), g);
          }},
      c);
}

// Certificate data for a constraint set: a point and a radius with B(a, c1) inside.
std::pair<Vector, double> constraint_certificate(const Constraint& c) {
  return std::visit(
      Overloaded{
          [](const IndicatorBox& b) {
            const Eigen::Index m = b.lower.size();
            Vector a(m);
            double radius = kInfinity;
            for (Eigen::Index i = 0; i < m; ++i) {
              const bool lo = std::isfinite(b.lower[i]);
              const bool hi = std::isfinite(b.upper[i]);
              if (lo && hi) {
                a[i] = 0.5 * (b.lower[i] + b.upper[i]);
                radius = std::min(radius, 0.25 * (b.upper[i] - b.lower[i]));
              } else if (lo) {
                a[i] = b.lower[i] + 1.0;
                radius = std::min(radius, 0.5);
              } else if (hi) {
                a[i] = b.upper[i] - 1.0;
                radius = std::min(radius, 0.5);
              } else {
                a[i] = 0.0;
              }
            }
            if (!std::isfinite(radius)) radius = 1.0;
            if (radius <= 0.0) throw UnsupportedError("box has empty interior");
            return std::pair{a, radius};
          },
          [](const IndicatorBall& b) { return std::pair{Vector(b.center), 0.5 * b.radius}; },
          [](const IndicatorHalfspaces& h) {
            // Project the origin onto the polyhedron shrunk by r; the largest
            // feasible r on a halving ladder gives B(a, r) inside the set.
            ProxOptions opts;
            opts.max_sweeps = 20000;
            for (double r = 1.0; r >= 0x1p-30; r *= 0.5) {
              IndicatorHalfspaces shrunk = h;
              for (Eigen::Index i = 0; i < h.normals.rows(); ++i) {
                shrunk.offsets[i] -= r * h.normals.row(i).norm();
              }
              try {
                Vector a = project_halfspaces(shrunk, Vector::Zero(h.normals.cols()), opts);
                if (halfspace_violation(shrunk, a) <= kDomainTolerance) {
                  return std::pair{a, 0.5 * r};
                }
              } catch (const NumericalError&) {
              }
            }
            throw UnsupportedError("polyhedron has empty interior");
          }},
      c);
}

}  // namespace

// ---- OperatorSpec -----------------------------------------------------------

OperatorSpec OperatorSpec::zero(int dim) {
  require(dim > 0, "zero: dimension must be positive");
  return {ZeroFunction{}, dim};
}

OperatorSpec OperatorSpec::quadratic(Matrix q, Vector c) {
  Quadratic quad{std::move(q), std::move(c)};
  validate_quadratic(quad);
  const int dim = static_cast<int>(quad.c.size());
  return {std::move(quad), dim};
}

OperatorSpec OperatorSpec::box(Vector lower, Vector upper) {
  IndicatorBox b{std::move(lower), std::move(upper)};
  validate_constraint(b);
  const int dim = static_cast<int>(b.lower.size());
  return {std::move(b), dim};
}

OperatorSpec OperatorSpec::ball(Vector center, double radius) {
  IndicatorBall b{std::move(center), radius};
  validate_constraint(b);
  const int dim = static_cast<int>(b.center.size());
  return {std::move(b), dim};
}

OperatorSpec OperatorSpec::halfspaces(Matrix normals, Vector offsets) {
  IndicatorHalfspaces h{std::move(normals), std::move(offsets)};
  validate_constraint(h);
  const int dim = static_cast<int>(h.normals.cols());
  return {std::move(h), dim};
}

OperatorSpec OperatorSpec::scaled_l1(int dim, double weight) {
  require(dim > 0, "scaled_l1: dimension must be positive");
  require(weight >= 0.0 && std::isfinite(weight), "scaled_l1: weight must be nonnegative");
  return {ScaledL1{weight}, dim};
}

OperatorSpec OperatorSpec::sum(Quadratic smooth, Constraint constraint) {
  validate_quadratic(smooth);
  validate_constraint(constraint);
  require(constraint_dim(constraint) == smooth.c.size(), "sum: parts have different dimensions");
  const int dim = static_cast<int>(smooth.c.size());
  return {SumFunction{std::move(smooth), std::move(constraint)}, dim};
}

std::string OperatorSpec::kind_name() const {
  return std::visit(Overloaded{[](const ZeroFunction&) { return "zero"; },
                               [](const Quadratic&) { return "quadratic"; },
                               [](const IndicatorBox&) { return "indicator_box"; },
                               [](const IndicatorBall&) { return "indicator_ball"; },
                               [](const IndicatorHalfspaces&) { return "indicator_halfspaces"; },
                               [](const ScaledL1&) { return "scaled_l1"; },
                               [](const SumFunction&) { return "sum"; }},
                    kind_);
}

bool OperatorSpec::has_constraint() const noexcept {
  return !std::holds_alternative<ZeroFunction>(kind_) && !std::holds_alternative<Quadratic>(kind_) &&
         !std::holds_alternative<ScaledL1>(kind_);
}

bool OperatorSpec::is_indicator() const noexcept {
  return std::holds_alternative<IndicatorBox>(kind_) || std::holds_alternative<IndicatorBall>(kind_) ||
         std::holds_alternative<IndicatorHalfspaces>(kind_);
}

// ---- operations -------------------------------------------------------------

double evaluate(const OperatorSpec& spec, const Vector& x) {
  check_dim(spec, x);
  return std::visit(
      Overloaded{[](const ZeroFunction&) { return 0.0; },
                 [&](const Quadratic& q) { return quadratic_value(q, x); },
                 [&](const IndicatorBox& b) { return in_constraint(b, x) ? 0.0 : kInfinity; },
                 [&](const IndicatorBall& b) { return in_constraint(b, x) ? 0.0 : kInfinity; },
                 [&](const IndicatorHalfspaces& h) { return in_constraint(h, x) ? 0.0 : kInfinity; },
                 [&](const ScaledL1& l) { return l.weight * x.lpNorm<1>(); },
                 [&](const SumFunction& s) {
                   return in_constraint(s.constraint, x) ? quadratic_value(s.smooth, x) : kInfinity;
                 }},
      spec.kind());
}

bool in_domain(const OperatorSpec& spec, const Vector& x) {
  return std::isfinite(evaluate(spec, x));
}

Vector project_domain(const OperatorSpec& spec, const Vector& x, const ProxOptions& opts) {
  check_dim(spec, x);
  return std::visit(
      Overloaded{[&](const IndicatorBox& b) { return project_box(b, x); },
                 [&](const IndicatorBall& b) { return project_ball(b, x); },
                 [&](const IndicatorHalfspaces& h) { return project_halfspaces(h, x, opts); },
                 [&](const SumFunction& s) { return project_constraint(s.constraint, x, opts); },
                 [&](const auto&) { return Vector(x); }},
      spec.kind());
}

double domain_distance(const OperatorSpec& spec, const Vector& x, const ProxOptions& opts) {
  return (x - project_domain(spec, x, opts)).norm();
}

Vector resolvent(const OperatorSpec& spec, double lambda, const Vector& x, const ProxOptions& opts) {
  check_dim(spec, x);
  require(lambda > 0.0 && std::isfinite(lambda), "resolvent: lambda must be positive");
  return std::visit(
      Overloaded{[&](const ZeroFunction&) { return Vector(x); },
                 [&](const Quadratic& q) { return prox_quadratic(q, lambda, x); },
                 [&](const IndicatorBox& b) { return project_box(b, x); },
                 [&](const IndicatorBall& b) { return project_ball(b, x); },
                 [&](const IndicatorHalfspaces& h) { return project_halfspaces(h, x, opts); },
                 [&](const ScaledL1& l) {
                   const double t = lambda * l.weight;
                   return Vector(x.array().sign() * (x.array().abs() - t).max(0.0));
                 },
                 [&](const SumFunction& s) { return prox_sum(s, lambda, x, opts); }},
      spec.kind());
}

Vector yosida(const OperatorSpec& spec, double lambda, const Vector& x, const ProxOptions& opts) {
  return (x - resolvent(spec, lambda, x, opts)) / lambda;
}

std::optional<Vector> minimal_section(const OperatorSpec& spec, const Vector& x) {
  check_dim(spec, x);
  const Eigen::Index m = x.size();
  return std::visit(
      Overloaded{
          [&](const ZeroFunction&) -> std::optional<Vector> { return Vector::Zero(m); },
          [&](const Quadratic& q) -> std::optional<Vector> { return Vector(q.q * x + q.c); },
          [&](const ScaledL1& l) -> std::optional<Vector> {
            return Vector(l.weight * x.array().sign());
          },
          [&](const SumFunction& s) -> std::optional<Vector> {
            if (!in_constraint(s.constraint, x)) return std::nullopt;
            return least_norm_with_normal_cone(s.constraint, x, s.smooth.q * x + s.smooth.c);
          },
          [&](const auto& indicator) -> std::optional<Vector> {
            if (!in_constraint(Constraint(indicator), x)) return std::nullopt;
            return Vector::Zero(m);
          }},
      spec.kind());
}

InteriorCertificate interior_certificate(const OperatorSpec& spec) {
  const Eigen::Index m = spec.dim();
  return std::visit(
      Overloaded{
          [&](const ZeroFunction&) { return InteriorCertificate{Vector::Zero(m), 1.0, 0.0}; },
          [&](const Quadratic& q) {
            return InteriorCertificate{Vector::Zero(m), 1.0, q.c.norm() + spectral_norm(q.q)};
          },
          [&](const ScaledL1& l) {
            return InteriorCertificate{Vector::Zero(m), 1.0, l.weight * std::sqrt(double(m))};
          },
          [&](const SumFunction& s) {
            auto [a, c1] = constraint_certificate(s.constraint);
            const double c2 = (s.smooth.q * a + s.smooth.c).norm() + spectral_norm(s.smooth.q) * c1;
            return InteriorCertificate{a, c1, c2};
          },
          [&](const auto& indicator) {
            auto [a, c1] = constraint_certificate(Constraint(indicator));
            return InteriorCertificate{a, c1, 0.0};
          }},
      spec.kind());
}

namespace {

struct ConstraintSample {
  Vector alpha;
  Vector normal;
};

// A point of the constraint set and an element of its normal cone. Boundary
// samples project an exterior point p, so p - P(p) is an outward normal.
ConstraintSample sample_constraint(const Constraint& c, const Vector& centre, Engine& engine) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> spread(-3.0, 3.0);
  const Eigen::Index m = centre.size();
  const bool want_boundary = unit(engine) < 0.3;
  ProxOptions opts;
  auto random_point = [&] {
    Vector p(m);
    for (Eigen::Index i = 0; i < m; ++i) p[i] = centre[i] + spread(engine);
    return p;
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector p = random_point();
    const bool inside = in_constraint(c, p);
    if (want_boundary && !inside) {
      Vector alpha = project_constraint(c, p, opts);
      const Vector dir = p - alpha;
      const double magnitude = 10.0 * unit(engine);
      return {alpha, (magnitude / dir.norm()) * dir};
    }
    if (!want_boundary && inside) return {p, Vector::Zero(m)};
  }
  return {centre, Vector::Zero(m)};
}

}  // namespace

std::vector<GraphPair> sample_graph(const OperatorSpec& spec, int count, std::uint64_t seed) {
  require(count >= 1, "sample_graph: count must be at least 1");
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> spread(-3.0, 3.0);
  const Eigen::Index m = spec.dim();
  const InteriorCertificate cert = interior_certificate(spec);
  auto free_point = [&] {
    Vector p(m);
    for (Eigen::Index i = 0; i < m; ++i) p[i] = spread(engine);
    return p;
  };

  std::vector<GraphPair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    GraphPair pair = std::visit(
        Overloaded{
            [&](const ZeroFunction&) { return GraphPair{free_point(), Vector::Zero(m)}; },
            [&](const Quadratic& q) {
              Vector a = free_point();
              Vector b = q.q * a + q.c;
              return GraphPair{std::move(a), std::move(b)};
            },
            [&](const ScaledL1& l) {
              Vector a = free_point();
              Vector b(m);
              for (Eigen::Index i = 0; i < m; ++i) {
                if (unit(engine) < 0.3) {
                  a[i] = 0.0;
                  b[i] = l.weight * (2.0 * unit(engine) - 1.0);
                } else {
                  b[i] = a[i] > 0 ? l.weight : -l.weight;
                }
              }
              return GraphPair{std::move(a), std::move(b)};
            },
            [&](const SumFunction& s) {
              auto [a, n] = sample_constraint(s.constraint, cert.a, engine);
              Vector b = s.smooth.q * a + s.smooth.c + n;
              return GraphPair{std::move(a), std::move(b)};
            },
            [&](const auto& indicator) {
              auto [a, n] = sample_constraint(Constraint(indicator), cert.a, engine);
              return GraphPair{std::move(a), std::move(n)};
            }},
        spec.kind());
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace svilab

namespace svilab {

OperatorLawReport check_operator_laws(const OperatorSpec& spec, int cases, std::uint64_t seed) {
  require(cases >= 1, "check_operator_laws: cases must be positive");
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> spread(-3.0, 3.0);
  std::uniform_real_distribution<double> log_lambda(-3.0, 1.0);
  const Eigen::Index m = spec.dim();
  const Vector centre = interior_certificate(spec).a;
  auto point = [&] {
    Vector p(m);
    for (Eigen::Index i = 0; i < m; ++i) p[i] = centre[i] + spread(engine);
    return p;
  };
  const std::vector<GraphPair> graph = sample_graph(spec, cases, seed ^ 0x9e3779b97f4a7c15ULL);

  OperatorLawReport r;
  r.cases = cases;
  r.monotone_deficit = -kInfinity;
  r.nonexpansive_excess = -kInfinity;
  r.lipschitz_excess = -kInfinity;
  for (int k = 0; k < cases; ++k) {
    const Vector x = point();
    const Vector y = point();
    const double lambda = std::pow(10.0, log_lambda(engine));
    const Vector jx = resolvent(spec, lambda, x);
    const Vector jy = resolvent(spec, lambda, y);
    const Vector ax = (x - jx) / lambda;
    const Vector ay = (y - jy) / lambda;
    const double gap = (x - y).norm();
    r.nonexpansive_excess = std::max(r.nonexpansive_excess, (jx - jy).norm() - gap);
    r.lipschitz_excess = std::max(r.lipschitz_excess, (ax - ay).norm() - gap / lambda);
    r.monotone_deficit = std::max(r.monotone_deficit, -(ax - ay).dot(x - y));
    r.moreau_error = std::max(r.moreau_error, (x - jx - lambda * yosida(spec, lambda, x)).norm());

    // Along lambda = 10^0, 10^-1, ..., 10^-8 at a point of D(A).
    const Vector& a = graph[static_cast<std::size_t>(k)].alpha;
    const std::optional<Vector> section = minimal_section(spec, a);
    if (!section) continue;
    double previous = 0.0;
    for (int e = 0; e <= 8; ++e) {
      const double lambda = std::pow(10.0, -e);
      const double norm = yosida(spec, lambda, a).norm();
      // (x - J x) / lambda loses about eps |x| / lambda to cancellation.
      const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + a.norm()) / lambda;
      r.norm_decrease = std::max(r.norm_decrease, (previous - norm - roundoff) / (1.0 + previous));
      previous = norm;
    }
    r.section_gap = std::max(r.section_gap, std::abs(previous - section->norm()));
  }
  return r;
}

}  // namespace svilab
