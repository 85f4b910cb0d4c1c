#include "support.hpp"

#include "svilab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace svilab;
using namespace svilab::testing;

namespace {

GridPath constant_forcing(double dt, int steps, const Vector& c) { return GridPath::constant(dt, steps, c); }

// Reflected downward ramp: phi = indicator of [0, inf), b = 0, sigma = 1, h(t) = -t, x = 0.5.
SkeletonInput ramp_input(double step, double horizon = 1.0) {
  const int steps = static_cast<int>(std::lround(horizon / step));
  return {half_line(), GridPath::sample(step, steps, 1, [](double t) { return vec({-t}); }), vec({0.5}),
          Drift::zero(1), Dispersion::constant(mat({{1.0}}))};
}

// Smooth control in R^2 and bounded coefficients for two-dimensional catalog problems.
SkeletonInput catalog_input(const OperatorSpec& spec, double step) {
  const int steps = static_cast<int>(std::lround(1.0 / step));
  const GridPath h = GridPath::sample(step, steps, 2, [](double t) {
    return vec({std::sin(3 * t) + 0.5 * t, 1.5 * std::cos(2 * t) - 1.5});
  });
  const auto cert = interior_certificate(spec);
  return {spec, h, project_domain(spec, cert.a + vec({0.3, -0.2})),
          Drift::tanh(mat({{1.0, 0.5}, {-0.3, 2.0}}), mat({{0.7, -1.1}, {0.4, 0.9}}), vec({0.2, -0.3})),
          Dispersion::sine(mat({{1.0, 0.0}, {0.1, 0.8}}), mat({{0.5, 0.3}, {0.4, 0.0}}),
                           mat({{1.0, -0.5}, {0.3, 2.0}}))};
}

GridPath random_forcing(double dt, int steps, std::uint64_t seed) {
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  const double a = amp(engine), b = amp(engine), c = amp(engine), d = amp(engine);
  return GridPath::sample(dt, steps, 2, [=](double t) {
    return vec({a * std::sin(5 * t) + b, c * std::cos(3 * t) + d});
  });
}

}  // namespace

TEST_CASE("solve_dvi examples") {
  const double step = 1.0 / 64;
  SUBCASE("free motion integrates the forcing exactly") {
    const DviProblem p{OperatorSpec::zero(2), constant_forcing(step, 64, vec({1.0, -0.5})), vec({0.2, 0.3}), 1.0};
    const GridPath u = solve_dvi(p, step);
    for (int k = 0; k <= 64; ++k) {
      CHECK((u.node(k) - (vec({0.2, 0.3}) + k * step * vec({1.0, -0.5}))).norm() <= 1e-14);
    }
  }
  SUBCASE("absorption at the boundary of the half-line") {
    const DviProblem p{half_line(), constant_forcing(step, 128, vec({-1.0})), vec({1.0}), 2.0};
    const GridPath u = solve_dvi(p, step);
    for (int k = 0; k <= 128; ++k) CHECK(std::abs(u.node(k)[0] - std::max(1.0 - k * step, 0.0)) <= step);
  }
  SUBCASE("linear decay under the quadratic") {
    const DviProblem p{OperatorSpec::quadratic(mat({{1.0}}), vec({0.0})), constant_forcing(step, 64, vec({0.0})),
                       vec({1.0}), 1.0};
    const GridPath u = solve_dvi(p, step);
    CHECK(std::abs(u.node(64)[0] - std::exp(-1.0)) <= 2 * step);
  }
  SUBCASE("input errors") {
    CHECK_THROWS_AS(solve_dvi({half_line(), constant_forcing(step, 64, vec({0.0})), vec({-1.0}), 1.0}, step),
                    InputError);
    CHECK_THROWS_AS(solve_dvi({half_line(), constant_forcing(step, 64, vec({0.0})), vec({1.0}), 1.0}, 0.3),
                    InputError);
  }
}

TEST_CASE("Brezis energy examples") {
  const double step = 1.0 / 256;
  {
    const DviProblem p{OperatorSpec::zero(1), constant_forcing(step, 256, vec({2.0})), vec({0.0}), 1.0};
    const EnergyReport r = brezis_energy_check(p, solve_dvi(p, step));
    CHECK(r.lhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.pass);
  }
  {
    const DviProblem p{half_line(), constant_forcing(step, 512, vec({-1.0})), vec({1.0}), 2.0};
    const EnergyReport r = brezis_energy_check(p, solve_dvi(p, step));
    CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.pass);
  }
  {
    const DviProblem p{OperatorSpec::quadratic(mat({{1.0}}), vec({0.0})), constant_forcing(step, 256, vec({0.0})),
                       vec({1.0}), 1.0};
    const EnergyReport r = brezis_energy_check(p, solve_dvi(p, step));
    CHECK(r.lhs == doctest::Approx(std::sqrt((1 - std::exp(-2.0)) / 2)).epsilon(1e-2));
    CHECK(r.rhs == doctest::Approx(std::sqrt(0.5)));
    CHECK(r.pass);
  }
}

TEST_CASE("Brezis energy holds on randomized catalog problems") {
  const double step = 1.0 / 128;
  const std::vector<OperatorSpec> specs = catalog();
  for (int n = 0; n < 100; ++n) {
    const OperatorSpec& spec = specs[static_cast<std::size_t>(n) % specs.size()];
    const Vector u0 = sample_graph(spec, 1, static_cast<std::uint64_t>(n))[0].alpha;
    const DviProblem p{spec, random_forcing(step, 128, static_cast<std::uint64_t>(n)), u0, 1.0};
    const GridPath u = solve_dvi(p, step);
    const EnergyReport r = brezis_energy_check(p, u);
    INFO(spec.kind_name(), " lhs ", r.lhs, " rhs ", r.rhs);
    CHECK(r.pass);
    for (int k = 1; k <= u.steps(); ++k) CHECK(domain_distance(spec, u.node(k)) <= 1e-10);
  }
}

TEST_CASE("step halving convergence") {
  auto ratios = [](const OperatorSpec& spec, const Vector& u0) {
    const GridPath forcing = GridPath::sample(1.0 / 2048, 2048, 1, [](double t) {
      return vec({-2.0 + 3.0 * std::sin(6 * t)});
    });
    std::vector<double> gaps;
    GridPath previous;
    for (int e = 5; e <= 9; ++e) {
      const double step = std::ldexp(1.0, -e);
      const GridPath u = solve_dvi({spec, forcing, u0, 1.0}, step);
      if (e > 5) gaps.push_back(sup_distance(resample(u, previous.dt()), previous, 1.0));
      previous = u;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i) out.push_back(gaps[i] / gaps[i + 1]);
    return out;
  };
  for (double r : ratios(OperatorSpec::quadratic(mat({{1.0}}), vec({0.5})), vec({1.0}))) CHECK(r >= 1.5);
  for (double r : ratios(OperatorSpec::box(vec({-0.5}), vec({0.5})), vec({0.2}))) CHECK(r >= 1.2);
}

TEST_CASE("skeleton examples") {
  SUBCASE("zero control reduces to solve_dvi") {
    const double step = 1.0 / 128;
    const SkeletonInput in{half_line(), GridPath::constant(step, 128, vec({0.0, 0.0})), vec({1.0}),
                           Drift::constant(vec({-1.5})), Dispersion::constant(mat({{1.0, 2.0}}))};
    const SkeletonPair s = skeleton(in, step);
    const GridPath u = solve_dvi({half_line(), constant_forcing(step, 128, vec({-1.5})), vec({1.0}), 1.0}, step);
    CHECK(sup_distance(s.xi, u, 1.0) <= 1e-14);
  }
  SUBCASE("exponential growth along h(t) = t") {
    for (double step : {1.0 / 64, 1.0 / 256}) {
      const int steps = static_cast<int>(1.0 / step);
      const SkeletonInput in{OperatorSpec::zero(1), GridPath::sample(step, steps, 1, [](double t) { return vec({t}); }),
                             vec({0.7}), Drift::zero(1), Dispersion::scalar_linear(1.0)};
      const SkeletonPair s = skeleton(in, step);
      CHECK(std::abs(s.xi.node(steps)[0] / (0.7 * std::exp(1.0)) - 1) <= 10 * step * step);
      CHECK(sup_norm(s.eta) <= 1e-14);
    }
  }
  SUBCASE("reflected downward ramp") {
    const double step = 1.0 / 1024;
    const SkeletonPair s = skeleton(ramp_input(step), step);
    for (int k = 0; k <= 1024; ++k) {
      const double t = k * step;
      CHECK(std::abs(s.xi.node(k)[0] - std::max(0.5 - t, 0.0)) <= 1e-12);
      // K sign convention: the boundary pushes up, so eta decreases while in contact.
      CHECK(std::abs(s.eta.node(k)[0] + std::max(t - 0.5, 0.0)) <= 1e-12);
    }
    CHECK(s.recovery_defect <= 1e-13);
  }
}

TEST_CASE("validate_flow examples") {
  const double step = 1.0 / 256;
  {
    const GridPath u = GridPath::sample(step, 256, 2, [](double t) { return vec({t, -t}); });
    const GridPath g = GridPath::constant(step, 256, vec({0.0, 0.0}));
    CHECK(validate_flow(OperatorSpec::zero(2), u, g, sample_graph(OperatorSpec::zero(2), 20, 1)) == 0.0);
  }
  const SkeletonPair s = skeleton(ramp_input(step), step);
  const auto pairs = sample_graph(half_line(), 200, 2);
  CHECK(validate_flow(half_line(), s.xi, s.eta, pairs) >= -1e-8);
  GridPath corrupted = s.eta;
  corrupted.values() *= -1.0;
  CHECK(validate_flow(half_line(), s.xi, corrupted, pairs) < -0.1);
}

TEST_CASE("skeleton outputs satisfy feasibility, flow and the interior inequality") {
  const double step = 1.0 / 256;
  for (const OperatorSpec& spec : catalog()) {
    const SkeletonPair s = skeleton(catalog_input(spec, step), step);
    INFO(spec.kind_name());
    for (int k = 1; k <= s.xi.steps(); ++k) CHECK(domain_distance(spec, s.xi.node(k)) <= 1e-10);
    CHECK(s.recovery_defect <= 1e-12);
    CHECK(validate_flow(spec, s.xi, s.eta, sample_graph(spec, 100, 3)) >= -1e-6);
    CHECK(interior_inequality_slack(s.xi, s.eta, interior_certificate(spec)) >= -1e-6);
  }
}

TEST_CASE("interior inequality on random sub-intervals of the ramp") {
  const double step = 1.0 / 512;
  const SkeletonPair s = skeleton(ramp_input(step, 2.0), step);
  const auto cert = interior_certificate(half_line());
  const Vector tv = running_variation(s.eta);
  Engine engine = make_engine(13);
  std::uniform_int_distribution<int> pick(0, s.xi.steps());
  for (int n = 0; n < 200; ++n) {
    int a = pick(engine), b = pick(engine);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    double lhs = 0.0, spread = 0.0;
    for (int k = a; k < b; ++k) {
      lhs += (s.xi.node(k + 1) - cert.a).dot(s.eta.node(k + 1) - s.eta.node(k));
      spread += (s.xi.node(k + 1) - cert.a).norm() * step;
    }
    const double rhs = cert.c1 * (tv[b] - tv[a]) - cert.c2 * spread - cert.c1 * cert.c2 * (b - a) * step;
    CHECK(lhs >= rhs - 1e-6);
  }
}
