#include "support.hpp"

#include "svilab/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace svilab;
using namespace svilab::testing;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SviProblem geometric(double x) {
  return {OperatorSpec::zero(1), Drift::zero(1), Dispersion::scalar_linear(1.0), vec({x}), 1.0};
}

DyadicDriver linear_driver(int level, const Vector& slope) {
  const double dt = std::ldexp(1.0, -level);
  return {level, GridPath::sample(dt, 1 << level, static_cast<int>(slope.size()),
                                  [&](double t) { return Vector(slope * t); })};
}

}  // namespace

TEST_CASE("driver generation") {
  const DyadicDriver a = generate_driver(2, 1.0, 8, 42);
  const DyadicDriver b = generate_driver(2, 1.0, 8, 42);
  CHECK(a.w.values() == b.w.values());
  CHECK(a.w.node(0).norm() == 0.0);
  CHECK(a.w.steps() == 256);
  CHECK(a.dt() == std::ldexp(1.0, -8));
  CHECK(generate_driver(1, 2.0, 4, 1).dt() == 2.0 / 16);
  CHECK(generate_driver(2, 1.0, 8, 43).w.values() != a.w.values());
  CHECK_THROWS_AS(generate_driver(1, 1.0, kMaxDriverLevel + 1, 1), InputError);
  CHECK_THROWS_AS(generate_driver(0, 1.0, 4, 1), InputError);
}

TEST_CASE("driver statistics over 10000 seeds") {
  const int seeds = 10000;
  const int level = 4;
  const double horizon = 1.0;
  const double dt = horizon / 16;
  double sum_end = 0.0;
  double sum_sq = 0.0;
  long count = 0;
  for (int s = 0; s < seeds; ++s) {
    const DyadicDriver d = generate_driver(1, horizon, level, derive_seed(7, static_cast<std::uint64_t>(s)));
    sum_end += d.w.node(d.w.steps())[0];
    for (int k = 0; k < d.w.steps(); ++k) {
      const double inc = d.w.node(k + 1)[0] - d.w.node(k)[0];
      sum_sq += inc * inc;
      ++count;
    }
  }
  CHECK(std::abs(sum_end / seeds) <= 4 * std::sqrt(horizon / seeds));
  CHECK(std::abs(sum_sq / count / dt - 1) <= 0.05);
}

TEST_CASE("coarsened drivers") {
  SUBCASE("linear paths are fixed") {
    const DyadicDriver d = linear_driver(8, vec({0.5, -2.0}));
    for (int n = 0; n <= 8; ++n) {
      const GridPath wn = piecewise_linear_driver(d, n, d.dt());
      CHECK(sup_distance(wn, d.w, 1.0) <= 1e-15);
      const CoarseDriver c = coarsen_driver(d, n);
      for (int k = 0; k <= c.slope.steps(); ++k) CHECK((c.slope.node(k) - vec({0.5, -2.0})).norm() <= 1e-12);
    }
  }
  SUBCASE("finest level is the identity") {
    const DyadicDriver d = generate_driver(2, 1.0, 8, 3);
    CHECK(piecewise_linear_driver(d, 8, d.dt()).values() == d.w.values());
    CHECK(coarsen_driver(d, 8).path.values() == d.w.values());
  }
  SUBCASE("interpolation at dyadic nodes and consistency across levels") {
    const DyadicDriver d = generate_driver(2, 2.0, 10, 4);
    for (int n = 0; n < 10; ++n) {
      const CoarseDriver c = coarsen_driver(d, n);
      const CoarseDriver next = coarsen_driver(d, n + 1);
      const int stride = 1 << (10 - n);
      for (int k = 0; k <= c.path.steps(); ++k) {
        CHECK(c.path.node(k) == d.w.node(k * stride));
        CHECK(next.path.node(2 * k) == c.path.node(k));
      }
      for (int k = 0; k < c.path.steps(); ++k) {
        const Vector expected = (c.path.node(k + 1) - c.path.node(k)) / c.path.dt();
        CHECK((c.slope.node(k) - expected).norm() <= 1e-12 * (1 + expected.norm()));
      }
      const GridPath wn = piecewise_linear_driver(d, n, d.dt());
      for (int k = 0; k <= c.path.steps(); ++k) CHECK(wn.node(k * stride) == d.w.node(k * stride));
    }
    CHECK_THROWS_AS(coarsen_driver(d, 11), InputError);
  }
  SUBCASE("restriction observes the same path") {
    const DyadicDriver d = generate_driver(1, 1.0, 10, 5);
    const DyadicDriver r = restrict_driver(d, 6);
    for (int k = 0; k <= 64; ++k) CHECK(r.w.node(k) == d.w.node(16 * k));
  }
}

TEST_CASE("Skorokhod oracle examples") {
  const GridPath zero = GridPath::constant(0.01, 100, vec({0.0}));
  const SolutionPair still = skorokhod_oracle(0.7, zero);
  CHECK(sup_distance(still.x, GridPath::constant(0.01, 100, vec({0.7})), 1.0) == 0.0);
  CHECK(sup_norm(still.k) == 0.0);

  const GridPath ramp = GridPath::sample(0.01, 100, 1, [](double t) { return vec({-t}); });
  const SolutionPair pinned = skorokhod_oracle(0.0, ramp);
  CHECK(sup_norm(pinned.x) == 0.0);
  CHECK(sup_distance(pinned.k, ramp, 1.0) <= 1e-15);
  CHECK(pinned.tv_k == doctest::Approx(1.0));
  CHECK_THROWS_AS(skorokhod_oracle(-0.1, ramp), InputError);
}

TEST_CASE("Skorokhod oracle equals the projection recursion") {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const DyadicDriver d = generate_driver(1, 1.0, 7, derive_seed(11, s));
    const double x = 0.3 * static_cast<double>(s % 4);
    const SolutionPair o = skorokhod_oracle(x, d.w);
    double state = x;
    double worst = 0.0;
    for (int k = 0; k < d.w.steps(); ++k) {
      state = std::max(state + d.w.node(k + 1)[0] - d.w.node(k)[0], 0.0);
      worst = std::max(worst, std::abs(state - o.x.node(k + 1)[0]));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("Wong-Zakai solutions in the reflected case are the discrete Skorokhod map") {
  const SviProblem p = reflected_bm(0.2);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DyadicDriver d = generate_driver(1, 1.0, 10, derive_seed(12, s));
    for (int n : {3, 6, 10}) {
      const SolutionPair sol = wong_zakai_solve(p, d, n, d.dt());
      const SolutionPair o = skorokhod_oracle(0.2, piecewise_linear_driver(d, n, d.dt()));
      CHECK(sup_distance(sol.x, o.x, 1.0) <= 1e-10);
      CHECK(sup_distance(sol.k, o.k, 1.0) <= 1e-10);
      CHECK(sol.k.node(0).norm() == 0.0);
    }
    const SolutionPair ref = reference_solve(p, d);
    CHECK(sup_distance(ref.x, skorokhod_oracle(0.2, d.w).x, 1.0) <= 1e-10);
  }
}

TEST_CASE("noise-free problems reduce to solve_dvi") {
  const SviProblem p{half_line(), Drift::constant(vec({-1.0})), Dispersion::zero(1, 1), vec({0.5}), 1.0};
  const DyadicDriver d = generate_driver(1, 1.0, 8, 1);
  const SolutionPair sol = wong_zakai_solve(p, d, 4, d.dt());
  const GridPath u = solve_dvi({half_line(), GridPath::constant(d.dt(), 256, vec({-1.0})), vec({0.5}), 1.0}, d.dt());
  CHECK(sup_distance(sol.x, u, 1.0) == 0.0);
}

TEST_CASE("Doss closed form for piecewise-linear drivers") {
  const SviProblem p = geometric(0.8);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DyadicDriver d = generate_driver(1, 1.0, 10, derive_seed(13, s));
    for (int n : {2, 5, 8}) {
      const SolutionPair sol = wong_zakai_solve(p, d, n, d.dt());
      const double wn_end = d.w.node(d.w.steps())[0];
      const double exact = 0.8 * std::exp(wn_end);
      CHECK(std::abs(sol.x.node(sol.x.steps())[0] / exact - 1) <= 1e-3);
      CHECK(sup_norm(sol.k) <= 1e-12);
    }
  }
}

TEST_CASE("reference solution self-convergence and the Stratonovich chain rule") {
  const SviProblem p = geometric(1.0);
  std::vector<double> coarse, fine, chain;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const DyadicDriver d = generate_driver(1, 1.0, 12, derive_seed(14, s));
    const DyadicDriver r = restrict_driver(d, 10);
    const double exact = std::exp(d.w.node(d.w.steps())[0]);
    fine.push_back(std::abs(reference_solve(p, d).x.node(d.w.steps())[0] - exact));
    const SolutionPair ref = reference_solve(p, r);
    coarse.push_back(std::abs(ref.x.node(r.w.steps())[0] - exact));
    double worst = 0.0;
    for (int k = 0; k <= r.w.steps(); ++k) worst = std::max(worst, std::abs(std::log(ref.x.node(k)[0]) - r.w.node(k)[0]));
    chain.push_back(worst);
  }
  CHECK(median(fine) <= 0.5 * median(coarse));
  CHECK(median(chain) <= 10 * std::ldexp(1.0, -5));
}

TEST_CASE("solution validation") {
  const SviProblem p = reflected_bm(0.0);
  const auto pairs = sample_graph(p.spec, 100, 1);
  const auto cert = interior_certificate(p.spec);
  SUBCASE("oracle solutions pass every clause") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const DyadicDriver d = generate_driver(1, 1.0, 12, derive_seed(15, s));
      const ValidationReport v = validate_solution(p, skorokhod_oracle(0.0, d.w), d.w, pairs, cert);
      CHECK(v.all_pass());
      CHECK(v.dynamics_residual <= 1e-12);
    }
  }
  SUBCASE("dropping K breaks the dynamics") {
    const GridPath ramp = GridPath::sample(1.0 / 4096, 4096, 1, [](double t) { return vec({-t}); });
    SolutionPair o = skorokhod_oracle(0.0, ramp);
    o.k.values().setZero();
    o.tv_k = 0.0;
    const ValidationReport v = validate_solution(p, o, ramp, pairs, cert);
    CHECK_FALSE(v.dynamics_ok);
    CHECK_FALSE(v.all_pass());
  }
  SUBCASE("free motion with K = 0 passes") {
    const SviProblem free{OperatorSpec::zero(1), Drift::zero(1), Dispersion::constant(mat({{1.0}})), vec({0.3}), 1.0};
    const DyadicDriver d = generate_driver(1, 1.0, 10, 2);
    const SolutionPair sol{GridPath(d.dt(), d.w.values().array() + 0.3), GridPath::constant(d.dt(), 1024, vec({0.0})),
                           0.0, 0.0};
    CHECK(validate_solution(free, sol, d.w, sample_graph(free.spec, 50, 1),
                            interior_certificate(free.spec)).all_pass());
  }
}

TEST_CASE("reference solutions validate on two-dimensional catalog problems") {
  for (const OperatorSpec& spec : catalog()) {
    const auto cert = interior_certificate(spec);
    const SviProblem p{spec, Drift::tanh(mat({{1.0, 0.5}, {-0.3, 1.0}}), mat({{0.7, -1.1}, {0.4, 0.9}}), vec({0.2, -0.3})),
                       Dispersion::sine(mat({{1.0, 0.0}, {0.1, 0.8}}), mat({{0.3, 0.2}, {0.2, 0.0}}),
                                        mat({{1.0, -0.5}, {0.3, 2.0}})),
                       project_domain(spec, cert.a), 1.0};
    const DyadicDriver d = generate_driver(2, 1.0, 10, 16);
    const SolutionPair sol = reference_solve(p, d);
    const ValidationReport v = validate_solution(p, sol, d.w, sample_graph(spec, 50, 2), cert);
    INFO(spec.kind_name(), " residual ", v.dynamics_residual, " budget ", v.dynamics_budget, " flow ", v.flow_slack,
         " interior ", v.interior_slack);
    CHECK(v.all_pass());
    CHECK(sol.k.node(0).norm() == 0.0);
  }
}

TEST_CASE("comparison principle for reflected solutions") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DyadicDriver d = generate_driver(1, 1.0, 8, derive_seed(17, s));
    const SolutionPair low = reference_solve(reflected_bm(0.1), d);
    const SolutionPair high = reference_solve(reflected_bm(0.4), d);
    bool ordered = true;
    for (int k = 0; k <= d.w.steps(); ++k) ordered = ordered && low.x.node(k)[0] <= high.x.node(k)[0];
    CHECK(ordered);
  }
}

TEST_CASE("problem validation") {
  CHECK_NOTHROW(reflected_bm(0.0).validate());
  CHECK_THROWS_AS(reflected_bm(-0.5).validate(), InputError);
  const SviProblem mismatch{half_line(), Drift::zero(2), Dispersion::constant(mat({{1.0}})), vec({0.5}), 1.0};
  CHECK_THROWS_AS(mismatch.validate(), InputError);
}
