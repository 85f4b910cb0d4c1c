#include "support.hpp"

#include "svilab/experiments.hpp"
#include "svilab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace svilab;
using namespace svilab::testing;

namespace {

// Frozen from tests/oracles/small_ball_series.py: P(sup_{t<=1} |w(t)| < eps).
struct SeriesValue {
  double eps;
  double p;
};
constexpr SeriesValue kSmallBallSeries[] = {
    {0.45, 0.0028776424}, {0.5, 0.0091569903}, {0.6, 0.0413624631}, {0.8, 0.1852419073}, {1.0, 0.3707774298}};

LimitTheoremConfig small_limit_config(SviProblem p) {
  return {std::move(p), {2, 4, 6}, 8, 0.1, 40};
}

SviProblem deterministic_problem() {
  return {OperatorSpec::box(vec({-1.0}), vec({1.0})), Drift::linear(mat({{-1.0}}), vec({0.8})),
          Dispersion::zero(1, 1), vec({0.3}), 1.0};
}

}  // namespace

TEST_CASE("binomial confidence") {
  CHECK(binomial_half_width(50, 100) == doctest::Approx(1.96 * 0.05));
  CHECK(binomial_half_width(0, 100) == doctest::Approx(0.03));
  CHECK(binomial_half_width(100, 100) == doctest::Approx(0.03));
  const Cell small = binomial_cell("a", {}, 3, 40);
  CHECK(small.underpowered);
  CHECK(small.estimate == doctest::Approx(0.075));
  CHECK_FALSE(binomial_cell("b", {}, 0, 50).underpowered);
}

TEST_CASE("least squares") {
  const LinearFit exact = least_squares({1, 2, 3, 4}, {1, 3, 5, 7});
  CHECK(exact.slope == doctest::Approx(2.0));
  CHECK(exact.intercept == doctest::Approx(-1.0));
  CHECK(exact.r_squared == doctest::Approx(1.0));
  CHECK(exact.points == 4);
  const LinearFit noisy = least_squares({0, 1, 2, 3}, {0, 1.1, 1.9, 3.2});
  CHECK(noisy.r_squared < 1.0);
  CHECK(noisy.r_squared > 0.95);
}

TEST_CASE("bridge survival against closed forms") {
  // One barrier: 1 - exp(-2 (a - L)(b - L) / t).
  for (double t : {0.1, 1.0}) {
    for (double a : {0.05, 0.5}) {
      for (double b : {0.1, 0.7}) {
        CHECK(bridge_survival(a, b, 0.0, 1e6, t) == doctest::Approx(1 - std::exp(-2 * a * b / t)).epsilon(1e-12));
      }
    }
  }
  CHECK(bridge_survival(1.5, 0.0, -1.0, 1.0, 0.1) == 0.0);
  CHECK(bridge_survival(0.0, 0.0, -1.0, 1.0, 1e-8) == doctest::Approx(1.0));
}

TEST_CASE("bridge survival integrated over the endpoint reproduces the small-ball series") {
  // P(sup |w| < eps) = int phi(b) P(bridge 0 -> b stays in (-eps, eps)) db.
  for (const SeriesValue& s : kSmallBallSeries) {
    const int n = 4000;
    const double h = 2 * s.eps / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double b = -s.eps + i * h;
      const double f = std::exp(-0.5 * b * b) / std::sqrt(2 * M_PI) * bridge_survival(0.0, b, -s.eps, s.eps, 1.0);
      sum += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * f;
    }
    CHECK(sum * h / 3 == doctest::Approx(s.p).epsilon(1e-8));
  }
}

TEST_CASE("bridge survival against simulated bridges") {
  Engine engine = make_engine(31);
  std::normal_distribution<double> normal;
  const int steps = 2000;
  const int paths = 4000;
  const double a = 0.2, b = -0.3, lower = -0.6, upper = 0.5, t = 0.5;
  int survived = 0;
  std::vector<double> w(steps + 1);
  for (int n = 0; n < paths; ++n) {
    w[0] = 0.0;
    for (int k = 0; k < steps; ++k) w[k + 1] = w[k] + normal(engine) * std::sqrt(t / steps);
    bool inside = true;
    for (int k = 0; k <= steps && inside; ++k) {
      const double s = k * t / steps;
      const double x = a + w[k] - s / t * w[steps] + s / t * (b - a);
      inside = x > lower && x < upper;
    }
    survived += inside;
  }
  const double p = static_cast<double>(survived) / paths;
  // The grid sees slightly more survivals than continuous time; allow for it above.
  CHECK(std::abs(p - bridge_survival(a, b, lower, upper, t)) <= 3 * binomial_half_width(survived, paths) + 0.02);
}

TEST_CASE("small-ball study") {
  const SmallBallConfig c{1, 1.0, {0.8, 100.0}, 40000, 10};
  const ExperimentReport r = small_ball_study(c, {5, 1});
  const Cell* mid = r.find("eps=0.8");
  REQUIRE(mid != nullptr);
  CHECK(std::abs(mid->estimate - 0.1852419073) <= 3 * mid->half_width);
  const Cell* wide = r.find("eps=100");
  REQUIRE(wide != nullptr);
  CHECK(wide->estimate == 1.0);
  CHECK(wide->extras.at("neg_log_estimate") == 0.0);
  CHECK_THROWS_AS(small_ball_study({1, 1.0, {}, 10, 4}, {1, 1}), InputError);
}

TEST_CASE("limit theorem on a noise-free problem has zero error") {
  const ExperimentReport r = limit_theorem_study(small_limit_config(deterministic_problem()), {3, 1});
  for (const Cell& cell : r.cells) {
    CHECK(cell.estimate == 0.0);
    CHECK(cell.extras.at("median_error") == 0.0);
  }
  const ExperimentReport s = support_direct_study(small_limit_config(deterministic_problem()), {3, 1});
  for (const Cell& cell : s.cells) CHECK(cell.extras.at("median_error") == 0.0);
}

TEST_CASE("limit theorem at the finest level compares the reference with itself") {
  LimitTheoremConfig c = small_limit_config(reflected_bm(0.5));
  c.levels = {4, 8};
  const ExperimentReport r = limit_theorem_study(c, {4, 1});
  CHECK(r.find("level=8")->extras.at("median_error") == 0.0);
  CHECK(r.find("level=4")->extras.at("median_error") > 0.0);
}

TEST_CASE("support-direct distances coincide with the limit-theorem errors") {
  for (const SviProblem& p :
       {reflected_bm(0.5), SviProblem{catalog()[7], Drift::zero(2), Dispersion::constant(mat({{1.0, 0.0}, {0.3, 0.8}})),
                                      vec({0.0, 0.5}), 1.0}}) {
    const LimitTheoremConfig c = small_limit_config(p);
    const ExperimentReport a = limit_theorem_study(c, {6, 1});
    const ExperimentReport b = support_direct_study(c, {6, 1});
    for (int n : c.levels) {
      const auto& ea = a.series.at("error_level_" + std::to_string(n));
      const auto& eb = b.series.at("distance_level_" + std::to_string(n));
      REQUIRE(ea.size() == eb.size());
      for (std::size_t i = 0; i < ea.size(); ++i) CHECK(std::abs(ea[i] - eb[i]) <= 1e-14);
    }
  }
}

TEST_CASE("reports do not depend on the worker count") {
  const LimitTheoremConfig lt = small_limit_config(reflected_bm(0.5));
  CHECK(same_results(limit_theorem_study(lt, {9, 1}), limit_theorem_study(lt, {9, 8})));
  const ContinuityConfig ct{reflected_bm(0.5), std::nullopt, 0.3, {2.0, 1.0}, 30, 5000, 6};
  CHECK(same_results(approx_continuity_study(ct, {9, 1}), approx_continuity_study(ct, {9, 8})));
  const SmallBallConfig sb{1, 1.0, {0.8, 1.0}, 20000, 6};
  CHECK(same_results(small_ball_study(sb, {9, 1}), small_ball_study(sb, {9, 8})));
  const LevyAreaConfig la{2, 1.0, {1.5, 1.0}, {0.0, 1.0}, 30, 50000, 6};
  CHECK(same_results(levy_area_study(la, {9, 1}), levy_area_study(la, {9, 8})));
  const KTailConfig kt{reflected_bm(0.0), 100, 6, {}};
  CHECK(same_results(k_tail_study(kt, {9, 1}), k_tail_study(kt, {9, 8})));
  CHECK_FALSE(same_results(k_tail_study(kt, {9, 1}), k_tail_study(kt, {10, 1})));
}

TEST_CASE("continuity with vacuous conditioning is the unconditional probability") {
  const ContinuityConfig c{reflected_bm(0.5), std::nullopt, 0.6, {20.0}, 60, 1000, 7};
  const ExperimentReport r = approx_continuity_study(c, {21, 1});
  const Cell& cell = r.cells.front();
  CHECK(cell.extras.at("acceptance_rate") == 1.0);
  long hits = 0;
  for (long i = 0; i < 60; ++i) {
    const DyadicDriver d = generate_driver(1, 1.0, 7, derive_seed(21, static_cast<std::uint64_t>(i), tags::kDriver));
    const SolutionPair sol = reference_solve(c.problem, d);
    // The skeleton for h = 0 and x interior is the constant path at x with eta = 0.
    const double err = sup_distance(sol.x, GridPath::constant(d.dt(), 128, vec({0.5})), 1.0) + sup_norm(sol.k);
    hits += err < 0.6;
  }
  CHECK(cell.hits == hits);
  CHECK(cell.trials == 60);
}

TEST_CASE("continuity without noise holds with probability one") {
  const SviProblem p{half_line(), Drift::constant(vec({-1.0})), Dispersion::zero(1, 1), vec({0.5}), 1.0};
  const ExperimentReport r = approx_continuity_study({p, std::nullopt, 0.2, {1.0, 0.8}, 50, 10000, 8}, {3, 1});
  for (const Cell& cell : r.cells) CHECK(cell.estimate == 1.0);
  // Weak noise keeps the solution near the skeleton as well.
  const SviProblem weak{half_line(), Drift::zero(1), Dispersion::constant(mat({{0.1}})), vec({0.5}), 1.0};
  const ExperimentReport w = approx_continuity_study({weak, std::nullopt, 0.2, {1.0, 0.8}, 50, 10000, 8}, {3, 1});
  for (const Cell& cell : w.cells) CHECK(cell.estimate == 1.0);
}

TEST_CASE("continuity cells are marked under-powered when draws run out") {
  const ContinuityConfig c{reflected_bm(0.5), std::nullopt, 0.2, {0.8, 0.2}, 100, 300, 6};
  const ExperimentReport r = approx_continuity_study(c, {4, 1});
  const Cell* tight = r.find("delta=0.2");
  REQUIRE(tight != nullptr);
  CHECK(tight->underpowered);
  CHECK(tight->extras.at("draws") <= 300);
  CHECK_THROWS_AS(approx_continuity_study({reflected_bm(0.5), std::nullopt, 0.2, {0.4, 0.8}, 10, 100, 6}, {1, 1}),
                  InputError);
}

TEST_CASE("Levy area identities") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DyadicDriver d = generate_driver(3, 1.0, 10, s);
    const LevyArea a = LevyArea::from_path(d.w);
    CHECK(a.identity_error(d.w) <= 1e-10);
    const double sup_w = sup_norm(GridPath(d.dt(), d.w.values().row(0)));
    CHECK(a.sup_abs(0, 0) == doctest::Approx(0.5 * sup_w * sup_w).epsilon(1e-10));
  }
  // A straight line has no area.
  const GridPath line = GridPath::sample(0.01, 100, 2, [](double t) { return vec({t, 2 * t}); });
  const LevyArea flat = LevyArea::from_path(line);
  CHECK(std::abs(flat.zeta.back()(0, 1) - flat.zeta.back()(1, 0)) <= 1e-14);
}

TEST_CASE("Levy area study examples") {
  const LevyAreaConfig c{2, 1.0, {1.0, 0.8}, {0.0, 1.0, 2.0}, 60, 200000, 7};
  const ExperimentReport r = levy_area_study(c, {2, 1});
  for (const char* delta : {"1", "0.8"}) {
    const std::string d = delta;
    CHECK(r.find("delta=" + d + ",M=0,ij=12")->estimate == 1.0);
    CHECK(r.find("delta=" + d + ",M=1,ij=11")->estimate == 0.0);
    CHECK(r.find("delta=" + d + ",M=2,ij=11")->estimate == 0.0);
  }
  CHECK(r.summary.at("identity_error_max") <= 1e-10);
  CHECK(r.summary.at("sup_over_delta_M=1") >= r.summary.at("sup_over_delta_M=2"));
}

TEST_CASE("tail of |K|_T") {
  const SviProblem quiet{half_line(), Drift::zero(1), Dispersion::zero(1, 1), vec({0.5}), 1.0};
  const ExperimentReport none = k_tail_study({quiet, 50, 6, {}}, {1, 1});
  for (const Cell& cell : none.cells) CHECK(cell.estimate == 0.0);
  const ExperimentReport r = k_tail_study({reflected_bm(0.0), 400, 8, {}}, {1, 1});
  CHECK(r.summary.at("bound_violations") == 0.0);
  CHECK(r.summary.at("p_k_over_3") <= r.summary.at("p_w_over_1_5"));
  CHECK(r.series.at("tv_k").size() == 400);
  CHECK(r.cells.size() == 16);
}

TEST_CASE("report serialization round trips") {
  const ExperimentReport r = k_tail_study({reflected_bm(0.0), 100, 6, {}}, {3, 1});
  const ExperimentReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(same_results(r, back));
  CHECK(back.name == "k-tail");
  CHECK(back.seed == 3);
  const std::string csv = to_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.cells.size()) + 1);
}
