#include "support.hpp"

#include "svilab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace svilab;
using namespace svilab::testing;

namespace {

GridPath scalar_path(double dt, std::initializer_list<double> values) {
  Matrix v(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v(0, k++) = x;
  return GridPath(dt, v);
}

GridPath random_path(double dt, int steps, int dim, std::uint64_t seed) {
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  Matrix v(dim, steps + 1);
  v.col(0).setZero();
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < dim; ++i) v(i, k + 1) = v(i, k) + normal(engine);
  }
  return GridPath(dt, v);
}

}  // namespace

TEST_CASE("grid path construction and interpolation") {
  const GridPath p = scalar_path(0.5, {0.0, 2.0, -1.0});
  CHECK(p.steps() == 2);
  CHECK(p.horizon() == 1.0);
  CHECK(p.at(0.25)[0] == doctest::Approx(1.0));
  CHECK(p.at(0.75)[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(GridPath(0.0, Matrix::Zero(1, 3)), InputError);
  CHECK_THROWS_AS(GridPath(0.1, Matrix::Zero(1, 1)), InputError);
  Matrix bad = Matrix::Zero(1, 3);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(GridPath(0.1, bad), InputError);
}

TEST_CASE("total variation examples") {
  CHECK(total_variation(GridPath::constant(0.1, 10, vec({3.0})), 0.7) == 0.0);
  CHECK(total_variation(scalar_path(1.0, {0.0, 1.0, 0.0, 1.0}), 3.0) == doctest::Approx(3.0));
  CHECK(total_variation(scalar_path(0.5, {0.0, 2.0, -1.0}), 0.75) == doctest::Approx(3.5));
  CHECK_THROWS_AS(total_variation(scalar_path(0.5, {0.0, 2.0, -1.0}), 2.0), InputError);
  CHECK_THROWS_AS(total_variation(scalar_path(0.5, {0.0, 2.0, -1.0}), -0.1), InputError);
}

TEST_CASE("total variation is additive over grid-aligned splits") {
  const GridPath p = random_path(0.01, 200, 2, 3);
  const Vector running = running_variation(p);
  for (int s = 0; s <= 200; s += 17) {
    double tail = 0.0;
    for (int k = s; k < 200; ++k) tail += (p.node(k + 1) - p.node(k)).norm();
    CHECK(running[200] == doctest::Approx(running[s] + tail).epsilon(1e-13));
    CHECK(total_variation(p, s * 0.01) == doctest::Approx(running[s]).epsilon(1e-13));
  }
}

TEST_CASE("metric d examples") {
  const GridPath f = random_path(0.01, 300, 1, 1);
  CHECK(metric_d(f, f) == 0.0);
  for (double c : {0.1, 1.0, 4.0}) {
    const GridPath g(f.dt(), f.values().array() + c);
    for (double h : {1.0, 3.0, 10.0}) {
      CHECK(metric_d(f, g, h) == doctest::Approx(c / (1 + c) * (1 - std::exp(-h))).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(metric_d(f, random_path(0.02, 150, 1, 2)), InputError);
}

TEST_CASE("metric d agrees with a refined quadrature") {
  const GridPath f = random_path(1e-3, 3000, 2, 5);
  const GridPath g = random_path(1e-3, 3000, 2, 6);
  const double coarse = metric_d(f, g, 3.0);
  const double fine = metric_d(resample(f, 1e-4), resample(g, 1e-4), 3.0);
  CHECK(std::abs(coarse - fine) <= 1e-5);
}

TEST_CASE("metric d is a pseudo-metric") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GridPath f = random_path(0.01, 400, 2, 100 + s);
    const GridPath g = random_path(0.01, 400, 2, 200 + s);
    const GridPath h = random_path(0.01, 400, 2, 300 + s);
    CHECK(metric_d(f, g) == metric_d(g, f));
    CHECK(metric_d(f, h) <= metric_d(f, g) + metric_d(g, h) + 1e-9);
  }
}

TEST_CASE("inverse time change examples") {
  const IncreasingGridFunction twice(GridPath::sample(0.01, 200, 1, [](double s) { return vec({2 * s}); }));
  CHECK(inverse_time_change(twice, 3.0) == doctest::Approx(1.5));
  CHECK(inverse_time_change(twice, 10.0) == doctest::Approx(2.0));

  // kappa jumps to 1 right after 0, stays there until 1, then grows with slope 1.
  const double dt = 0.01;
  const IncreasingGridFunction plateau(GridPath::sample(dt, 200, 1, [](double s) {
    return vec({s == 0.0 ? 0.0 : std::max(1.0, s)});
  }));
  CHECK(inverse_time_change(plateau, 1.0) == doctest::Approx(1.0));
  CHECK(inverse_time_change(plateau, 0.5) == doctest::Approx(0.5 * dt));
  CHECK(inverse_time_change(plateau, 1.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(IncreasingGridFunction(scalar_path(0.1, {0.0, 1.0, 0.5})), InputError);
  CHECK_THROWS_AS(IncreasingGridFunction(scalar_path(0.1, {0.2, 1.0, 1.5})), InputError);
}

TEST_CASE("inverse time change is nondecreasing in t") {
  Engine engine = make_engine(9);
  std::uniform_real_distribution<double> slope(0.0, 3.0);
  Matrix v(1, 101);
  v(0, 0) = 0.0;
  for (int k = 0; k < 100; ++k) v(0, k + 1) = v(0, k) + (k % 7 == 3 ? 0.0 : slope(engine) * 0.05);
  const IncreasingGridFunction kappa(GridPath(0.05, v));
  std::uniform_real_distribution<double> query(0.0, v(0, 100) * 1.1);
  std::vector<double> ts(1000);
  for (double& t : ts) t = query(engine);
  std::sort(ts.begin(), ts.end());
  double previous = 0.0;
  for (double t : ts) {
    const double s = inverse_time_change(kappa, t);
    CHECK(s >= previous);
    previous = s;
  }
}

TEST_CASE("double inverse recovers kappa") {
  const double dt = 0.01;
  const IncreasingGridFunction kappa(
      GridPath::sample(dt, 200, 1, [](double s) { return vec({s + s * s}); }));
  const IncreasingGridFunction inverse = inverse_on_grid(kappa, dt, 6.0);
  const IncreasingGridFunction back = inverse_on_grid(inverse, dt, 2.0);
  for (int k = 0; k <= 200; ++k) CHECK(std::abs(back.value(k) - kappa.value(k)) <= dt);
}

TEST_CASE("inverses converge as kappa_n converges") {
  const double dt = 1e-3;
  const IncreasingGridFunction kappa(GridPath::sample(dt, 1000, 1, [](double s) { return vec({2 * s}); }));
  double previous = kInfinity;
  for (int n = 1; n <= 64; n *= 2) {
    const IncreasingGridFunction kn(GridPath::sample(
        dt, 1000, 1, [n](double s) { return vec({2 * s + 0.5 * s * s / n}); }));
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double t = k * dt;
      worst = std::max(worst, std::abs(inverse_time_change(kn, t) - inverse_time_change(kappa, t)));
    }
    CHECK(worst < previous);
    previous = worst;
  }
}

TEST_CASE("sup distance examples") {
  const GridPath f = random_path(0.01, 100, 2, 4);
  CHECK(sup_distance(f, f, 1.0) == 0.0);
  const GridPath g(f.dt(), f.values().colwise() + vec({0.3, -0.4}));
  CHECK(sup_distance(f, g, 1.0) == doctest::Approx(0.5));
  const GridPath h = random_path(0.01, 100, 2, 5);
  double brute = 0.0;
  for (int k = 0; k <= 50; ++k) brute = std::max(brute, (f.node(k) - h.node(k)).norm());
  CHECK(sup_distance(f, h, 0.5) == brute);
  CHECK_THROWS_AS(sup_distance(f, random_path(0.02, 50, 2, 1), 0.5), InputError);
}

TEST_CASE("resampling nested grids reproduces nodes exactly") {
  const GridPath f = random_path(0.1, 10, 2, 8);
  const GridPath fine = resample(f, 0.025);
  CHECK(fine.steps() == 40);
  for (int k = 0; k <= 10; ++k) CHECK(fine.node(4 * k) == f.node(k));
  const GridPath back = resample(fine, 0.1);
  CHECK(back.values() == f.values());
  CHECK_THROWS_AS(resample(f, 0.3), InputError);
}

TEST_CASE("CSV round trip") {
  const GridPath f = random_path(0.01, 50, 3, 2);
  std::stringstream s;
  write_csv(s, f, "config_hash=abc seed=1");
  const std::string text = s.str();
  CHECK(text.rfind("# config_hash=abc seed=1\nt,x1,x2,x3\n", 0) == 0);
  const GridPath g = read_csv(s);
  CHECK(g.same_grid(f));
  CHECK(g.values() == f.values());
  std::stringstream bad("t,x1\n0,0\n0.1\n");
  CHECK_THROWS_AS(read_csv(bad), InputError);
}

TEST_CASE("binary round trip") {
  const GridPath f = random_path(1.0 / 1024, 1024, 2, 3);
  std::stringstream s;
  write_binary(s, f);
  const std::string bytes = s.str();
  CHECK(bytes.substr(0, 4) == "SVGP");
  CHECK(bytes.size() == 4 + 4 + 4 + 8 + 8 + 2 * 1025 * 8);
  const GridPath g = read_binary(s);
  CHECK(g.dt() == f.dt());
  CHECK(g.values() == f.values());
  std::stringstream truncated(bytes.substr(0, 40));
  CHECK_THROWS_AS(read_binary(truncated), InputError);
}
