#ifndef SVILAB_TESTS_SUPPORT_HPP
#define SVILAB_TESTS_SUPPORT_HPP

#include "svilab/svi.hpp"

#include <vector>

namespace svilab::testing {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double x : row) m(r, c++) = x;
    ++r;
  }
  return m;
}

inline OperatorSpec half_line() { return OperatorSpec::box(vec({0.0}), vec({kInfinity})); }

inline Quadratic sample_quadratic() {
  return {mat({{2.0, 0.5}, {0.5, 1.0}}), vec({0.3, -0.4})};
}

inline IndicatorHalfspaces sample_polyhedron() {
  return {mat({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}, {1.0, -2.0}}), vec({1.0, 1.0, 1.0, 1.5})};
}

/// One two-dimensional representative of every catalog kind.
inline std::vector<OperatorSpec> catalog() {
  const Quadratic q = sample_quadratic();
  const IndicatorHalfspaces h = sample_polyhedron();
  return {
      OperatorSpec::zero(2),
      OperatorSpec::quadratic(q.q, q.c),
      OperatorSpec::box(vec({-1.0, -1.0}), vec({1.0, 1.0})),
      OperatorSpec::box(vec({0.0, -kInfinity}), vec({kInfinity, 1.0})),
      OperatorSpec::ball(vec({0.5, -0.2}), 1.5),
      OperatorSpec::halfspaces(h.normals, h.offsets),
      OperatorSpec::scaled_l1(2, 0.7),
      OperatorSpec::sum(q, IndicatorBox{vec({-1.0, 0.0}), vec({1.0, 2.0})}),
      OperatorSpec::sum(q, IndicatorBall{vec({0.0, 0.0}), 1.0}),
      OperatorSpec::sum(q, h),
  };
}

/// Reflected Brownian motion on [0, inf) from x.
inline SviProblem reflected_bm(double x, double horizon = 1.0) {
  return {half_line(), Drift::zero(1), Dispersion::constant(Matrix::Identity(1, 1)), vec({x}),
          horizon};
}

}  // namespace svilab::testing

#endif  // SVILAB_TESTS_SUPPORT_HPP
