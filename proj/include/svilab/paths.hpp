#ifndef SVILAB_PATHS_HPP
#define SVILAB_PATHS_HPP

// Paths on a uniform time grid, read as piecewise-linear functions of time.

#include "svilab/common.hpp"

#include <iosfwd>
#include <string>

namespace svilab {

class GridPath {
 public:
  GridPath() = default;
  /// values is m x (N + 1); column k is the value at time k * dt.
  GridPath(double dt, Matrix values);

  static GridPath constant(double dt, int steps, const Vector& value);
  /// Samples f at k * dt for k = 0..steps.
  template <class F>
  static GridPath sample(double dt, int steps, int dim, F&& f) {
    Matrix v(dim, steps + 1);
    for (int k = 0; k <= steps; ++k) v.col(k) = f(k * dt);
    return GridPath(dt, std::move(v));
  }

  int dim() const noexcept { return static_cast<int>(values_.rows()); }
  int steps() const noexcept { return static_cast<int>(values_.cols()) - 1; }
  double dt() const noexcept { return dt_; }
  double horizon() const noexcept { return dt_ * steps(); }
  double time(int k) const noexcept { return dt_ * k; }

  const Matrix& values() const noexcept { return values_; }
  Matrix& values() noexcept { return values_; }
  auto node(int k) const { return values_.col(k); }
  auto node(int k) { return values_.col(k); }

  /// Linear interpolation; t is clamped to [0, horizon].
  Vector at(double t) const;

  /// Same dt and node count.
  bool same_grid(const GridPath& other) const noexcept;

 private:
  double dt_ = 1.0;
  Matrix values_;
};

/// Nondecreasing scalar grid function with value 0 at time 0.
class IncreasingGridFunction {
 public:
  explicit IncreasingGridFunction(GridPath path);

  const GridPath& path() const noexcept { return path_; }
  double dt() const noexcept { return path_.dt(); }
  int steps() const noexcept { return path_.steps(); }
  double value(int k) const { return path_.values()(0, k); }

 private:
  GridPath path_;
};

/// |f|_t: total variation on [0, t], partial last interval interpolated.
double total_variation(const GridPath& p, double t);

/// Total variation on [0, t_k] for every node k.
Vector running_variation(const GridPath& p);

inline constexpr double kDefaultMetricHorizon = 10.0;

/// int_0^H |f - g| / (1 + |f - g|) e^{-t} dt. Paths are held at their final
/// value beyond their last node; the neglected tail is below e^{-H}.
double metric_d(const GridPath& f, const GridPath& g, double horizon = kDefaultMetricHorizon);

/// inf{s : kappa(s) > t}; the last grid time if kappa never exceeds t.
double inverse_time_change(const IncreasingGridFunction& kappa, double t);

/// The inverse sampled on a grid of step dt covering [0, until].
IncreasingGridFunction inverse_on_grid(const IncreasingGridFunction& kappa, double dt, double until);

/// max over nodes k * dt <= T of |f_k - g_k|.
double sup_distance(const GridPath& f, const GridPath& g, double T);

/// max over nodes of |f_k|.
double sup_norm(const GridPath& f);

/// Piecewise-linear resampling onto step `dt` over the same horizon.
GridPath resample(const GridPath& p, double dt);

// ---- serialization ----------------------------------------------------------

/// CSV with header "t,x1,...,xm". Lines starting with '#' are comments.
void write_csv(std::ostream& out, const GridPath& p, const std::string& comment = {});
GridPath read_csv(std::istream& in);

/// Columnar binary layout (little endian):
///   char[4] "SVGP", u32 version (=1), u32 dim, u64 nodes, f64 dt,
///   then dim columns of `nodes` f64 values each.
void write_binary(std::ostream& out, const GridPath& p);
GridPath read_binary(std::istream& in);

}  // namespace svilab

#endif  // SVILAB_PATHS_HPP
