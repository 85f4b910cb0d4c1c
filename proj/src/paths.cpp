#include "svilab/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace svilab {
namespace {

constexpr double kTimeSlack = 1e-9;

// Index of the last node at or before time t (with slack for round-off).
int last_node_before(const GridPath& p, double t) {
  const double pos = t / p.dt();
  const auto k = static_cast<int>(std::floor(pos + kTimeSlack));
  return std::clamp(k, 0, p.steps());
}

int steps_for(double horizon, double dt, const char* what) {
  require(dt > 0.0, std::string(what) + ": step must be positive");
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  require(rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio),
          std::string(what) + ": step does not divide the horizon");
  return static_cast<int>(rounded);
}

}  // namespace

GridPath::GridPath(double dt, Matrix values) : dt_(dt), values_(std::move(values)) {
  require(dt > 0.0 && std::isfinite(dt), "GridPath: dt must be positive");
  require(values_.rows() >= 1, "GridPath: dimension must be positive");
  require(values_.cols() >= 2, "GridPath: need at least one grid interval");
  require(values_.allFinite(), "GridPath: values must be finite");
}

GridPath GridPath::constant(double dt, int steps, const Vector& value) {
  return GridPath(dt, value.replicate(1, steps + 1));
}

Vector GridPath::at(double t) const {
  const double pos = std::clamp(t / dt_, 0.0, static_cast<double>(steps()));
  const auto k = std::min(static_cast<int>(std::floor(pos)), steps() - 1);
  const double frac = pos - k;
  if (frac == 0.0) return values_.col(k);
  return (1.0 - frac) * values_.col(k) + frac * values_.col(k + 1);
}

bool GridPath::same_grid(const GridPath& other) const noexcept {
  return steps() == other.steps() && std::abs(dt_ - other.dt_) <= 1e-12 * dt_;
}

IncreasingGridFunction::IncreasingGridFunction(GridPath path) : path_(std::move(path)) {
  require(path_.dim() == 1, "IncreasingGridFunction: must be scalar");
  require(path_.values()(0, 0) == 0.0, "IncreasingGridFunction: value at 0 must be 0");
  for (int k = 1; k <= path_.steps(); ++k) {
    require(path_.values()(0, k) >= path_.values()(0, k - 1),
            "IncreasingGridFunction: values must be nondecreasing");
  }
}

double total_variation(const GridPath& p, double t) {
  require(t >= -kTimeSlack && t <= p.horizon() * (1 + kTimeSlack) + kTimeSlack,
          "total_variation: t outside the grid");
  const double pos = std::clamp(t / p.dt(), 0.0, static_cast<double>(p.steps()));
  const int full = std::min(static_cast<int>(std::floor(pos + kTimeSlack)), p.steps());
  double tv = 0.0;
  for (int k = 0; k < full; ++k) tv += (p.node(k + 1) - p.node(k)).norm();
  const double frac = pos - full;
  if (frac > 0.0 && full < p.steps()) tv += frac * (p.node(full + 1) - p.node(full)).norm();
  return tv;
}

Vector running_variation(const GridPath& p) {
  Vector tv(p.steps() + 1);
  tv[0] = 0.0;
  for (int k = 0; k < p.steps(); ++k) tv[k + 1] = tv[k] + (p.node(k + 1) - p.node(k)).norm();
  return tv;
}

double metric_d(const GridPath& f, const GridPath& g, double horizon) {
  require(f.same_grid(g) && f.dim() == g.dim(), "metric_d: paths are on different grids");
  require(horizon > 0.0, "metric_d: horizon must be positive");
  // f - g is linear on each cell; integrate r/(1+r) e^{-t} of its norm with
  // 3-point Gauss-Legendre, which is far below test tolerances for grid paths.
  static constexpr double kNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double kWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double dt = f.dt();
  auto cell = [&](int k, double t0, double h) {
    const Vector d0 = f.node(k) - g.node(k);
    const Vector slope = (f.node(k + 1) - g.node(k + 1) - d0) / dt;
    double sum = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double s = 0.5 * h * (1.0 + kNodes[q]);
      const double r = (d0 + s * slope).norm();
      sum += kWeights[q] * r / (1.0 + r) * std::exp(-(t0 + s));
    }
    return 0.5 * h * sum;
  };
  const double end = std::min(horizon, f.horizon());
  double total = 0.0;
  int k = 0;
  for (; k < f.steps() && (k + 1) * dt <= end * (1 + 1e-15); ++k) total += cell(k, k * dt, dt);
  const double t_k = k * dt;
  if (end > t_k && k < f.steps()) return total + cell(k, t_k, end - t_k);
  if (horizon > f.horizon()) {
    const double r = (f.node(f.steps()) - g.node(f.steps())).norm();
    total += r / (1.0 + r) * (std::exp(-f.horizon()) - std::exp(-horizon));
  }
  return total;
}

double inverse_time_change(const IncreasingGridFunction& kappa, double t) {
  require(t >= 0.0, "inverse_time_change: t must be nonnegative");
  const Matrix& v = kappa.path().values();
  const double* begin = v.data();
  const double* end = begin + v.cols();
  const double* first = std::upper_bound(begin, end, t);
  if (first == end) return kappa.path().horizon();
  const auto k = static_cast<int>(first - begin);  // k >= 1 since kappa(0) = 0 <= t
  const double lo = v(0, k - 1);
  const double hi = v(0, k);
  const double frac = (t - lo) / (hi - lo);
  return kappa.dt() * (k - 1 + frac);
}

IncreasingGridFunction inverse_on_grid(const IncreasingGridFunction& kappa, double dt, double until) {
  const int steps = steps_for(until, dt, "inverse_on_grid");
  Matrix v(1, steps + 1);
  for (int k = 0; k <= steps; ++k) v(0, k) = inverse_time_change(kappa, k * dt);
  v(0, 0) = 0.0;
  return IncreasingGridFunction(GridPath(dt, std::move(v)));
}

double sup_distance(const GridPath& f, const GridPath& g, double T) {
  require(f.same_grid(g) && f.dim() == g.dim(), "sup_distance: paths are on different grids");
  require(T >= 0.0 && T <= f.horizon() * (1 + kTimeSlack) + kTimeSlack,
          "sup_distance: T outside the grid");
  const int last = last_node_before(f, T);
  double worst = 0.0;
  for (int k = 0; k <= last; ++k) worst = std::max(worst, (f.node(k) - g.node(k)).norm());
  return worst;
}

double sup_norm(const GridPath& f) { return f.values().colwise().norm().maxCoeff(); }

GridPath resample(const GridPath& p, double dt) {
  const int steps = steps_for(p.horizon(), dt, "resample");
  if (steps == p.steps()) return p;
  // Nested grids are handled by index so nodes are reproduced bit for bit.
  if (steps > p.steps() && steps % p.steps() == 0) {
    const int ratio = steps / p.steps();
    Matrix v(p.dim(), steps + 1);
    for (int j = 0; j < p.steps(); ++j) {
      const auto lo = p.node(j);
      const auto hi = p.node(j + 1);
      v.col(j * ratio) = lo;
      for (int i = 1; i < ratio; ++i) {
        const double frac = static_cast<double>(i) / ratio;
        v.col(j * ratio + i) = lo + frac * (hi - lo);
      }
    }
    v.col(steps) = p.node(p.steps());
    return GridPath(dt, std::move(v));
  }
  if (p.steps() > steps && p.steps() % steps == 0) {
    const int ratio = p.steps() / steps;
    Matrix v(p.dim(), steps + 1);
    for (int k = 0; k <= steps; ++k) v.col(k) = p.node(k * ratio);
    return GridPath(dt, std::move(v));
  }
  return GridPath::sample(dt, steps, p.dim(), [&](double t) { return p.at(t); });
}

// ---- serialization ----------------------------------------------------------

void write_csv(std::ostream& out, const GridPath& p, const std::string& comment) {
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << 't';
  for (int i = 1; i <= p.dim(); ++i) out << ",x" << i;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (int k = 0; k <= p.steps(); ++k) {
    out << p.time(k);
    for (int i = 0; i < p.dim(); ++i) out << ',' << p.values()(i, k);
    out << '\n';
  }
  out.precision(old_precision);
}

GridPath read_csv(std::istream& in) {
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      require(line.rfind("t,", 0) == 0, "read_csv: header must start with 't,'");
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("read_csv: bad number '" + cell + "'");
      }
    }
    require(row.size() >= 2, "read_csv: need a time column and at least one value");
    require(rows.empty() || row.size() == rows.front().size(), "read_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  require(rows.size() >= 2, "read_csv: need at least two rows");
  const double dt = rows[1][0] - rows[0][0];
  require(rows[0][0] == 0.0, "read_csv: grid must start at t = 0");
  const auto m = static_cast<Eigen::Index>(rows.front().size() - 1);
  Matrix v(m, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(std::abs(rows[k][0] - dt * static_cast<double>(k)) <= 1e-9 * std::max(1.0, rows[k][0]),
            "read_csv: grid is not uniform");
    for (Eigen::Index i = 0; i < m; ++i) v(i, static_cast<Eigen::Index>(k)) = rows[k][i + 1];
  }
  return GridPath(dt, std::move(v));
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char bytes[sizeof(T)];
  in.read(bytes, sizeof(T));
  require(static_cast<std::size_t>(in.gcount()) == sizeof(T), "read_binary: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'S', 'V', 'G', 'P'};

}  // namespace

void write_binary(std::ostream& out, const GridPath& p) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.dim()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p.steps() + 1));
  put<double>(out, p.dt());
  for (int i = 0; i < p.dim(); ++i) {
    for (int k = 0; k <= p.steps(); ++k) put<double>(out, p.values()(i, k));
  }
}

GridPath read_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  require(in.gcount() == 4 && std::equal(magic, magic + 4, kMagic), "read_binary: bad magic");
  require(get<std::uint32_t>(in) == 1, "read_binary: unsupported version");
  const auto dim = get<std::uint32_t>(in);
  const auto nodes = get<std::uint64_t>(in);
  const double dt = get<double>(in);
  require(dim >= 1 && nodes >= 2, "read_binary: bad shape");
  Matrix v(dim, static_cast<Eigen::Index>(nodes));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) v(i, k) = get<double>(in);
  }
  return GridPath(dt, std::move(v));
}

}  // namespace svilab
