#include "svilab/coefficients.hpp"

#include <cmath>

namespace svilab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_point(int dim, const Vector& x) {
  if (x.size() != dim) throw InputError("coefficient evaluated at a point of the wrong dimension");
}

}  // namespace

// ---- Drift --------------------------------------------------------------------

Drift Drift::zero(int dim) {
  require(dim > 0, "drift: dimension must be positive");
  return {ConstantDrift{Vector::Zero(dim)}, dim};
}

Drift Drift::constant(Vector value) {
  require(value.size() > 0 && value.allFinite(), "drift: constant must be finite");
  const int dim = static_cast<int>(value.size());
  return {ConstantDrift{std::move(value)}, dim};
}

Drift Drift::linear(Matrix a, Vector c) {
  require(a.rows() == a.cols() && a.rows() == c.size() && c.size() > 0,
          "drift: linear coefficient shapes disagree");
  require(a.allFinite() && c.allFinite(), "drift: coefficients must be finite");
  const int dim = static_cast<int>(c.size());
  return {LinearDrift{std::move(a), std::move(c)}, dim};
}

Drift Drift::tanh(Matrix a, Matrix b, Vector c) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows() &&
              c.size() == a.rows() && c.size() > 0,
          "drift: tanh coefficient shapes disagree");
  require(a.allFinite() && b.allFinite() && c.allFinite(), "drift: coefficients must be finite");
  const int dim = static_cast<int>(c.size());
  return {TanhDrift{std::move(a), std::move(b), std::move(c)}, dim};
}

std::string Drift::kind_name() const {
  return std::visit(Overloaded{[](const ConstantDrift&) { return "constant"; },
                               [](const LinearDrift&) { return "linear"; },
                               [](const TanhDrift&) { return "tanh"; }},
                    kind_);
}

bool Drift::is_zero() const {
  return std::visit(
      Overloaded{[](const ConstantDrift& k) { return k.value.isZero(0.0); },
                 [](const LinearDrift& k) { return k.a.isZero(0.0) && k.c.isZero(0.0); },
                 [](const TanhDrift& k) { return k.a.isZero(0.0); }},
      kind_);
}

Vector Drift::operator()(const Vector& x) const {
  check_point(dim_, x);
  return std::visit(
      Overloaded{[](const ConstantDrift& k) { return Vector(k.value); },
                 [&](const LinearDrift& k) { return Vector(k.a * x + k.c); },
                 [&](const TanhDrift& k) {
                   return Vector(k.a * (k.b * x + k.c).array().tanh().matrix());
                 }},
      kind_);
}

Matrix Drift::jacobian(const Vector& x) const {
  check_point(dim_, x);
  return std::visit(
      Overloaded{[&](const ConstantDrift&) { return Matrix(Matrix::Zero(dim_, dim_)); },
                 [](const LinearDrift& k) { return Matrix(k.a); },
                 [&](const TanhDrift& k) {
                   const Vector t = (k.b * x + k.c).array().tanh();
                   const Vector sech2 = 1.0 - t.array().square();
                   return Matrix(k.a * sech2.asDiagonal() * k.b);
                 }},
      kind_);
}

// ---- Dispersion ---------------------------------------------------------------

Dispersion Dispersion::zero(int dim, int noise_dim) {
  require(dim > 0 && noise_dim > 0, "dispersion: dimensions must be positive");
  return {ConstantDispersion{Matrix::Zero(dim, noise_dim)}, dim, noise_dim};
}

Dispersion Dispersion::constant(Matrix value) {
  require(value.size() > 0 && value.allFinite(), "dispersion: constant must be finite");
  const auto m = static_cast<int>(value.rows());
  const auto d = static_cast<int>(value.cols());
  return {ConstantDispersion{std::move(value)}, m, d};
}

Dispersion Dispersion::linear(Matrix offset, std::vector<Matrix> slopes) {
  require(offset.size() > 0, "dispersion: empty offset");
  require(static_cast<Eigen::Index>(slopes.size()) == offset.rows(),
          "dispersion: need one slope matrix per state coordinate");
  for (const auto& s : slopes) {
    require(s.rows() == offset.rows() && s.cols() == offset.cols(),
            "dispersion: slope shape differs from offset");
    require(s.allFinite(), "dispersion: coefficients must be finite");
  }
  const auto m = static_cast<int>(offset.rows());
  const auto d = static_cast<int>(offset.cols());
  return {LinearDispersion{std::move(offset), std::move(slopes)}, m, d};
}

Dispersion Dispersion::sine(Matrix c, Matrix a, Matrix w) {
  require(c.rows() == a.rows() && c.cols() == a.cols() && c.size() > 0,
          "dispersion: sine amplitude and offset shapes differ");
  require(w.rows() == c.rows() && w.cols() == c.rows(), "dispersion: frequency matrix must be m x m");
  require(c.allFinite() && a.allFinite() && w.allFinite(), "dispersion: coefficients must be finite");
  const auto m = static_cast<int>(c.rows());
  const auto d = static_cast<int>(c.cols());
  return {SineDispersion{std::move(c), std::move(a), std::move(w)}, m, d};
}

Dispersion Dispersion::scalar_linear(double scale) {
  return linear(Matrix::Zero(1, 1), {Matrix::Constant(1, 1, scale)});
}

std::string Dispersion::kind_name() const {
  return std::visit(Overloaded{[](const ConstantDispersion&) { return "constant"; },
                               [](const LinearDispersion&) { return "linear"; },
                               [](const SineDispersion&) { return "sine"; }},
                    kind_);
}

bool Dispersion::is_zero() const {
  return std::visit(Overloaded{[](const ConstantDispersion& k) { return k.value.isZero(0.0); },
                               [](const LinearDispersion& k) {
                                 bool zero = k.offset.isZero(0.0);
                                 for (const auto& s : k.slopes) zero = zero && s.isZero(0.0);
                                 return zero;
                               },
                               [](const SineDispersion& k) {
                                 return k.c.isZero(0.0) && k.a.isZero(0.0);
                               }},
                    kind_);
}

Matrix Dispersion::operator()(const Vector& x) const {
  check_point(dim_, x);
  return std::visit(Overloaded{[](const ConstantDispersion& k) { return Matrix(k.value); },
                               [&](const LinearDispersion& k) {
                                 Matrix out = k.offset;
                                 for (int j = 0; j < dim_; ++j) out += x[j] * k.slopes[j];
                                 return out;
                               },
                               [&](const SineDispersion& k) {
                                 const Vector s = (k.w * x).array().sin();
                                 return Matrix(k.c + s.asDiagonal() * k.a);
                               }},
                    kind_);
}

std::vector<Matrix> Dispersion::derivative(const Vector& x) const {
  check_point(dim_, x);
  return std::visit(
      Overloaded{[&](const ConstantDispersion&) {
                   return std::vector<Matrix>(dim_, Matrix::Zero(dim_, noise_dim_));
                 },
                 [](const LinearDispersion& k) { return k.slopes; },
                 [&](const SineDispersion& k) {
                   const Vector cw = (k.w * x).array().cos();
                   std::vector<Matrix> out;
                   out.reserve(dim_);
                   for (int j = 0; j < dim_; ++j) {
                     const Vector row_scale = cw.cwiseProduct(k.w.col(j));
                     out.emplace_back(row_scale.asDiagonal() * k.a);
                   }
                   return out;
                 }},
      kind_);
}

// ---- generator pieces -----------------------------------------------------------

Matrix diffusion_matrix(const Dispersion& sigma, const Vector& x) {
  const Matrix s = sigma(x);
  return s * s.transpose();
}

std::vector<Matrix> sigma_prime_sigma(const Dispersion& sigma, const Vector& x) {
  const Matrix s = sigma(x);
  const std::vector<Matrix> ds = sigma.derivative(x);
  const int m = sigma.dim();
  const int d = sigma.noise_dim();
  std::vector<Matrix> out(m, Matrix::Zero(d, d));
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < d; ++l) {
      for (int lp = 0; lp < d; ++lp) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += ds[j](i, l) * s(j, lp);
        out[i](l, lp) = acc;
      }
    }
  }
  return out;
}

Vector ito_drift(const Drift& b, const Dispersion& sigma, const Vector& x) {
  const std::vector<Matrix> sps = sigma_prime_sigma(sigma, x);
  Vector out = b(x);
  for (int i = 0; i < sigma.dim(); ++i) out[i] += 0.5 * sps[i].trace();
  return out;
}

}  // namespace svilab
