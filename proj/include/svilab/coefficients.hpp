#ifndef SVILAB_COEFFICIENTS_HPP
#define SVILAB_COEFFICIENTS_HPP

// Closed catalog of drift b: R^m -> R^m and dispersion sigma: R^m -> R^{m x d}
// coefficients, with closed-form first derivatives.

#include "svilab/common.hpp"

#include <string>
#include <variant>
#include <vector>

namespace svilab {

// ---- drift ------------------------------------------------------------------

struct ConstantDrift {
  Vector value;
};

/// b(x) = A x + c.
struct LinearDrift {
  Matrix a;
  Vector c;
};

/// b(x) = A tanh(B x + c), tanh taken elementwise. Bounded with bounded derivatives.
struct TanhDrift {
  Matrix a;
  Matrix b;
  Vector c;
};

class Drift {
 public:
  using Kind = std::variant<ConstantDrift, LinearDrift, TanhDrift>;

  static Drift zero(int dim);
  static Drift constant(Vector value);
  static Drift linear(Matrix a, Vector c);
  static Drift tanh(Matrix a, Matrix b, Vector c);

  int dim() const noexcept { return dim_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;
  bool is_zero() const;

  Vector operator()(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;

 private:
  Drift(Kind kind, int dim) : kind_(std::move(kind)), dim_(dim) {}
  Kind kind_;
  int dim_;
};

// ---- dispersion -------------------------------------------------------------

struct ConstantDispersion {
  Matrix value;  // m x d
};

/// sigma(x) = S0 + sum_j x_j S_j.
struct LinearDispersion {
  Matrix offset;               // m x d
  std::vector<Matrix> slopes;  // m entries, each m x d
};

/// sigma^{ik}(x) = C_ik + A_ik sin(W_i . x), W_i the i-th row of W (m x m).
struct SineDispersion {
  Matrix c;  // m x d
  Matrix a;  // m x d
  Matrix w;  // m x m
};

class Dispersion {
 public:
  using Kind = std::variant<ConstantDispersion, LinearDispersion, SineDispersion>;

  static Dispersion zero(int dim, int noise_dim);
  static Dispersion constant(Matrix value);
  static Dispersion linear(Matrix offset, std::vector<Matrix> slopes);
  static Dispersion sine(Matrix c, Matrix a, Matrix w);
  /// sigma(x) = scale * x in one dimension with one driving noise.
  static Dispersion scalar_linear(double scale);

  int dim() const noexcept { return dim_; }
  int noise_dim() const noexcept { return noise_dim_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;
  bool is_zero() const;

  Matrix operator()(const Vector& x) const;
  /// d sigma^{ik} / d x_j, returned as one m x d matrix per j.
  std::vector<Matrix> derivative(const Vector& x) const;

 private:
  Dispersion(Kind kind, int dim, int noise_dim)
      : kind_(std::move(kind)), dim_(dim), noise_dim_(noise_dim) {}
  Kind kind_;
  int dim_;
  int noise_dim_;
};

// ---- generator pieces ---------------------------------------------------------

/// a^{ij}(x) = sum_k sigma_k^i sigma_k^j.
Matrix diffusion_matrix(const Dispersion& sigma, const Vector& x);

/// (sigma' sigma)^{l,l'}_i = sum_j d_j sigma^{il} sigma^{jl'}; entry i is a d x d matrix.
std::vector<Matrix> sigma_prime_sigma(const Dispersion& sigma, const Vector& x);

/// Ito drift of the Stratonovich equation: b + 1/2 sum_k (D sigma_k) sigma_k.
Vector ito_drift(const Drift& b, const Dispersion& sigma, const Vector& x);

}  // namespace svilab

#endif  // SVILAB_COEFFICIENTS_HPP
