#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "oconnell/specfun.hpp"

namespace oconnell {

// Particle positions; ordered configurations lie in the Weyl chamber.
using Configuration = Eigen::VectorXd;

bool in_weyl_chamber(const Eigen::Ref<const Eigen::VectorXd>& x);
void require_finite(const Eigen::Ref<const Eigen::VectorXd>& x, const char* what);

// Triangular array T_{k,j}, 1 <= j <= k <= N, bottom row fixed to x.
class TriangularArray {
 public:
  explicit TriangularArray(const Configuration& bottom);

  int size() const { return n_; }
  double operator()(int k, int j) const { return data_[index(k, j)]; }
  // Free entries only (k < N).
  void set(int k, int j, double value);
  Eigen::VectorXd row(int k) const;

 private:
  int index(int k, int j) const;
  int n_;
  Eigen::VectorXd data_;
};

// lambda_j = i nu_j.
struct SpectralParameter {
  Eigen::VectorXd nu;

  static SpectralParameter zero(int n) { return {Eigen::VectorXd::Zero(n)}; }
  static SpectralParameter imaginary(const Eigen::VectorXd& nu) { return {nu}; }
  int size() const { return static_cast<int>(nu.size()); }
  std::complex<double> lambda(int j) const { return {0.0, nu(j)}; }
  bool is_zero() const { return nu.isZero(0.0); }
  SpectralParameter negated() const { return {-nu}; }
  SpectralParameter head(int n) const { return {nu.head(n)}; }
};

struct ComplexEstimate {
  std::complex<double> value;
  double error_bound = 0.0;
  Method method = Method::quadrature;
};

std::complex<double> givental_exponent(const SpectralParameter& lambda, const TriangularArray& t);

// Givental integral by nested quadrature over every row (N <= 3).
ComplexEstimate psi(int n, const SpectralParameter& lambda, const Configuration& x,
                    const QuadratureSpec& spec = {});

// Same integral by importance sampling over the array (N <= 5).
ComplexEstimate psi_monte_carlo(int n, const SpectralParameter& lambda, const Configuration& x,
                                long samples, std::uint64_t seed);

// N = 2 closed form 2 e^{(l1+l2)(x1+x2)/2} K_{l1-l2}(2 e^{-(x2-x1)/2}).
std::complex<double> psi2_closed_form(const SpectralParameter& lambda, const Configuration& x);

// N = 3 by quadrature over the middle row on top of the N = 2 closed form.
ComplexEstimate psi3_recursive(const SpectralParameter& lambda, const Configuration& x,
                               const QuadratureSpec& spec = {});

// Zero-eigenvalue function by row-by-row recursion (N <= 4).
ErrorBounded psi0(int n, const Configuration& x, const QuadratureSpec& spec = {});

// Drift F_j = d log psi0 / dx_j (N <= 4); exact Bessel form at N = 2,
// central differences above.
Eigen::VectorXd drift_field(int n, const Configuration& x);

// log psi0 and its gradient from one quadrature pass with the analytic
// derivative of the row weights (N = 2, 3, 4).
struct LogPsi0Gradient {
  double log_psi0;
  Eigen::VectorXd grad;
};
LogPsi0Gradient psi0_log_gradient(int n, const Configuration& x);

// |H psi - gamma psi| with H = -Laplacian/2 + sum e^{-(x_{j+1}-x_j)}.
double eigen_residual(int n, const SpectralParameter& lambda, const Configuration& x);

}  // namespace oconnell
