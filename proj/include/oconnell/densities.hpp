#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "oconnell/specfun.hpp"
#include "oconnell/whittaker.hpp"

namespace oconnell {

using DriftVector = Eigen::VectorXd;

enum class DensityMethod { closed_form, quadrature, monte_carlo };

struct DensityEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  DensityMethod method = DensityMethod::closed_form;
};

const char* to_string(DensityMethod m);

// Free-particle kernels.
double heat_kernel(double t, double y, double x);
double vandermonde(const Eigen::Ref<const Eigen::VectorXd>& x);
double km_density(double t, const Configuration& y, const Configuration& x);
double noncolliding_density(double t, const Configuration& y, const Configuration& x);

// One-dimensional killing BM with V(x) = e^{-2x}/2 and drift mu.
enum class MyRoute { automatic, u_integral, spectral };
DensityEstimate my_q(double t, double y, double x, double mu, MyRoute route = MyRoute::automatic);

// Q^0(t, . | x) by the nu-integral with the x-side Bessel factors cached,
// for evaluating many end points at one (t, x).
class MySpectralKernel {
 public:
  MySpectralKernel(double t, double x);
  DensityEstimate operator()(double y) const;
  double t() const { return t_; }
  double x() const { return x_; }

 private:
  double t_, x_;
  std::vector<double> nodes_;
  // Signed Kronrod and Gauss weights; log_scale_ holds
  // log(2/pi^2 e^{-nu^2 t/2} nu sinh(pi nu) |K_{i nu}(e^{-x})|).
  std::vector<double> weights_, gauss_;
  std::vector<double> log_scale_;
};

double my_survival(double T, double x, double mu);

// Killing-BM transition density Q_N (N = 1: free BM, N = 2: spectral).
enum class Q2Route { factorized, spectral };
DensityEstimate q_spectral(int n, double t, const Configuration& y, const Configuration& x,
                           Q2Route route = Q2Route::factorized);
DensityEstimate q_spectral_mc(int n, double t, const Configuration& y, const Configuration& x,
                              long samples, std::uint64_t seed);

// Constant C_N of the long-time ratio t^{N^2/2} Q_N / C_N.
double long_time_constant(int n);

using DensityFn = std::function<DensityEstimate(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x)>;
DensityEstimate drift_density(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                              const DriftVector& mu, const DensityFn& base);

// Survival probability of all particles up to T. N = 1 is the one-dimensional
// killing BM with V = e^{-2x}/2; N = 2 uses nearest-neighbour killing.
double survival_n(int n, double T, const Configuration& x, const DriftVector& mu);

// Density of the process conditioned to survive up to T, from (s, x) to (t, y).
DensityEstimate conditioned_density_T(int n, double s, double t, double T, const Configuration& y,
                                      const Configuration& x, const DriftVector& mu);

// psi0 for the conditioned processes: K0(e^{-x}) at N = 1, psi0^(2) at N = 2.
double ground_state(int n, const Configuration& x);

// Transition density of the process conditioned to survive forever.
DensityEstimate oconnell_density(int n, double t, const Configuration& y, const Configuration& x);

enum class ThetaRoute { reduced, nu_quadrature };
DensityEstimate theta_n(int n, double t, const Configuration& y, ThetaRoute route = ThetaRoute::reduced);

enum class FromMinusInf { finite_T, infinite_T };
double from_minus_infinity(FromMinusInf mode, double t, double y, double mu, double T = 0.0);

// Normalization J^mu(1, T) = int theta_{e^{-y}}(T) e^{-mu y} dy.
ErrorBounded j_normalization(double T, double mu);
// I^mu_0(N) = int psi0 e^{-mu.y} dy; closed form at N = 1.
double i_mu0(int n, const DriftVector& mu);

struct SelbergResult {
  double computed;
  double exact;
  double error_bound;
};
SelbergResult selberg_check(int n, long samples = 1'000'000, std::uint64_t seed = 1);

}  // namespace oconnell
