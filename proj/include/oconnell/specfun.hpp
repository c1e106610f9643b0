#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "oconnell/quadrature.hpp"

namespace oconnell {

constexpr double kEulerGamma = 0.57721566490153286060651209;

struct Order {
  enum class Kind { real, imaginary };
  Kind kind = Kind::real;
  double value = 0.0;

  static Order real(double nu) { return {Kind::real, nu}; }
  static Order imaginary(double nu) { return {Kind::imaginary, nu}; }
};

enum class Method { series, quadrature, recurrence, asymptotic };

struct ErrorBounded {
  double value = 0.0;
  double error_bound = 0.0;
  Method method = Method::quadrature;
};

// K value together with its log-magnitude; value may underflow to zero
// while log_abs stays finite.
struct KValue {
  double value = 0.0;
  double log_abs = 0.0;
  int sign = 1;
  double error_bound = 0.0;
};

double gamma(double x);
// log Gamma(z) for Re z >= 0 (Lanczos, principal branch of the real part).
std::complex<double> log_gamma(std::complex<double> z);

ErrorBounded bessel_j0(double z);
ErrorBounded bessel_i(double nu, double z);
ErrorBounded bessel_k(Order order, double x, const QuadratureSpec& spec = {});
KValue bessel_k_log(Order order, double x, const QuadratureSpec& spec = {});
ErrorBounded bessel_k_deriv(Order order, double x, const QuadratureSpec& spec = {});

// log K_nu(x) and K_nu'(x)/K_nu(x) for real order, free of under/overflow.
struct KLogDeriv {
  double log_k;
  double ratio;
};
KLogDeriv bessel_k_logderiv(double nu, double x, const QuadratureSpec& spec = {});

// Yor's theta_r(t) from the real eta-integral.
ErrorBounded theta(double r, double t, const QuadratureSpec& spec = QuadratureSpec::with_tolerance(1e-10, 1e-10));
// Same function from the imaginary-order contour integral.
ErrorBounded theta_contour(double r, double t, const QuadratureSpec& spec = QuadratureSpec::with_tolerance(1e-14, 1e-10));

// Integral over [0, inf) of g(w) J0(w), split at the zeros of J0 and
// summed with Wynn acceleration.
struct OscillatoryResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};
double bessel_j0_zero(int k);

template <class G>
OscillatoryResult integrate_j0_oscillatory(G&& g, double rel_tol = 1e-11, double abs_tol = 1e-15,
                                           int max_panels = 20000) {
  auto f = [&](double w) { return g(w) * bessel_j0(w).value; };
  QuadratureSpec panel_spec = QuadratureSpec::with_tolerance(abs_tol * 1e-2, rel_tol * 1e-2);
  OscillatoryResult out;
  WynnEpsilon wynn;
  double sum = 0.0;
  double a = 0.0;
  double recent_abs = 0.0;
  double abs_total = 0.0;
  int stable = 0;
  for (int k = 1; k <= max_panels; ++k) {
    double b = bessel_j0_zero(k);
    auto r = integrate_adaptive<double>(f, a, b, panel_spec);
    sum += r.value;
    abs_total += std::abs(r.value);
    out.error += r.error;
    recent_abs = std::abs(r.value);
    a = b;
    out.panels = k;
    // Plain convergence once the amplitude has died out.
    if (k >= 3 && recent_abs <= std::max(abs_tol, 1e-3 * rel_tol * std::abs(sum))) {
      out.value = sum;
      out.error += recent_abs;
      return out;
    }
    wynn.push(sum);
    if (k >= 8) {
      double tol = std::max(abs_tol, rel_tol * std::abs(wynn.estimate()));
      if (wynn.error() <= tol) {
        if (++stable >= 3) {
          out.value = wynn.estimate();
          out.error += wynn.error();
          return out;
        }
      } else {
        stable = 0;
      }
    }
  }
  throw ConvergenceError("J0 oscillatory integral: no convergence", wynn.estimate(),
                         wynn.error());
}

// Cubic Hermite table of log K_nu(e^u) and its u-derivative z K'/K for a
// fixed real order nu >= 0, with asymptotic forms outside the table.
class LogKTable {
 public:
  explicit LogKTable(double nu, double u_min = -40.0, double u_max = 7.0, double h = 1.0 / 256.0);

  struct Entry {
    double log_k;
    double dlog;  // d log K / du = z K'(z)/K(z)
  };
  Entry at_log(double u) const;
  Entry at(double z) const { return at_log(std::log(z)); }
  double order() const { return nu_; }

  // Shared order-0 table, built on first use.
  static const LogKTable& zero();

 private:
  Entry small_z(double u) const;
  Entry large_z(double u) const;

  double nu_, u_min_, u_max_, h_;
  std::vector<double> log_k_;
  std::vector<double> dlog_;
};

}  // namespace oconnell
