#include "oconnell/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace oconnell {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite input");
}

double log_cosh(double a) {
  a = std::abs(a);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

double log_sinh(double a) {  // a > 0
  return a + std::log1p(-std::exp(-2.0 * a)) - M_LN2;
}

// Scaled trapezoid integrals for K and K' over t in R (both even in t);
// K = exp(log_scale) * value / 2, likewise for K'.
struct KIntegrals {
  double log_scale;
  double value, value_err;
  double deriv, deriv_err;
};

double imaginary_shift(double nu, double x) {
  double saddle = std::asin(std::min(1.0, nu / x));
  double cap = nu > 0 ? std::max(0.0, M_PI_2 - 1.5 / nu) : 0.0;
  return std::min(saddle, cap);
}

KIntegrals k_integrals(Order order, double x, const QuadratureSpec& spec, bool want_deriv) {
  if (!(x > 0) || !std::isfinite(x)) throw DomainError("bessel_k: x must be positive");
  require_finite(order.value, "bessel_k order");
  const double nu = std::abs(order.value);
  KIntegrals out{};
  QuadratureSpec s = spec;
  if (order.kind == Order::Kind::real) {
    const double ts = std::asinh(nu / x);
    out.log_scale = -x * std::cosh(ts) + log_cosh(nu * ts);
    const double m = out.log_scale;
    s.abs_tol = std::max(spec.abs_tol * std::min(1.0, std::exp(-m)), 1e-300);
    auto fv = [&](double t) { return std::exp(-x * std::cosh(t) + log_cosh(nu * t) - m); };
    auto rv = integrate_line<double>(fv, 0.0, 0.5, s, true);
    out.value = rv.value;
    out.value_err = rv.error;
    if (want_deriv) {
      auto fd = [&](double t) {
        return -std::cosh(t) * std::exp(-x * std::cosh(t) + log_cosh(nu * t) - m);
      };
      auto rd = integrate_line<double>(fd, 0.0, 0.5, s, true);
      out.deriv = rd.value;
      out.deriv_err = rd.error;
    }
    return out;
  }
  // Imaginary order: shift the contour to Im t = alpha.
  const double alpha = imaginary_shift(nu, x);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  out.log_scale = -nu * alpha - x * ca;
  const double m = out.log_scale;
  s.abs_tol = std::max(spec.abs_tol * std::min(1.0, std::exp(-m)), 1e-300);
  const double strip = alpha > 0 ? M_PI_2 - alpha : M_PI_2;
  const double h0 = std::min(0.5, 0.8 * strip);
  auto fv = [&](double t) {
    double phase = nu * t - x * sa * std::sinh(t);
    return std::exp(-x * ca * (std::cosh(t) - 1.0)) * std::cos(phase);
  };
  auto rv = integrate_line<double>(fv, 0.0, h0, s, true);
  out.value = rv.value;
  out.value_err = rv.error;
  if (want_deriv) {
    auto fd = [&](double t) {
      double phase = nu * t - x * sa * std::sinh(t);
      double c = std::cosh(t) * ca, sn = std::sinh(t) * sa;
      return -std::exp(-x * ca * (std::cosh(t) - 1.0)) *
             (c * std::cos(phase) - sn * std::sin(phase));
    };
    auto rd = integrate_line<double>(fd, 0.0, h0, s, true);
    out.deriv = rd.value;
    out.deriv_err = rd.error;
  }
  return out;
}

}  // namespace

double gamma(double x) {
  if (!std::isfinite(x) || x <= 0) throw DomainError("gamma: x must be finite and positive");
  double g = std::tgamma(x);
  if (!std::isfinite(g)) throw DomainError("gamma: result overflows double precision");
  return g;
}

std::complex<double> log_gamma(std::complex<double> z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || z.real() < 0)
    throw DomainError("log_gamma: Re z must be finite and >= 0");
  if (z == 0.0) throw DomainError("log_gamma: pole at 0");
  // Lanczos g = 7, n = 9 for Gamma(z + 1), shifted back by log z.
  static constexpr double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                  771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                  -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double g = 7.0;
  std::complex<double> a = c[0];
  for (int k = 1; k < 9; ++k) a += c[k] / (z + static_cast<double>(k));
  std::complex<double> t = z + g + 0.5;
  return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(a) - std::log(z);
}

ErrorBounded bessel_j0(double z) {
  require_finite(z, "bessel_j0");
  z = std::abs(z);
  if (z <= 8.0) {
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0, abs_sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -q / (static_cast<double>(k) * k);
      sum += term;
      abs_sum += std::abs(term);
      if (std::abs(term) < 1e-18 * abs_sum) break;
    }
    return {sum, 4 * kEps * abs_sum, Method::series};
  }
  if (z <= 25.0) {
    // Periodic trapezoid of (1/2pi) int_0^{2pi} cos(z sin th) dth; aliasing
    // error is 2 J_M(z), negligible for M > z + 40.
    const int m = 2 * static_cast<int>(std::ceil(z)) + 40;
    double sum = 0.0;
    for (int k = 0; k < m; ++k) sum += std::cos(z * std::sin(2.0 * M_PI * k / m));
    return {sum / m, 4 * kEps * std::sqrt(static_cast<double>(m)), Method::quadrature};
  }
  // Hankel expansion; at z > 25 the smallest term is far below 1e-17.
  double p = 0.0, q = 0.0, c = 1.0, zk = 1.0, last = 1.0;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      double odd = 2.0 * k - 1.0;
      c *= -odd * odd / (8.0 * k);
      zk *= z;
    }
    double term = c / zk;
    if (k > 2 && std::abs(term) > std::abs(last)) break;
    last = term;
    int r = k % 4;
    if (r == 0) p += term;
    else if (r == 1) q += term;
    else if (r == 2) p -= term;
    else q -= term;
    if (std::abs(term) < 1e-18) break;
  }
  const double chi = z - M_PI_4;
  double val = std::sqrt(2.0 / (M_PI * z)) * (p * std::cos(chi) - q * std::sin(chi));
  // Argument rounding limits absolute accuracy to about ulp(z).
  double err = std::sqrt(2.0 / (M_PI * z)) * (std::abs(last) + 4 * kEps * (1.0 + z));
  return {val, err, Method::asymptotic};
}

double bessel_j0_zero(int k) {
  static const double first[] = {2.404825557695773, 5.520078110286311, 8.653727912911013,
                                 11.79153443901428, 14.93091770848779};
  if (k < 1) throw DomainError("bessel_j0_zero: k >= 1");
  if (k <= 5) return first[k - 1];
  const double b = (k - 0.25) * M_PI;
  const double b2 = b * b;
  return b + 1.0 / (8.0 * b) - 31.0 / (384.0 * b * b2) + 3779.0 / (15360.0 * b * b2 * b2);
}

ErrorBounded bessel_i(double nu, double z) {
  require_finite(nu, "bessel_i");
  require_finite(z, "bessel_i");
  if (nu < 0) throw DomainError("bessel_i: order must be >= 0");
  if (z <= 0) throw DomainError("bessel_i: z must be positive");
  if (z > 30.0 && z > nu * nu) {
    const double mu = 4.0 * nu * nu;
    double sum = 1.0, term = 1.0, last = 1.0;
    for (int k = 1; k < 80; ++k) {
      double odd = 2.0 * k - 1.0;
      term *= -(mu - odd * odd) / (8.0 * k * z);
      if (std::abs(term) > std::abs(last)) break;
      sum += term;
      last = term;
      if (std::abs(term) < 1e-18) break;
    }
    double scale = std::exp(z) / std::sqrt(2.0 * M_PI * z);
    return {scale * sum, scale * (std::abs(last) + 4 * kEps * std::abs(sum)), Method::asymptotic};
  }
  // Power series with terms relative to the leading one.
  const double q = 0.25 * z * z;
  const double log_lead = nu * std::log(0.5 * z) - std::lgamma(nu + 1.0);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * (k + nu));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  double val = std::exp(log_lead + std::log(sum));
  return {val, (8 + nu) * kEps * val, Method::series};
}

KValue bessel_k_log(Order order, double x, const QuadratureSpec& spec) {
  spec.validate();
  auto in = k_integrals(order, x, spec, false);
  KValue out;
  double half = 0.5 * in.value;
  out.sign = half < 0 ? -1 : 1;
  out.log_abs = in.log_scale + std::log(std::abs(half));
  out.value = out.sign * std::exp(out.log_abs);
  out.error_bound = 0.5 * in.value_err * std::exp(in.log_scale);
  return out;
}

ErrorBounded bessel_k(Order order, double x, const QuadratureSpec& spec) {
  auto k = bessel_k_log(order, x, spec);
  return {k.value, k.error_bound, Method::quadrature};
}

ErrorBounded bessel_k_deriv(Order order, double x, const QuadratureSpec& spec) {
  spec.validate();
  auto in = k_integrals(order, x, spec, true);
  double scale = 0.5 * std::exp(in.log_scale);
  return {scale * in.deriv, scale * in.deriv_err, Method::quadrature};
}

KLogDeriv bessel_k_logderiv(double nu, double x, const QuadratureSpec& spec) {
  spec.validate();
  auto in = k_integrals(Order::real(nu), x, spec, true);
  return {in.log_scale + std::log(0.5 * in.value), in.deriv / in.value};
}

ErrorBounded theta(double r, double t, const QuadratureSpec& spec) {
  require_finite(r, "theta");
  require_finite(t, "theta");
  if (!(r > 0) || !(t > 0)) throw DomainError("theta: r and t must be positive");
  spec.validate();
  // |theta_r(t)| <= e^{pi^2/2t - r} / sqrt(2 pi^3 t)
  const double log_bound = M_PI * M_PI / (2.0 * t) - r - 0.5 * std::log(2.0 * M_PI * M_PI * M_PI * t);
  if (log_bound < -700.0) return {0.0, std::exp(log_bound), Method::asymptotic};
  // g(eta) = exp(-eta^2/2t - r (cosh eta - 1)) sinh eta; the e^{-r} and
  // e^{pi^2/2t} factors are applied in log space.
  auto g = [&](double eta) {
    return std::exp(-eta * eta / (2.0 * t) - r * (std::cosh(eta) - 1.0)) * std::sinh(eta);
  };
  auto f = [&](double eta) { return g(eta) * std::sin(M_PI * eta / t); };
  // Sub-panels tile the half-periods of sin(pi eta / t).
  const int per_half = std::max(1, static_cast<int>(std::ceil(t / 0.25)));
  const double width = t / per_half;
  double gmax = 0.0, eta_peak = 0.0;
  double sum = 0.0, abs_sum = 0.0, err = 0.0;
  for (long k = 0;; ++k) {
    double a = k * width, b = (k + 1) * width;
    double ga = g(a), gb = g(b);
    if (gb > gmax) {
      gmax = gb;
      eta_peak = b;
    }
    if (a > eta_peak && ga <= 1e-18 * gmax) break;
    if (k > 10'000'000) throw ConvergenceError("theta: eta range did not terminate", sum, err);
    QuadratureSpec ps = QuadratureSpec::with_tolerance(std::max(1e-19 * gmax * width, 1e-300), 1e-14);
    auto r_panel = integrate_adaptive<double>(f, a, b, ps);
    sum += r_panel.value;
    abs_sum += std::abs(r_panel.value);
    err += r_panel.error;
  }
  const double log_pref = std::log(r) - 0.5 * std::log(2.0 * M_PI * M_PI * M_PI * t) +
                          M_PI * M_PI / (2.0 * t) - r;
  const double scale = std::exp(log_pref);
  double value = scale * sum;
  double bound = scale * (err + 64 * kEps * abs_sum);
  if (!std::isfinite(value) || bound > std::max(spec.abs_tol, spec.rel_tol * std::abs(value)))
    throw ConvergenceError("theta: cancellation exceeds tolerance (t too small)", value, bound);
  // theta is positive; a negative result within the bound is rounding
  if (value < 0 && -value <= bound) value = 0.0;
  return {value, bound, Method::quadrature};
}

ErrorBounded theta_contour(double r, double t, const QuadratureSpec& spec) {
  require_finite(r, "theta_contour");
  require_finite(t, "theta_contour");
  if (!(r > 0) || !(t > 0)) throw DomainError("theta_contour: r and t must be positive");
  QuadratureSpec inner = QuadratureSpec::with_tolerance(1e-300, 1e-13);
  // (1/pi^2) int_0^inf e^{-nu^2 t/2} K_{i nu}(r) nu sinh(pi nu) d nu
  auto f = [&](double nu) {
    nu = std::abs(nu);
    if (nu == 0.0) return 0.0;
    auto k = bessel_k_log(Order::imaginary(nu), r, inner);
    if (k.log_abs == -std::numeric_limits<double>::infinity()) return 0.0;
    return k.sign * std::exp(k.log_abs + std::log(nu) + log_sinh(M_PI * nu) - 0.5 * nu * nu * t);
  };
  auto res = integrate_line<double>(f, 0.0, 0.25, spec, true);
  double value = 0.5 * res.value / (M_PI * M_PI), bound = 0.5 * res.error / (M_PI * M_PI);
  if (value < 0 && -value <= bound) value = 0.0;
  return {value, bound, Method::quadrature};
}

LogKTable::LogKTable(double nu, double u_min, double u_max, double h)
    : nu_(std::abs(nu)), u_min_(u_min), u_max_(u_max), h_(h) {
  const int n = static_cast<int>(std::ceil((u_max_ - u_min_) / h_)) + 1;
  u_max_ = u_min_ + (n - 1) * h_;
  log_k_.resize(n);
  dlog_.resize(n);
  QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-300, 1e-14);
  for (int i = 0; i < n; ++i) {
    double z = std::exp(u_min_ + i * h_);
    auto kd = bessel_k_logderiv(nu_, z, spec);
    log_k_[i] = kd.log_k;
    dlog_[i] = z * kd.ratio;
  }
}

const LogKTable& LogKTable::zero() {
  static const LogKTable table(0.0);
  return table;
}

LogKTable::Entry LogKTable::small_z(double u) const {
  const double v = u - M_LN2;  // log(z/2)
  if (nu_ == 0.0) {
    double a = -(v + kEulerGamma);
    return {std::log(a), -1.0 / a};
  }
  double base = std::lgamma(nu_) - M_LN2 - nu_ * v;
  if (nu_ < 1.0) {
    double c = std::tgamma(-nu_) / std::tgamma(nu_);
    double q = std::exp(2.0 * nu_ * v);
    return {base + std::log1p(c * q), -nu_ + 2.0 * nu_ * c * q / (1.0 + c * q)};
  }
  return {base, -nu_};
}

LogKTable::Entry LogKTable::large_z(double u) const {
  const double z = std::exp(u);
  const double mu = 4.0 * nu_ * nu_;
  double s = 1.0, ds = 0.0, a = 1.0;
  for (int k = 1; k < 40; ++k) {
    double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (8.0 * k * z);
    s += a;
    ds -= k * a;
    if (std::abs(a) < 1e-18) break;
  }
  return {0.5 * std::log(M_PI / 2.0) - 0.5 * u - z + std::log(s), -0.5 - z + ds / s};
}

LogKTable::Entry LogKTable::at_log(double u) const {
  if (std::isnan(u)) throw DomainError("LogKTable: NaN argument");
  if (u < u_min_) return small_z(u);
  if (u >= u_max_) return large_z(u);
  double pos = (u - u_min_) / h_;
  int i = std::min(static_cast<int>(pos), static_cast<int>(log_k_.size()) - 2);
  double s = pos - i;
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2,
         h11 = s3 - s2;
  double l0 = log_k_[i], l1 = log_k_[i + 1];
  double d0 = dlog_[i], d1 = dlog_[i + 1];
  double log_k = h00 * l0 + h10 * h_ * d0 + h01 * l1 + h11 * h_ * d1;
  // d/du (z K'/K) = z^2 + nu^2 - (z K'/K)^2
  double u0 = u_min_ + i * h_, u1 = u0 + h_;
  double e0 = std::exp(2 * u0) + nu_ * nu_ - d0 * d0;
  double e1 = std::exp(2 * u1) + nu_ * nu_ - d1 * d1;
  double dlog = h00 * d0 + h10 * h_ * e0 + h01 * d1 + h11 * h_ * e1;
  return {log_k, dlog};
}

}  // namespace oconnell
