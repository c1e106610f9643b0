#include "oconnell/densities.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "oconnell/random.hpp"

namespace oconnell {

namespace {

constexpr double kSpectralDecades = 40.0;
constexpr double kTimeMin = 1e-3;
constexpr double kBesselPanel = 0.25;

const QuadratureSpec& k_spec() {
  static const QuadratureSpec s = QuadratureSpec::with_tolerance(1e-300, 1e-12);
  return s;
}

double log_sinh(double x) { return x + std::log1p(-std::exp(-2.0 * x)) - M_LN2; }

void require_time(double t, const char* what) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError(std::string(what) + ": t must be positive");
}

void require_size(const Eigen::VectorXd& v, int n, const char* what) {
  if (v.size() != n) throw DomainError(std::string(what) + ": size differs from N");
  require_finite(v, what);
}

double spectral_cutoff(double t) { return std::sqrt(2.0 * kSpectralDecades * std::log(10.0) / t); }

// Gauss-Kronrod 15 nodes tiling [0, b] in panels of width <= w, with the
// Kronrod and embedded Gauss weights.
struct PanelRule {
  std::vector<double> nodes, wk, wg;
};

PanelRule panel_rule(double a, double b, double w) {
  PanelRule r;
  int panels = std::max(1, static_cast<int>(std::ceil((b - a) / w)));
  double h = (b - a) / panels;
  auto push = [&](double x, double wk, double wg) {
    r.nodes.push_back(x);
    r.wk.push_back(wk);
    r.wg.push_back(wg);
  };
  for (int p = 0; p < panels; ++p) {
    double c = a + (p + 0.5) * h, hl = 0.5 * h;
    push(c, hl * GaussKronrod15::wgk[7], hl * GaussKronrod15::wg[3]);
    for (int j = 0; j < 7; ++j) {
      double g = j % 2 == 1 ? hl * GaussKronrod15::wg[j / 2] : 0.0;
      push(c - hl * GaussKronrod15::xgk[j], hl * GaussKronrod15::wgk[j], g);
      push(c + hl * GaussKronrod15::xgk[j], hl * GaussKronrod15::wgk[j], g);
    }
  }
  return r;
}

double gk_error(double kron, double gauss, double abs_sum) {
  double diff = std::abs(kron - gauss);
  if (abs_sum <= 0) return diff;
  return std::min(diff, abs_sum * std::pow(200.0 * diff / abs_sum, 1.5)) +
         50.0 * std::numeric_limits<double>::epsilon() * abs_sum;
}

// Q^mu(t, y|x) from the u-integral; the branch region |u| < |x - y| is odd
// in u and integrates to zero, so the J0 part starts at u = |x - y| where
// w = sqrt(2 e^{-(x+y)} cosh u - e^{-2x} - e^{-2y}) vanishes.
DensityEstimate my_q_u(double t, double y, double x, double mu) {
  const double sum = x + y;
  if (sum < -700.0) return {0.0, 0.0, DensityMethod::quadrature};
  const double a = 2.0 * std::exp(-sum);
  const double sh = std::sinh(0.5 * (x - y));
  const double c0 = 2.0 * sh * sh;  // cosh(x - y) - 1
  auto g = [&](double w) {
    double c = w * w / a + c0;
    double s = std::sqrt(c * (c + 2.0));
    double u = std::log1p(c + s);
    double ratio = s < 1e-8 ? 1.0 - u * u / 6.0 : u / s;  // u / sinh u
    return 2.0 * w * ratio * std::exp(-u * u / (2.0 * t)) / a;
  };
  auto r = integrate_j0_oscillatory(g, 1e-10, 1e-300, 200000);
  const double pref = std::exp(-0.5 * mu * mu * t + mu * (x - y)) / (std::sqrt(2.0 * M_PI) * std::pow(t, 1.5));
  return {pref * r.value, pref * r.error, DensityMethod::quadrature};
}

}  // namespace

const char* to_string(DensityMethod m) {
  switch (m) {
    case DensityMethod::closed_form: return "closed_form";
    case DensityMethod::quadrature: return "quadrature";
    case DensityMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

double heat_kernel(double t, double y, double x) {
  require_time(t, "heat_kernel");
  return std::exp(-(y - x) * (y - x) / (2.0 * t)) / std::sqrt(2.0 * M_PI * t);
}

double vandermonde(const Eigen::Ref<const Eigen::VectorXd>& x) {
  double v = 1.0;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    for (Eigen::Index k = j + 1; k < x.size(); ++k) v *= x(k) - x(j);
  return v;
}

double km_density(double t, const Configuration& y, const Configuration& x) {
  require_time(t, "km_density");
  if (x.size() != y.size() || x.size() < 1) throw DomainError("km_density: size mismatch");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) m(j, k) = heat_kernel(t, y(j), x(k));
  return m.determinant();
}

double noncolliding_density(double t, const Configuration& y, const Configuration& x) {
  if (!in_weyl_chamber(x) || !in_weyl_chamber(y))
    throw DomainError("noncolliding_density: configurations must be strictly ordered");
  return vandermonde(y) / vandermonde(x) * km_density(t, y, x);
}

MySpectralKernel::MySpectralKernel(double t, double x) : t_(t), x_(x) {
  require_time(t, "MySpectralKernel");
  if (t < kTimeMin) throw ConvergenceError("spectral kernel: t below supported minimum", 0.0, 0.0);
  auto rule = panel_rule(0.0, spectral_cutoff(t), kBesselPanel);
  const double ex = std::exp(-x);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double nu = rule.nodes[i];
    auto k = bessel_k_log(Order::imaginary(nu), ex, k_spec());
    if (k.value == 0.0 && !std::isfinite(k.log_abs)) continue;
    nodes_.push_back(nu);
    weights_.push_back(k.sign * rule.wk[i]);
    log_scale_.push_back(k.log_abs + std::log(nu) + log_sinh(M_PI * nu) - 0.5 * nu * nu * t +
                         std::log(2.0 / (M_PI * M_PI)));
    gauss_.push_back(k.sign * rule.wg[i]);
  }
}

DensityEstimate MySpectralKernel::operator()(double y) const {
  const double ey = std::exp(-y);
  double kron = 0.0, gauss = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto k = bessel_k_log(Order::imaginary(nodes_[i]), ey, k_spec());
    if (k.value == 0.0 && !std::isfinite(k.log_abs)) continue;
    double f = k.sign * std::exp(log_scale_[i] + k.log_abs);
    kron += weights_[i] * f;
    gauss += gauss_[i] * f;
    abs_sum += std::abs(weights_[i] * f);
  }
  return {kron, gk_error(kron, gauss, abs_sum), DensityMethod::quadrature};
}

DensityEstimate my_q(double t, double y, double x, double mu, MyRoute route) {
  require_time(t, "my_q");
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(mu)) throw DomainError("my_q: non-finite input");
  if (route != MyRoute::spectral) return my_q_u(t, y, x, mu);
  MySpectralKernel kernel(t, x);
  auto q = kernel(y);
  const double pref = std::exp(-0.5 * mu * mu * t + mu * (x - y));
  return {pref * q.value, pref * q.error_bound, q.method};
}

namespace {

// N^mu(T, x) = e^{-mu^2 T/2 + mu x} (2/pi^2) int_0^inf e^{-nu^2 T/2} nu sinh(pi nu)
//              K_{i nu}(e^{-x}) 2^{mu-2} |Gamma((mu + i nu)/2)|^2 d nu,  mu >= 0.
double my_survival_mellin(double T, double x, double mu) {
  const double ex = std::exp(-x);
  auto f = [&](double nu) {
    if (nu <= 0.0) return 0.0;
    auto k = bessel_k_log(Order::imaginary(nu), ex, k_spec());
    double lg = 2.0 * log_gamma({0.5 * mu, 0.5 * nu}).real();
    double l = k.log_abs + std::log(nu) + log_sinh(M_PI * nu) - 0.5 * nu * nu * T + lg;
    return std::isfinite(l) ? k.sign * std::exp(l) : 0.0;
  };
  QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-14, 1e-11);
  auto r = integrate_adaptive<double>(f, 0.0, spectral_cutoff(T), spec, 4000);
  return 2.0 / (M_PI * M_PI) * std::exp(-0.5 * mu * mu * T + mu * x + (mu - 2.0) * M_LN2) * r.value;
}

}  // namespace

double my_survival(double T, double x, double mu) {
  require_time(T, "my_survival");
  if (mu >= 0.0 && T >= 1.0) return std::min(1.0, std::max(my_survival_mellin(T, x, mu), 0.0));
  const double sd = std::sqrt(T);
  const double lo = std::max(std::min(x, 0.0) - 6.0, x - std::max(mu * T, 0.0) - 10.0 * sd - 1.0);
  const double hi = std::max(x, x - mu * T) + 10.0 * sd + 1.0;
  const double pref_log = -0.5 * mu * mu * T + mu * x;
  QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-300, 1e-9);
  auto f = [&](double y) { return std::exp(pref_log - mu * y) * my_q_u(T, y, x, 0.0).value; };
  double integral = integrate_adaptive<double>(f, lo, hi, spec, 4000).value;
  return std::min(1.0, std::max(integral, 0.0));
}

DensityEstimate q_spectral(int n, double t, const Configuration& y, const Configuration& x, Q2Route route) {
  require_time(t, "q_spectral");
  if (n < 1) throw DomainError("q_spectral: N must be >= 1");
  if (n > 2) throw CapabilityError("q_spectral: N > 2 requires q_spectral_mc");
  require_size(x, n, "q_spectral");
  require_size(y, n, "q_spectral");
  if (n == 1) return {heat_kernel(t, y(0), x(0)), 0.0, DensityMethod::closed_form};
  if (t < kTimeMin) throw ConvergenceError("q_spectral: t below supported minimum 1e-3", 0.0, 0.0);
  const double sx = x(0) + x(1), sy = y(0) + y(1);
  if (route == Q2Route::factorized) {
    const double ex = 0.5 * (x(1) - x(0)) - M_LN2, ey = 0.5 * (y(1) - y(0)) - M_LN2;
    double p = heat_kernel(2.0 * t, sy, sx);
    auto q = my_q(0.5 * t, ey, ex, 0.0);
    return {p * q.value, p * q.error_bound, DensityMethod::quadrature};
  }
  // (1/4pi^3) int int e^{-t(S^2+D^2)/4} cos(S (X - Y)/2) K_{iD}(r_x) K_{iD}(r_y) D sinh(pi D) dS dD
  const double rx = 2.0 * std::exp(-0.5 * (x(1) - x(0)));
  const double ry = 2.0 * std::exp(-0.5 * (y(1) - y(0)));
  const double cut = std::sqrt(2.0) * spectral_cutoff(t);
  const double freq = 0.5 * std::abs(sx - sy);
  auto rd = panel_rule(0.0, cut, kBesselPanel);
  auto rs = panel_rule(-cut, cut, std::min(0.5, 1.0 / std::max(freq, 1e-12)));
  std::vector<double> fd(rd.nodes.size()), fs(rs.nodes.size());
  for (std::size_t i = 0; i < rd.nodes.size(); ++i) {
    double d = rd.nodes[i];
    auto kx = bessel_k_log(Order::imaginary(d), rx, k_spec());
    auto ky = bessel_k_log(Order::imaginary(d), ry, k_spec());
    double l = kx.log_abs + ky.log_abs + std::log(d) + log_sinh(M_PI * d) - 0.25 * t * d * d;
    fd[i] = std::isfinite(l) ? kx.sign * ky.sign * std::exp(l) : 0.0;
  }
  for (std::size_t j = 0; j < rs.nodes.size(); ++j) {
    double s = rs.nodes[j];
    fs[j] = std::exp(-0.25 * t * s * s) * std::cos(s * freq);
  }
  double kk = 0.0, gg = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < rd.nodes.size(); ++i) {
    for (std::size_t j = 0; j < rs.nodes.size(); ++j) {
      double f = fd[i] * fs[j];
      kk += rd.wk[i] * rs.wk[j] * f;
      gg += rd.wg[i] * rs.wg[j] * f;
      abs_sum += std::abs(rd.wk[i] * rs.wk[j] * f);
    }
  }
  // The integrand is even in D; the D-rule covers half the line.
  const double c = 2.0 / (4.0 * M_PI * M_PI * M_PI);
  return {c * kk, c * gk_error(kk, gg, abs_sum), DensityMethod::quadrature};
}

double long_time_constant(int n) {
  double c = 1.0;
  for (int k = 1; k <= n; ++k) c *= std::tgamma(static_cast<double>(k));
  return c / std::pow(2.0 * M_PI, 0.5 * n);
}

DensityEstimate q_spectral_mc(int n, double t, const Configuration& y, const Configuration& x, long samples,
                              std::uint64_t seed) {
  require_time(t, "q_spectral_mc");
  if (n < 2 || n > 3) throw CapabilityError("q_spectral_mc: N must be 2 or 3");
  if (t < 1.0) throw DomainError("q_spectral_mc: t >= 1 required");
  if (samples < 2) throw DomainError("q_spectral_mc: need at least 2 samples");
  require_size(x, n, "q_spectral_mc");
  require_size(y, n, "q_spectral_mc");
  constexpr std::uint32_t kPurpose = 0x5153;
  const double a = std::sqrt(2.0 / t);
  double nfact = 1.0;
  for (int k = 2; k <= n; ++k) nfact *= k;
  const double pref = std::pow(M_PI, 0.5 * n) * std::pow(2.0, 0.5 * n * n) /
                      (std::pow(2.0 * M_PI, n) * nfact) * std::pow(t, -0.5 * n * n);
  const QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-14, 1e-8);
  const bool same = (x - y).isZero(0.0);
  double sum = 0.0, sq = 0.0;
  for (long s = 0; s < samples; ++s) {
    CounterRng rng(seed, kPurpose, static_cast<std::uint64_t>(s));
    NormalSequence z(rng, 0);
    Eigen::VectorXd nu(n);
    for (int j = 0; j < n; ++j) nu(j) = z() * M_SQRT1_2;
    double w = 1.0;
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double d = nu(k) - nu(j);
        w *= d * std::sinh(M_PI * a * d) / (M_PI * a);
      }
    SpectralParameter lam{a * nu};
    std::complex<double> px = psi(n, lam, x, spec).value;
    std::complex<double> py = same ? px : psi(n, lam, y, spec).value;
    w *= (px * std::conj(py)).real();
    sum += w;
    sq += w * w;
  }
  const double m = static_cast<double>(samples);
  const double mean = sum / m;
  const double var = std::max(0.0, (sq / m - mean * mean) * m / (m - 1.0));
  return {pref * mean, pref * std::sqrt(var / m), DensityMethod::monte_carlo};
}

DensityEstimate drift_density(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x, const DriftVector& mu,
                              const DensityFn& base) {
  require_time(t, "drift_density");
  if (mu.size() != x.size() || y.size() != x.size()) throw DomainError("drift_density: size mismatch");
  require_finite(mu, "drift_density");
  auto b = base(t, y, x);
  const double f = std::exp(-0.5 * t * mu.squaredNorm() + mu.dot(x - y));
  return {f * b.value, f * b.error_bound, b.method};
}

double survival_n(int n, double T, const Configuration& x, const DriftVector& mu) {
  require_time(T, "survival_n");
  if (n < 1 || n > 2) throw CapabilityError("survival_n: N must be 1 or 2");
  require_size(x, n, "survival_n");
  require_size(mu, n, "survival_n");
  if (n == 1) return my_survival(T, x(0), mu(0));
  // Centre of mass integrates out exactly; the relative coordinate is the
  // one-dimensional killing BM at half time with drift mu2 - mu1.
  return my_survival(0.5 * T, 0.5 * (x(1) - x(0)) - M_LN2, mu(1) - mu(0));
}

namespace {

// Real-axis theta, switching to the contour form where the real-axis
// integral loses too many digits to cancellation.
ErrorBounded theta_any(double r, double t) {
  try {
    return theta(r, t);
  } catch (const ConvergenceError&) {
    return theta_contour(r, t);
  }
}

DensityEstimate transition_mu(int n, double t, const Configuration& y, const Configuration& x,
                              const DriftVector& mu) {
  if (n == 1) return my_q(t, y(0), x(0), mu(0));
  return drift_density(t, y, x, mu, [](double tt, const Eigen::VectorXd& yy, const Eigen::VectorXd& xx) {
    return q_spectral(2, tt, yy, xx);
  });
}

DensityEstimate transition_0(int n, double t, const Configuration& y, const Configuration& x) {
  if (n == 1) return my_q(t, y(0), x(0), 0.0);
  return q_spectral(2, t, y, x);
}

}  // namespace

DensityEstimate conditioned_density_T(int n, double s, double t, double T, const Configuration& y,
                                      const Configuration& x, const DriftVector& mu) {
  if (n < 1 || n > 2) throw CapabilityError("conditioned_density_T: N must be 1 or 2");
  if (!(0.0 <= s && s < t && t <= T)) throw DomainError("conditioned_density_T: need 0 <= s < t <= T");
  require_size(x, n, "conditioned_density_T");
  require_size(y, n, "conditioned_density_T");
  require_size(mu, n, "conditioned_density_T");
  auto q = transition_mu(n, t - s, y, x, mu);
  double num = t < T ? survival_n(n, T - t, y, mu) : 1.0;
  double den = survival_n(n, T - s, x, mu);
  double f = num / den;
  return {f * q.value, f * q.error_bound, q.method};
}

double ground_state(int n, const Configuration& x) {
  if (n < 1 || n > 2) throw CapabilityError("ground_state: N must be 1 or 2");
  require_size(x, n, "ground_state");
  if (n == 1) return std::exp(bessel_k_logderiv(0.0, std::exp(-x(0))).log_k);
  return 2.0 * std::exp(bessel_k_logderiv(0.0, 2.0 * std::exp(-0.5 * (x(1) - x(0)))).log_k);
}

DensityEstimate oconnell_density(int n, double t, const Configuration& y, const Configuration& x) {
  require_time(t, "oconnell_density");
  if (n < 1 || n > 2) throw CapabilityError("oconnell_density: N must be 1 or 2");
  require_size(x, n, "oconnell_density");
  require_size(y, n, "oconnell_density");
  auto q = transition_0(n, t, y, x);
  const double r = ground_state(n, y) / ground_state(n, x);
  return {r * q.value, r * q.error_bound, q.method};
}

DensityEstimate theta_n(int n, double t, const Configuration& y, ThetaRoute route) {
  require_time(t, "theta_n");
  if (n < 1 || n > 2) throw CapabilityError("theta_n: N must be 1 or 2");
  require_size(y, n, "theta_n");
  QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-15, 1e-11);
  if (n == 1) {
    // (1/pi) int_0^inf e^{-t nu^2/2} cos(nu y) d nu
    auto f = [&](double nu) { return std::exp(-0.5 * t * nu * nu) * std::cos(nu * y(0)) / M_PI; };
    auto r = integrate_adaptive<double>(f, 0.0, spectral_cutoff(t), spec, 4000);
    return {r.value, r.error, DensityMethod::quadrature};
  }
  const double sy = y(0) + y(1);
  const double r = 2.0 * std::exp(-0.5 * (y(1) - y(0)));
  if (route == ThetaRoute::reduced) {
    auto th = theta_any(r, 0.5 * t);
    double p = heat_kernel(2.0 * t, sy, 0.0);
    return {p * th.value, p * th.error_bound, DensityMethod::quadrature};
  }
  // (1/8pi^3) int int e^{-t(S^2+D^2)/4} cos(S Y/2) K_{iD}(r) D sinh(pi D) dS dD
  const double cut = std::sqrt(2.0) * spectral_cutoff(t);
  const double freq = 0.5 * std::abs(sy);
  auto rd = panel_rule(0.0, cut, kBesselPanel);
  auto rs = panel_rule(-cut, cut, std::min(0.5, 1.0 / std::max(freq, 1e-12)));
  std::vector<double> fd(rd.nodes.size()), fs(rs.nodes.size());
  for (std::size_t i = 0; i < rd.nodes.size(); ++i) {
    double d = rd.nodes[i];
    auto k = bessel_k_log(Order::imaginary(d), r, k_spec());
    double l = k.log_abs + std::log(d) + log_sinh(M_PI * d) - 0.25 * t * d * d;
    fd[i] = std::isfinite(l) ? k.sign * std::exp(l) : 0.0;
  }
  for (std::size_t j = 0; j < rs.nodes.size(); ++j) {
    double s = rs.nodes[j];
    fs[j] = std::exp(-0.25 * t * s * s) * std::cos(s * freq);
  }
  double kk = 0.0, gg = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < rd.nodes.size(); ++i)
    for (std::size_t j = 0; j < rs.nodes.size(); ++j) {
      double f = fd[i] * fs[j];
      kk += rd.wk[i] * rs.wk[j] * f;
      gg += rd.wg[i] * rs.wg[j] * f;
      abs_sum += std::abs(rd.wk[i] * rs.wk[j] * f);
    }
  // psi^(2) carries a factor 2 and dnu1 dnu2 = dS dD / 2; the D-rule is half
  // of an even integrand.
  const double c = 2.0 / (8.0 * M_PI * M_PI * M_PI);
  return {c * kk, c * gk_error(kk, gg, abs_sum), DensityMethod::quadrature};
}

double from_minus_infinity(FromMinusInf mode, double t, double y, double mu, double T) {
  require_time(t, "from_minus_infinity");
  if (!std::isfinite(y) || !std::isfinite(mu)) throw DomainError("from_minus_infinity: non-finite input");
  const double r = std::exp(-y);
  if (mode == FromMinusInf::infinite_T) {
    double k0 = std::exp(bessel_k_logderiv(0.0, r).log_k);
    return 2.0 * std::exp(-0.5 * mu * mu * t) * theta_any(r, t).value * k0;
  }
  if (!(mu > 0)) throw DomainError("from_minus_infinity: finite horizon needs mu > 0");
  if (!(t <= T)) throw DomainError("from_minus_infinity: need t <= T");
  const double g = std::tgamma(0.5 * mu);
  const double c = std::sqrt(2.0 * M_PI) * std::pow(2.0, 2.0 - mu) / (g * g) * std::pow(T, 1.5) *
                   std::exp(0.5 * mu * mu * (T - t) - M_PI * M_PI / T);
  const double surv = t < T ? my_survival(T - t, y, mu) : 1.0;
  return c * theta_any(r, t).value * std::exp(-mu * y) * surv;
}

ErrorBounded j_normalization(double T, double mu) {
  require_time(T, "j_normalization");
  if (!(mu > 0)) throw DomainError("j_normalization: mu > 0 required");
  auto f = [&](double y) { return theta_any(std::exp(-y), T).value * std::exp(-mu * y); };
  const double hi = 40.0 / mu + 0.5 * T;
  auto r = integrate_adaptive<double>(f, -8.0, hi, QuadratureSpec::with_tolerance(1e-300, 1e-8), 4000);
  return {r.value, r.error, Method::quadrature};
}

double i_mu0(int n, const DriftVector& mu) {
  if (n < 1) throw DomainError("i_mu0: N must be >= 1");
  require_size(mu, n, "i_mu0");
  if (n >= 2)
    throw CapabilityError("i_mu0: psi0 is translation invariant, the integral diverges along the centre of mass");
  if (!(mu(0) > 0)) throw DomainError("i_mu0: mu > 0 required");
  const double g = std::tgamma(0.5 * mu(0));
  return std::pow(2.0, mu(0) - 2.0) * g * g;
}

SelbergResult selberg_check(int n, long samples, std::uint64_t seed) {
  if (n < 1) throw DomainError("selberg_check: N must be >= 1");
  if (n > 4) throw CapabilityError("selberg_check: N <= 4");
  double exact = std::pow(2.0 * M_PI, 0.5 * n) * std::pow(2.0, -0.5 * n * n);
  for (int k = 1; k <= n; ++k) exact *= std::tgamma(k + 1.0);
  auto vdm2 = [&](const Eigen::VectorXd& v) {
    double p = vandermonde(v);
    return p * p;
  };
  if (n <= 3) {
    auto rule = gauss_hermite(n + 2);
    const int m = static_cast<int>(rule.nodes.size());
    std::vector<int> idx(n, 0);
    Eigen::VectorXd v(n);
    double sum = 0.0;
    while (true) {
      double w = 1.0;
      for (int j = 0; j < n; ++j) {
        v(j) = rule.nodes(idx[j]);
        w *= rule.weights(idx[j]);
      }
      sum += w * vdm2(v);
      int j = 0;
      while (j < n && ++idx[j] == m) idx[j++] = 0;
      if (j == n) break;
    }
    return {sum, exact, 1e-14 * sum};
  }
  constexpr std::uint32_t kPurpose = 0x5345;
  double sum = 0.0, sq = 0.0;
  for (long s = 0; s < samples; ++s) {
    NormalSequence z(CounterRng(seed, kPurpose, static_cast<std::uint64_t>(s)), 0);
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j) v(j) = z() * M_SQRT1_2;
    double w = vdm2(v);
    sum += w;
    sq += w * w;
  }
  const double m = static_cast<double>(samples);
  const double mean = sum / m;
  const double se = std::sqrt(std::max(0.0, sq / m - mean * mean) / (m - 1.0));
  const double scale = std::pow(M_PI, 0.5 * n);
  return {scale * mean, exact, scale * se};
}

}  // namespace oconnell
