#include "oconnell/whittaker.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "oconnell/random.hpp"

namespace oconnell {

bool in_weyl_chamber(const Eigen::Ref<const Eigen::VectorXd>& x) {
  for (Eigen::Index j = 0; j + 1 < x.size(); ++j)
    if (!(x(j) < x(j + 1))) return false;
  return true;
}

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& x, const char* what) {
  if (!x.allFinite()) throw DomainError(std::string(what) + ": non-finite component");
}

TriangularArray::TriangularArray(const Configuration& bottom)
    : n_(static_cast<int>(bottom.size())), data_(Eigen::VectorXd::Zero(n_ * (n_ + 1) / 2)) {
  if (n_ < 1) throw DomainError("TriangularArray: size must be >= 1");
  require_finite(bottom, "TriangularArray");
  for (int j = 1; j <= n_; ++j) data_[index(n_, j)] = bottom(j - 1);
}

int TriangularArray::index(int k, int j) const {
  if (k < 1 || k > n_ || j < 1 || j > k) throw DomainError("TriangularArray: index out of range");
  return k * (k - 1) / 2 + (j - 1);
}

void TriangularArray::set(int k, int j, double value) {
  if (k == n_) throw DomainError("TriangularArray: bottom row is fixed");
  data_[index(k, j)] = value;
}

Eigen::VectorXd TriangularArray::row(int k) const {
  Eigen::VectorXd r(k);
  for (int j = 1; j <= k; ++j) r(j - 1) = (*this)(k, j);
  return r;
}

std::complex<double> givental_exponent(const SpectralParameter& lambda, const TriangularArray& t) {
  const int n = t.size();
  if (lambda.size() != n) throw DomainError("givental_exponent: size mismatch");
  std::complex<double> f = 0.0;
  for (int k = 1; k <= n; ++k) {
    double row = 0.0, above = 0.0;
    for (int j = 1; j <= k; ++j) row += t(k, j);
    for (int j = 1; j < k; ++j) above += t(k - 1, j);
    f += lambda.lambda(k - 1) * (row - above);
  }
  for (int k = 1; k < n; ++k)
    for (int j = 1; j <= k; ++j)
      f -= std::exp(-(t(k, j) - t(k + 1, j))) + std::exp(-(t(k + 1, j + 1) - t(k, j)));
  return f;
}

namespace {

constexpr double kMargin = 4.0;  // e^{-e^4} ~ 2e-24

template <class Scalar>
Scalar row_weight(double decay, double phase);
template <>
double row_weight<double>(double decay, double) {
  return std::exp(decay);
}
template <>
std::complex<double> row_weight<std::complex<double>>(double decay, double phase) {
  return std::polar(std::exp(decay), phase);
}

template <class Scalar>
struct RowResult {
  Scalar fine{};
  Scalar coarse{};
  double abs_sum = 0.0;
  double inner_err = 0.0;  // propagated error of the inner values
  Eigen::VectorXd grad;  // sum of dF/dx_j * weight * inner (fine lattice)
};

std::int64_t gap_key(const std::vector<int>& idx) {
  std::int64_t key = 0;
  for (std::size_t j = 1; j < idx.size(); ++j) key = key * 4096 + (idx[j] - idx[j - 1] + 2048);
  return key;
}

// Integral over row N-1 of exp(row coupling + lambda_N phase) * inner(t),
// on the lattice x_1 + h Z truncated to per-entry boxes. The inner function
// is translation covariant: inner(t) = shift(t_1) * at_origin(t - t_1).
// The coarse sum uses the 2h sub-lattice for an error estimate.
// at_origin returns the inner value and its absolute error.
template <class Scalar, class AtOrigin, class Shift>
RowResult<Scalar> row_integral(const Eigen::VectorXd& x, double nu_top, double h, AtOrigin&& at_origin,
                               Shift&& shift, bool want_grad = false) {
  const int n = static_cast<int>(x.size());
  const int d = n - 1;
  const double o = x(0);
  std::vector<int> lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    double a = std::min(x(j), x(j + 1)) - kMargin;
    double b = std::max(x(j), x(j + 1)) + kMargin;
    lo[j] = static_cast<int>(std::ceil((a - o) / h));
    hi[j] = static_cast<int>(std::floor((b - o) / h));
  }
  RowResult<Scalar> out;
  if (want_grad) out.grad = Eigen::VectorXd::Zero(n);
  std::unordered_map<std::int64_t, std::pair<Scalar, double>> memo;
  std::vector<int> idx(lo);
  Eigen::VectorXd t(d), t0(d), dfdx(n);
  const double sx = x.sum();
  while (true) {
    for (int j = 0; j < d; ++j) t(j) = o + h * idx[j];
    double decay = 0.0;
    for (int j = 0; j < d; ++j) decay -= std::exp(-(t(j) - x(j))) + std::exp(-(x(j + 1) - t(j)));
    if (decay > -745.0) {
      Scalar w = row_weight<Scalar>(decay, nu_top * (sx - t.sum()));
      std::int64_t key = gap_key(idx);
      auto it = memo.find(key);
      std::pair<Scalar, double> base;
      if (it == memo.end()) {
        t0 = t.array() - t(0);
        base = at_origin(t0);
        memo.emplace(key, base);
      } else {
        base = it->second;
      }
      Scalar s = shift(t(0));
      Scalar term = w * base.first * s;
      out.inner_err += magnitude(w * s) * base.second;
      out.fine += term;
      out.abs_sum += magnitude(term);
      bool even = true;
      for (int j = 0; j < d; ++j) even = even && (idx[j] % 2 == 0);
      if (even) out.coarse += term;
      if constexpr (std::is_same_v<Scalar, double>) {
        if (want_grad) {
          dfdx.setZero();
          for (int j = 0; j < d; ++j) {
            dfdx(j) -= std::exp(-(t(j) - x(j)));
            dfdx(j + 1) += std::exp(-(x(j + 1) - t(j)));
          }
          out.grad += dfdx * term;
        }
      }
    }
    int j = 0;
    while (j < d && ++idx[j] > hi[j]) {
      idx[j] = lo[j];
      ++j;
    }
    if (j == d) break;
  }
  const double hd = std::pow(h, d);
  out.fine *= hd;
  out.coarse *= std::pow(2.0 * h, d);
  out.abs_sum *= hd;
  out.inner_err *= hd;
  if (want_grad) out.grad *= hd;
  return out;
}

// Error of the fine trapezoid sum: the rule converges like e^{-c/h}, so
// the fine error is about the square of the relative fine/coarse gap.
template <class Scalar>
double trapezoid_error(const RowResult<Scalar>& r) {
  double v = magnitude(r.fine);
  double gap = magnitude(r.fine - r.coarse);
  double est = (v > 0 && gap < v) ? 10.0 * gap * gap / v : gap;
  return est + 1e-15 * r.abs_sum + r.inner_err;
}

double step_for(const SpectralParameter& lambda) {
  return std::min(0.25, M_PI * M_PI / (40.0 + 0.5 * M_PI * lambda.nu.cwiseAbs().sum()));
}

using ComplexPair = std::pair<std::complex<double>, double>;

ComplexPair psi_direct(const SpectralParameter& lambda, const Eigen::VectorXd& x, double h) {
  const int n = static_cast<int>(x.size());
  if (n == 1) return {std::polar(1.0, lambda.nu(0) * x(0)), 0.0};
  SpectralParameter inner = lambda.head(n - 1);
  const double s = inner.nu.sum();
  auto r = row_integral<std::complex<double>>(
      x, lambda.nu(n - 1), h, [&](const Eigen::VectorXd& t0) { return psi_direct(inner, t0, h); },
      [&](double a) { return std::polar(1.0, s * a); });
  return {r.fine, trapezoid_error(r)};
}

void check_config(int n, const Configuration& x, int max_n, const char* what) {
  if (n < 1) throw DomainError(std::string(what) + ": N must be >= 1");
  if (n > max_n) throw CapabilityError(std::string(what) + ": N=" + std::to_string(n) + " not supported");
  if (x.size() != n) throw DomainError(std::string(what) + ": configuration size differs from N");
  require_finite(x, what);
}

constexpr double kTableRelErr = 1e-12;

std::pair<double, double> psi0_2_table(const Eigen::VectorXd& t) {
  double g = t(1) - t(0);
  double v = 2.0 * std::exp(LogKTable::zero().at_log(M_LN2 - 0.5 * g).log_k);
  return {v, kTableRelErr * v};
}

// Row recursion for psi0 with the closed form at N = 2.
std::pair<double, double> psi0_level(const Eigen::VectorXd& x, double h) {
  const int n = static_cast<int>(x.size());
  if (n == 1) return {1.0, 0.0};
  if (n == 2) return psi0_2_table(x);
  auto r = row_integral<double>(
      x, 0.0, h, [&](const Eigen::VectorXd& t0) { return psi0_level(t0, h); },
      [](double) { return 1.0; });
  return {r.fine, trapezoid_error(r)};
}

}  // namespace

std::complex<double> psi2_closed_form(const SpectralParameter& lambda, const Configuration& x) {
  if (lambda.size() != 2 || x.size() != 2) throw DomainError("psi2_closed_form: N must be 2");
  auto k = bessel_k(Order::imaginary(lambda.nu(0) - lambda.nu(1)), 2.0 * std::exp(-0.5 * (x(1) - x(0))),
                    QuadratureSpec::with_tolerance(1e-300, 1e-13));
  return 2.0 * std::polar(1.0, 0.5 * lambda.nu.sum() * x.sum()) * k.value;
}

ComplexEstimate psi(int n, const SpectralParameter& lambda, const Configuration& x,
                    const QuadratureSpec& spec) {
  check_config(n, x, 3, "psi");
  if (lambda.size() != n) throw DomainError("psi: spectral parameter size differs from N");
  require_finite(lambda.nu, "psi");
  spec.validate();
  if (n == 1) return {std::polar(1.0, lambda.nu(0) * x(0)), 0.0, Method::series};
  double h = step_for(lambda);
  double err = 0, best = 0;
  for (int attempt = 0; attempt <= std::min(spec.max_refinements, 3); ++attempt, h *= 0.5) {
    auto [v, e] = psi_direct(lambda, x, h);
    err = e;
    best = std::abs(v);
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(v))) return {v, err, Method::quadrature};
  }
  throw ConvergenceError("psi: quadrature did not reach tolerance", best, err);
}

ComplexEstimate psi3_recursive(const SpectralParameter& lambda, const Configuration& x,
                               const QuadratureSpec& spec) {
  check_config(3, x, 3, "psi3_recursive");
  if (lambda.size() != 3) throw DomainError("psi3_recursive: spectral parameter must have 3 components");
  spec.validate();
  SpectralParameter inner = lambda.head(2);
  const double s = inner.nu.sum();
  double h = step_for(lambda);
  double err = 0, best = 0;
  for (int attempt = 0; attempt <= std::min(spec.max_refinements, 3); ++attempt, h *= 0.5) {
    auto r = row_integral<std::complex<double>>(
        x, lambda.nu(2), h, [&](const Eigen::VectorXd& t0) {
          return ComplexPair{psi2_closed_form(inner, t0), 0.0};
        },
        [&](double a) { return std::polar(1.0, s * a); });
    err = trapezoid_error(r);
    best = std::abs(r.fine);
    if (err <= std::max(spec.abs_tol, spec.rel_tol * best)) return {r.fine, err, Method::quadrature};
  }
  throw ConvergenceError("psi3_recursive: quadrature did not reach tolerance", best, err);
}

ComplexEstimate psi_monte_carlo(int n, const SpectralParameter& lambda, const Configuration& x,
                                long samples, std::uint64_t seed) {
  check_config(n, x, 5, "psi_monte_carlo");
  if (lambda.size() != n) throw DomainError("psi_monte_carlo: spectral parameter size differs from N");
  if (samples < 2) throw DomainError("psi_monte_carlo: need at least 2 samples");
  if (n == 1) return {std::polar(1.0, lambda.nu(0) * x(0)), 0.0, Method::series};
  constexpr std::uint32_t kPurpose = 0x5053;
  double sum_re = 0, sum_im = 0, sq_re = 0, sq_im = 0;
  for (long s = 0; s < samples; ++s) {
    CounterRng rng(seed, kPurpose, static_cast<std::uint64_t>(s));
    TriangularArray t(x);
    double log_q = 0.0;
    std::uint64_t block = 0;
    // Flat-top proposal with unit-rate exponential tails, row by row upward.
    for (int k = n - 1; k >= 1; --k) {
      for (int j = 1; j <= k; ++j) {
        double a = t(k + 1, j), b = t(k + 1, j + 1);
        double lo = std::min(a, b), hi = std::max(a, b), len = hi - lo;
        double u = rng.uniform_pair(block++)[0] * (len + 2.0);
        double v;
        if (u < 1.0) {
          v = lo + std::log(u);
          log_q += v - lo;
        } else if (u < 1.0 + len) {
          v = lo + (u - 1.0);
        } else {
          v = hi - std::log(u - 1.0 - len);
          log_q += hi - v;
        }
        log_q -= std::log(len + 2.0);
        t.set(k, j, v);
      }
    }
    std::complex<double> f = givental_exponent(lambda, t);
    std::complex<double> w = std::exp(f - log_q);
    sum_re += w.real();
    sum_im += w.imag();
    sq_re += w.real() * w.real();
    sq_im += w.imag() * w.imag();
  }
  const double m = static_cast<double>(samples);
  double mr = sum_re / m, mi = sum_im / m;
  double var = (sq_re / m - mr * mr + sq_im / m - mi * mi) * m / (m - 1.0);
  return {{mr, mi}, std::sqrt(std::max(var, 0.0) / m), Method::quadrature};
}

ErrorBounded psi0(int n, const Configuration& x, const QuadratureSpec& spec) {
  check_config(n, x, 4, "psi0");
  spec.validate();
  if (n == 1) return {1.0, 0.0, Method::series};
  if (n == 2) {
    // One row of quadrature over T_{1,1}.
    auto r = row_integral<double>(
        x, 0.0, 0.25, [](const Eigen::VectorXd&) { return std::pair{1.0, 0.0}; },
        [](double) { return 1.0; });
    return {r.fine, trapezoid_error(r), Method::quadrature};
  }
  auto [v, err] = psi0_level(x, 0.25);
  if (err > std::max(spec.abs_tol, spec.rel_tol * v))
    throw ConvergenceError("psi0: quadrature did not reach tolerance", v, err);
  return {v, err, Method::recurrence};
}

LogPsi0Gradient psi0_log_gradient(int n, const Configuration& x) {
  check_config(n, x, 4, "psi0_log_gradient");
  if (n < 2) return {0.0, Eigen::VectorXd::Zero(n)};
  if (n == 2) {
    auto e = LogKTable::zero().at_log(M_LN2 - 0.5 * (x(1) - x(0)));
    Eigen::VectorXd g(2);
    g << 0.5 * e.dlog, -0.5 * e.dlog;
    return {M_LN2 + e.log_k, g};
  }
  const double h = 0.25;
  auto r = row_integral<double>(
      x, 0.0, h, [&](const Eigen::VectorXd& t0) { return psi0_level(t0, h); },
      [](double) { return 1.0; }, true);
  return {std::log(r.fine), r.grad / r.fine};
}

Eigen::VectorXd drift_field(int n, const Configuration& x) {
  check_config(n, x, 4, "drift_field");
  if (n == 1) return Eigen::VectorXd::Zero(1);
  if (n == 2) {
    const double e = std::exp(-0.5 * (x(1) - x(0)));
    auto kd = bessel_k_logderiv(0.0, 2.0 * e, QuadratureSpec::with_tolerance(1e-300, 1e-13));
    Eigen::VectorXd f(2);
    f << kd.ratio * e, -kd.ratio * e;
    return f;
  }
  const double h = 1e-4 * std::max(1.0, x.cwiseAbs().maxCoeff());
  Eigen::VectorXd f(n);
  for (int j = 0; j < n; ++j) {
    Configuration xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    f(j) = (std::log(psi0(n, xp).value) - std::log(psi0(n, xm).value)) / (2.0 * h);
  }
  return f;
}

double eigen_residual(int n, const SpectralParameter& lambda, const Configuration& x) {
  check_config(n, x, 3, "eigen_residual");
  const QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-300, 1e-13);
  const double hd = 1e-3;
  auto value = [&](const Configuration& y) { return psi(n, lambda, y, spec).value; };
  const std::complex<double> c = value(x);
  std::complex<double> lap = 0.0;
  for (int j = 0; j < n; ++j) {
    Configuration xp = x, xm = x;
    xp(j) += hd;
    xm(j) -= hd;
    lap += (value(xp) - 2.0 * c + value(xm)) / (hd * hd);
  }
  double potential = 0.0;
  for (int j = 0; j + 1 < n; ++j) potential += std::exp(-(x(j + 1) - x(j)));
  std::complex<double> gamma_ev = 0.0;
  for (int j = 0; j < n; ++j) gamma_ev -= 0.5 * lambda.lambda(j) * lambda.lambda(j);
  return std::abs(-0.5 * lap + potential * c - gamma_ev * c);
}

}  // namespace oconnell
