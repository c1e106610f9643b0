#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <vector>

#include <Eigen/Dense>

#include "oconnell/errors.hpp"

namespace oconnell {

enum class Truncation { automatic, explicit_bounds };

struct QuadratureSpec {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_refinements = 10;
  Truncation truncation = Truncation::automatic;
  double lower = 0.0;
  double upper = 0.0;

  void validate() const;
  static QuadratureSpec with_tolerance(double abs_tol, double rel_tol);
};

template <class Scalar>
struct QuadResult {
  Scalar value{};
  double error = 0.0;
  long evaluations = 0;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

namespace detail {

// Sum of f(center + offset + k*step) over k >= 0 (and k < 0 unless one_sided),
// stopping each direction after a run of negligible values.
// Points inside the extents reached by earlier levels never trigger the
// stop, so a refinement pass cannot quit in a region where f is small.
template <class Scalar, class F>
Scalar sweep(F& f, double center, double offset, double step, bool one_sided,
             const QuadratureSpec& spec, double& running_max, double& abs_sum,
             long& evals, double extent[2]) {
  constexpr double kTiny = 1e-18;
  constexpr int kQuietRun = 4;
  constexpr long kMaxPoints = 4'000'000;
  Scalar total{};
  for (int dir : {1, -1}) {
    if (dir == -1 && one_sided) break;
    int quiet = 0;
    long k = dir == 1 ? 0 : -1;
    for (long n = 0;; ++n, k += dir) {
      double t = center + offset + static_cast<double>(k) * step;
      if (spec.truncation == Truncation::explicit_bounds &&
          (t < spec.lower || t > spec.upper))
        break;
      if (n > kMaxPoints)
        throw ConvergenceError("trapezoid: integrand does not decay", magnitude(total),
                               std::numeric_limits<double>::infinity());
      Scalar v = f(t);
      ++evals;
      double m = magnitude(v);
      if (!std::isfinite(m))
        throw ConvergenceError("trapezoid: non-finite integrand", magnitude(total),
                               std::numeric_limits<double>::infinity());
      total += v;
      abs_sum += m;
      running_max = std::max(running_max, m);
      double reach = (t - center) * dir;
      if (reach > extent[dir == 1 ? 0 : 1]) extent[dir == 1 ? 0 : 1] = reach;
      else continue;
      if (spec.truncation == Truncation::automatic) {
        if (running_max > 0 && m <= kTiny * running_max) {
          if (++quiet >= kQuietRun) break;
        } else {
          quiet = 0;
        }
      }
    }
  }
  return total;
}

}  // namespace detail

// Trapezoidal rule on the real line with step halving. Suited to smooth
// integrands with (double) exponential decay, for which the rule converges
// geometrically. With even=true the integrand is assumed symmetric about
// center and only the right half is sampled.
template <class Scalar, class F>
QuadResult<Scalar> integrate_line(F&& f, double center, double h0,
                                  const QuadratureSpec& spec = {}, bool even = false) {
  spec.validate();
  QuadResult<Scalar> out;
  double running_max = 0.0;
  double extent[2] = {-1.0, -1.0};
  auto level_sum = [&](double offset, double step, bool first) -> std::pair<Scalar, double> {
    double abs_sum = 0.0;
    Scalar s{};
    if (even) {
      auto g = [&](double t) { return f(t); };
      Scalar right = detail::sweep<Scalar>(g, center, offset, step, true, spec, running_max,
                                           abs_sum, out.evaluations, extent);
      if (first) {
        Scalar c = f(center);
        ++out.evaluations;
        s = right * 2.0 - c;
        abs_sum = 2.0 * abs_sum - magnitude(c);
      } else {
        s = right * 2.0;
        abs_sum *= 2.0;
      }
    } else {
      s = detail::sweep<Scalar>(f, center, offset, step, false, spec, running_max, abs_sum,
                                out.evaluations, extent);
    }
    return {s, abs_sum};
  };

  double h = h0;
  auto [s0, a0] = level_sum(0.0, h, true);
  Scalar integral = s0 * h;
  double abs_integral = a0 * h;
  for (int level = 1; level <= spec.max_refinements; ++level) {
    // New nodes at odd multiples of h/2.
    auto [s, a] = level_sum(0.5 * h, h, false);
    Scalar next = integral * 0.5 + s * (0.5 * h);
    abs_integral = 0.5 * abs_integral + 0.5 * h * a;
    h *= 0.5;
    double diff = magnitude(next - integral);
    integral = next;
    double floor = 64.0 * std::numeric_limits<double>::epsilon() * abs_integral;
    double target = std::max({spec.abs_tol, spec.rel_tol * magnitude(integral), floor});
    out.error = std::max(diff, floor);
    if (diff <= target) {
      out.value = integral;
      return out;
    }
  }
  throw ConvergenceError("trapezoid: no convergence after step halving", magnitude(integral),
                         out.error);
}

// tanh-sinh rule on a finite interval.
template <class Scalar, class F>
QuadResult<Scalar> integrate_tanh_sinh(F&& f, double a, double b,
                                       const QuadratureSpec& spec = {}) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto g = [&](double s) -> Scalar {
    double u = 0.5 * M_PI * std::sinh(s);
    double c = std::cosh(u);
    double w = half * 0.5 * M_PI * std::cosh(s) / (c * c);
    double x = mid + half * std::tanh(u);
    if (x <= a || x >= b || w == 0.0) return Scalar{};
    return f(x) * w;
  };
  QuadratureSpec inner = spec;
  inner.truncation = Truncation::explicit_bounds;
  inner.lower = -4.5;
  inner.upper = 4.5;
  return integrate_line<Scalar>(g, 0.0, 0.5, inner);
}

// exp-sinh rule on [a, inf).
template <class Scalar, class F>
QuadResult<Scalar> integrate_halfline(F&& f, double a, const QuadratureSpec& spec = {}) {
  auto g = [&](double s) -> Scalar {
    double e = std::exp(0.5 * M_PI * std::sinh(s));
    double w = 0.5 * M_PI * std::cosh(s) * e;
    if (!std::isfinite(w) || w == 0.0) return Scalar{};
    return f(a + e) * w;
  };
  QuadratureSpec inner = spec;
  inner.truncation = Truncation::explicit_bounds;
  inner.lower = -6.0;
  inner.upper = 6.0;
  return integrate_line<Scalar>(g, 0.0, 0.5, inner);
}

struct GaussKronrod15 {
  static const std::array<double, 8> xgk;
  static const std::array<double, 8> wgk;
  static const std::array<double, 4> wg;
};

// One Gauss-Kronrod 7/15 panel; error is |K15 - G7|.
template <class Scalar, class F>
QuadResult<Scalar> gauss_kronrod_panel(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  Scalar fc = f(c);
  Scalar kr = fc * GaussKronrod15::wgk[7];
  Scalar ga = fc * GaussKronrod15::wg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = hl * GaussKronrod15::xgk[j];
    Scalar f1 = f(c - dx);
    Scalar f2 = f(c + dx);
    kr += (f1 + f2) * GaussKronrod15::wgk[j];
    if (j % 2 == 1) ga += (f1 + f2) * GaussKronrod15::wg[j / 2];
  }
  QuadResult<Scalar> r;
  r.value = kr * hl;
  r.error = magnitude((kr - ga) * hl);
  r.evaluations = 15;
  return r;
}

// Globally adaptive Gauss-Kronrod on [a, b].
template <class Scalar, class F>
QuadResult<Scalar> integrate_adaptive(F&& f, double a, double b,
                                      const QuadratureSpec& spec = {}, int max_panels = 2000) {
  struct Panel {
    double a, b;
    QuadResult<Scalar> r;
    bool operator<(const Panel& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Panel> heap;
  auto first = gauss_kronrod_panel<Scalar>(f, a, b);
  heap.push({a, b, first});
  Scalar total = first.value;
  double err = first.error;
  long evals = 15;
  int panels = 1;
  while (true) {
    double target = std::max(spec.abs_tol, spec.rel_tol * magnitude(total));
    if (err <= target) break;
    if (panels >= max_panels) {
      throw ConvergenceError("adaptive Gauss-Kronrod: panel limit reached", magnitude(total),
                             err);
    }
    Panel p = heap.top();
    heap.pop();
    double m = 0.5 * (p.a + p.b);
    auto left = gauss_kronrod_panel<Scalar>(f, p.a, m);
    auto right = gauss_kronrod_panel<Scalar>(f, m, p.b);
    evals += 30;
    total += left.value + right.value - p.r.value;
    err += left.error + right.error - p.r.error;
    heap.push({p.a, m, left});
    heap.push({m, p.b, right});
    ++panels;
    if (m <= p.a || m >= p.b) break;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  Scalar sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().r.value;
    esum += heap.top().r.error;
    heap.pop();
  }
  return {sum, esum, evals};
}

// Gauss rules from the Golub-Welsch eigenproblem.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussRule gauss_legendre(int n);
// Nodes/weights for the weight function e^{-x^2} on the real line.
GaussRule gauss_hermite(int n);

// Wynn epsilon extrapolation of a sequence of partial sums.
class WynnEpsilon {
 public:
  void push(double partial_sum);
  double estimate() const { return estimate_; }
  double error() const { return error_; }
  int size() const { return static_cast<int>(sums_.size()); }

 private:
  std::vector<double> sums_;
  double estimate_ = 0.0;
  double error_ = std::numeric_limits<double>::infinity();
  double previous_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace oconnell
