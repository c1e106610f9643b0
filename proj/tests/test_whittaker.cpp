#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "oconnell/quadrature.hpp"
#include "oconnell/random.hpp"
#include "oconnell/whittaker.hpp"

using namespace oconnell;
using cd = std::complex<double>;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) r(i++) = a;
  return r;
}

// psi0 for N = 3 by a tensor Gauss-Legendre rule on the closed-form N = 2
// kernel, using the standard library Bessel function.
double psi0_3_oracle(const Eigen::VectorXd& x) {
  auto rule = gauss_legendre(96);
  auto map = [&](double a, double b, int i) { return 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]; };
  double a1 = x(0) - 6, b1 = x(1) + 6, a2 = x(1) - 6, b2 = x(2) + 6;
  double sum = 0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    double t1 = map(a1, b1, i);
    for (int k = 0; k < rule.nodes.size(); ++k) {
      double t2 = map(a2, b2, k);
      double f = -std::exp(-(t1 - x(0))) - std::exp(-(x(1) - t1)) - std::exp(-(t2 - x(1))) -
                 std::exp(-(x(2) - t2));
      double kern = 2.0 * std::cyl_bessel_k(0.0, 2.0 * std::exp(-0.5 * (t2 - t1)));
      sum += rule.weights[i] * rule.weights[k] * std::exp(f) * kern;
    }
  }
  return sum * 0.25 * (b1 - a1) * (b2 - a2);
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  auto a = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(a == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter rng streams") {
  CounterRng r(42, 1, 7), same(42, 1, 7), other(42, 2, 7);
  CHECK(r.block(3) == same.block(3));
  CHECK(r.block(3) != other.block(3));
  double mean = 0, sq = 0;
  const int n = 200000;
  NormalSequence z(r, 0);
  for (int i = 0; i < n; ++i) {
    double v = z();
    mean += v;
    sq += v * v;
  }
  mean /= n;
  sq /= n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sq - 1.0) < 5.0 * std::sqrt(2.0 / n));
  for (int i = 0; i < 1000; ++i) {
    auto u = r.uniform_pair(i);
    CHECK(u[0] > 0.0);
    CHECK(u[1] < 1.0);
  }
}

TEST_CASE("triangular array and chamber") {
  CHECK(in_weyl_chamber(vec({-1, 0, 2})));
  CHECK_FALSE(in_weyl_chamber(vec({0, 0})));
  TriangularArray t(vec({0.5, 1.5, 3.0}));
  CHECK(t(3, 2) == 1.5);
  t.set(2, 1, 1.0);
  CHECK(t(2, 1) == 1.0);
  CHECK_THROWS_AS(t.set(3, 1, 0.0), DomainError);
  CHECK_THROWS_AS(t(4, 1), DomainError);
  CHECK_THROWS_AS(TriangularArray(vec({0, NAN})), DomainError);
}

TEST_CASE("givental exponent") {
  TriangularArray t(vec({0.0, 1.0}));
  t.set(1, 1, 0.5);
  SpectralParameter l{vec({0.3, -0.7})};
  // lambda_1 T11 + lambda_2 (x1 + x2 - T11) - e^{-(T11 - x1)} - e^{-(x2 - T11)}
  cd expect = cd(0, 0.3) * 0.5 + cd(0, -0.7) * 0.5 - 2.0 * std::exp(-0.5);
  CHECK(std::abs(givental_exponent(l, t) - expect) < 1e-15);

  TriangularArray u(vec({0.0, 0.0, 0.0}));
  CHECK(std::abs(givental_exponent(SpectralParameter::zero(3), u) + 6.0) < 1e-15);
}

TEST_CASE("psi at N = 2 against the Bessel closed form") {
  auto p = psi(2, SpectralParameter::zero(2), vec({0, 0}));
  CHECK(std::abs(p.value - 0.227787745499066871305) < 1e-11);
  auto q = psi(2, SpectralParameter{vec({1, -1})}, vec({0, 1}));
  CHECK(std::abs(q.value - 0.158509566350694451198) < 1e-11);
  for (double g : {-3.0, 0.0, 2.0, 6.0}) {
    SpectralParameter l{vec({0.8, 2.1})};
    Eigen::VectorXd x = vec({0.4, 0.4 + g});
    auto d = psi(2, l, x);
    cd c = psi2_closed_form(l, x);
    CHECK(std::abs(d.value - c) < 1e-10 * std::max(1.0, std::abs(c)));
    CHECK(d.error_bound < 1e-9);
  }
}

TEST_CASE("psi symmetries at N = 3") {
  SpectralParameter l{vec({0.5, -0.2, 1.1})};
  Eigen::VectorXd x = vec({-0.5, 0.3, 1.2});
  cd base = psi(3, l, x).value;
  // symmetric in the spectral parameter
  SpectralParameter perm{vec({1.1, 0.5, -0.2})};
  CHECK(std::abs(psi(3, perm, x).value - base) < 1e-9 * std::abs(base));
  // conjugation
  CHECK(std::abs(psi(3, l.negated(), x).value - std::conj(base)) < 1e-10 * std::abs(base));
  // translation covariance
  const double c = 0.7;
  Eigen::VectorXd xs = x.array() + c;
  cd shifted = psi(3, l, xs).value;
  CHECK(std::abs(shifted - std::polar(1.0, c * l.nu.sum()) * base) < 1e-9 * std::abs(base));
  // direct nesting against the closed-form inner row
  CHECK(std::abs(psi3_recursive(l, x).value - base) < 1e-9 * std::abs(base));
}

TEST_CASE("psi0 recursion") {
  for (auto x : {vec({0, 0, 0}), vec({-1, 0.5, 1}), vec({-3, 0, 4})}) {
    double ref = psi0_3_oracle(x);
    auto r = psi0(3, x);
    CHECK(std::abs(r.value - ref) < 1e-9 * ref);
    CHECK(std::abs(psi(3, SpectralParameter::zero(3), x).value - r.value) < 1e-6 * ref);
  }
  auto two = psi0(2, vec({0, 1}));
  CHECK(std::abs(two.value - 2.0 * std::cyl_bessel_k(0.0, 2.0 * std::exp(-0.5))) < 1e-12);
  // psi0 at N = 4 is translation invariant and positive
  Eigen::VectorXd x4 = vec({-1, 0, 0.5, 2});
  double a = psi0(4, x4).value;
  double b = psi0(4, (x4.array() + 2.5).matrix()).value;
  CHECK(a > 0);
  CHECK(std::abs(a - b) < 1e-10 * a);
  CHECK_THROWS_AS(psi0(5, Eigen::VectorXd::Zero(5)), CapabilityError);
  CHECK_THROWS_AS(psi(4, SpectralParameter::zero(4), Eigen::VectorXd::Zero(4)), CapabilityError);
}

TEST_CASE("drift field") {
  Eigen::VectorXd x2 = vec({0, 1.5});
  auto f2 = drift_field(2, x2);
  const double h = 1e-5;
  double fd = (std::log(std::cyl_bessel_k(0.0, 2.0 * std::exp(-0.5 * (1.5 + h)))) -
               std::log(std::cyl_bessel_k(0.0, 2.0 * std::exp(-0.5 * (1.5 - h))))) /
              (2 * h);
  CHECK(std::abs(f2(1) - fd) < 1e-8);
  CHECK(std::abs(f2(0) + f2(1)) < 1e-15);
  CHECK(f2(0) < 0);

  for (int n : {3, 4}) {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -1.0, 1.5);
    auto f = drift_field(n, x);
    auto g = psi0_log_gradient(n, x);
    CHECK(std::abs(f.sum()) < 1e-7);
    CHECK((f - g.grad).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(g.log_psi0 - std::log(psi0(n, x).value)) < 1e-12);
    // the drift pushes particles apart
    CHECK(f(0) < 0);
    CHECK(f(n - 1) > 0);
  }
  auto g2 = psi0_log_gradient(2, x2);
  CHECK((g2.grad - f2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("eigenfunction residual") {
  CHECK(eigen_residual(2, SpectralParameter{vec({0.4, -0.9})}, vec({0, 0.8})) < 1e-5);
  CHECK(eigen_residual(3, SpectralParameter{vec({0.3, 0.0, -0.6})}, vec({-0.4, 0.2, 1.0})) < 1e-5);
}

TEST_CASE("importance sampling estimate") {
  SpectralParameter l{vec({0.4, -0.3})};
  Eigen::VectorXd x = vec({0, 0.5});
  auto mc = psi_monte_carlo(2, l, x, 200000, 11);
  cd exact = psi2_closed_form(l, x);
  CHECK(mc.error_bound > 0);
  CHECK(std::abs(mc.value - exact) < 5.0 * mc.error_bound);

  SpectralParameter l3{vec({0.2, 0.0, -0.5})};
  Eigen::VectorXd x3 = vec({-0.3, 0.1, 0.9});
  auto mc3 = psi_monte_carlo(3, l3, x3, 200000, 12);
  cd e3 = psi(3, l3, x3).value;
  CHECK(std::abs(mc3.value - e3) < 5.0 * mc3.error_bound);
  // same seed, same answer
  auto again = psi_monte_carlo(3, l3, x3, 200000, 12);
  CHECK(again.value == mc3.value);
  CHECK_NOTHROW(psi_monte_carlo(5, SpectralParameter::zero(5), Eigen::VectorXd::LinSpaced(5, 0, 2), 1000, 1));
}
