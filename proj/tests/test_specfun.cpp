#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oconnell/specfun.hpp"

using namespace oconnell;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double k_real(double nu, double x) { return bessel_k(Order::real(nu), x).value; }
double k_imag(double nu, double x) { return bessel_k(Order::imaginary(nu), x).value; }

}  // namespace

TEST_CASE("quadrature engine") {
  SUBCASE("Gauss-Kronrod panel integrates degree 21 exactly") {
    auto f = [](double x) { return std::pow(x, 21) + 3 * x * x; };
    auto r = integrate_adaptive<double>(f, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(1.0 / 22 + 1.0).epsilon(1e-14));
  }
  SUBCASE("Gauss-Legendre and Gauss-Hermite rules") {
    auto gl = gauss_legendre(10);
    CHECK(gl.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK((gl.weights.array() * gl.nodes.array().pow(18)).sum() ==
          doctest::Approx(2.0 / 19).epsilon(1e-13));
    auto gh = gauss_hermite(6);
    // int x^4 e^{-x^2} = 3 sqrt(pi)/4
    CHECK((gh.weights.array() * gh.nodes.array().pow(4)).sum() ==
          doctest::Approx(0.75 * std::sqrt(M_PI)).epsilon(1e-13));
  }
  SUBCASE("trapezoid on the line: Gaussian") {
    auto r = integrate_line<double>([](double x) { return std::exp(-x * x); }, 0.0, 1.0);
    CHECK(rel(r.value, std::sqrt(M_PI)) < 1e-14);
  }
  SUBCASE("tanh-sinh with endpoint singularity") {
    auto r = integrate_tanh_sinh<double>([](double x) { return std::log(x); }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("exp-sinh on the half line") {
    auto r = integrate_halfline<double>([](double x) { return 1.0 / (1.0 + x * x); }, 0.0);
    CHECK(r.value == doctest::Approx(M_PI / 2).epsilon(1e-11));
  }
  SUBCASE("Wynn epsilon accelerates the alternating harmonic series") {
    WynnEpsilon w;
    double s = 0;
    for (int k = 1; k <= 20; ++k) {
      s += (k % 2 ? 1.0 : -1.0) / k;
      w.push(s);
    }
    CHECK(std::abs(w.estimate() - std::log(2.0)) < 1e-12);
  }
  SUBCASE("J0-oscillatory integral: int_0^inf J0(w) dw = 1") {
    auto r = integrate_j0_oscillatory([](double) { return 1.0; });
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("J0-oscillatory integral: int_0^inf J0(w) e^{-w} dw = 1/sqrt(2)") {
    auto r = integrate_j0_oscillatory([](double w) { return std::exp(-w); });
    CHECK(r.value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-11));
  }
}

TEST_CASE("gamma") {
  CHECK(oconnell::gamma(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oconnell::gamma(0.5) == doctest::Approx(1.7724538509055160273).epsilon(1e-13));
  CHECK(oconnell::gamma(4.0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK_THROWS_AS(oconnell::gamma(0.0), DomainError);
  CHECK_THROWS_AS(oconnell::gamma(-1.5), DomainError);
  CHECK_THROWS_AS(oconnell::gamma(NAN), DomainError);
}

TEST_CASE("complex log gamma") {
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.0, 30.0})
    CHECK(std::abs(oconnell::log_gamma({x, 0.0}).real() - std::lgamma(x)) < 1e-13 * std::max(1.0, std::abs(std::lgamma(x))));
  for (double y : {0.01, 0.3, 1.0, 5.0, 40.0}) {
    // |Gamma(iy)|^2 = pi / (y sinh(pi y)), |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
    double a = 2 * oconnell::log_gamma({0.0, y}).real();
    CHECK(a == doctest::Approx(std::log(M_PI / (y * std::sinh(M_PI * y)))).epsilon(1e-13));
    double b = 2 * oconnell::log_gamma({0.5, y}).real();
    CHECK(b == doctest::Approx(std::log(M_PI / std::cosh(M_PI * y))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(oconnell::log_gamma({-0.5, 1.0}), DomainError);
}

TEST_CASE("bessel_j0") {
  CHECK(bessel_j0(0.0).value == 1.0);
  // Partial sums of the power series with an alternating remainder bound.
  double s = 0, term = 1;
  for (int k = 0; k < 30; ++k) {
    s += term;
    term *= -0.25 / ((k + 1.0) * (k + 1.0));
  }
  CHECK(std::abs(bessel_j0(1.0).value - s) < 1e-15);
  CHECK(std::abs(bessel_j0(1.0).value - 0.7651976866) < 1e-10);
  CHECK(std::abs(bessel_j0(2.4048255577).value) < 1e-8);
  CHECK(bessel_j0(-3.0).value == bessel_j0(3.0).value);
  for (double z : {0.3, 5.0, 7.9, 8.1, 12.5, 20.0, 24.9, 25.1, 40.0, 150.0, 1e4}) {
    CAPTURE(z);
    CHECK(std::abs(bessel_j0(z).value - std::cyl_bessel_j(0.0, z)) < 1e-10);
  }
  for (int k = 1; k <= 40; ++k) CHECK(std::abs(bessel_j0(bessel_j0_zero(k)).value) < 1e-8);
  CHECK_THROWS_AS(bessel_j0(INFINITY), DomainError);
}

TEST_CASE("bessel_i") {
  CHECK(bessel_i(0.0, 1e-12).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rel(bessel_i(0.5, 1.0).value, std::sqrt(2.0 / M_PI) * std::sinh(1.0)) < 1e-12);
  CHECK(rel(bessel_i(0.5, 1.0).value, 0.9376748883) < 1e-10);
  // First three series terms of I_1(0.1); the remainder is about 5.4e-12.
  double third = 0.05 + 0.05 * 0.0025 / 2 + 0.05 * 0.0025 * 0.0025 / 12;
  CHECK(std::abs(bessel_i(1.0, 0.1).value - third) < 6e-12);
  for (double nu : {0.0, 0.3, 1.0, 2.5})
    for (double z : {0.01, 1.0, 10.0, 29.0, 31.0, 80.0}) {
      CAPTURE(nu);
      CAPTURE(z);
      CHECK(rel(bessel_i(nu, z).value, std::cyl_bessel_i(nu, z)) < 1e-10);
    }
  CHECK_THROWS_AS(bessel_i(0.0, -1.0), DomainError);
}

TEST_CASE("bessel_k real order") {
  CHECK(rel(k_real(0.5, 1.0), std::sqrt(M_PI / 2) * std::exp(-1.0)) < 1e-12);
  CHECK(std::abs(k_real(0.0, 1.0) - 0.4210244382) < 1e-10);
  // Two different explicit truncations agree.
  QuadratureSpec narrow;
  narrow.truncation = Truncation::explicit_bounds;
  narrow.lower = -6;
  narrow.upper = 6;
  QuadratureSpec wide = narrow;
  wide.lower = -9;
  wide.upper = 9;
  CHECK(std::abs(bessel_k(Order::real(0), 1.0, narrow).value -
                 bessel_k(Order::real(0), 1.0, wide).value) < 1e-10);
  for (double nu : {0.0, 0.3, 1.0, 2.0, 7.5})
    for (double x : {0.01, 0.2, 1.0, 5.0, 30.0, 200.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(rel(k_real(nu, x), std::cyl_bessel_k(nu, x)) < 1e-11);
    }
  CHECK(k_real(-0.7, 1.3) == k_real(0.7, 1.3));
  CHECK_THROWS_AS(k_real(0, 0.0), DomainError);
  CHECK_THROWS_AS(k_real(0, -1.0), DomainError);
}

TEST_CASE("bessel_k imaginary order") {
  for (double x : {0.5, 1.0, 2.0}) CHECK(k_imag(0.0, x) == doctest::Approx(k_real(0.0, x)).epsilon(1e-14));
  // Reference values from an independent arbitrary-precision evaluation.
  struct Ref {
    double nu, x, k, dk;
  };
  const Ref refs[] = {
      {1, 1, 0.28942803702599212763, -0.32545977186584141085},
      {2, 1.2130613194252668, 0.079254783175347225599, -0.023108022305887907195},
      {5, 0.5, -0.00042411714808406798747, 0.0010116794613899190698},
      {20, 1, -1.1699083627287349295e-14, 1.0060504981471866555e-13},
      {50, 2, 2.6159276326463948019e-35, 2.1715413913717027758e-34},
      {0.3, 3, 0.034286926735094664026, -0.039500125005710195567},
      {3, 10, 0.000011540111450067396975, -0.000011621065246563823694},
  };
  for (const auto& r : refs) {
    CAPTURE(r.nu);
    CHECK(rel(k_imag(r.nu, r.x), r.k) < 1e-10);
    CHECK(rel(bessel_k_deriv(Order::imaginary(r.nu), r.x).value, r.dk) < 1e-9);
  }
  for (double nu : {0.5, 2.0}) CHECK(k_imag(nu, 1.1) == k_imag(-nu, 1.1));
  // Very large order: value underflows, log-magnitude stays usable.
  auto big = bessel_k_log(Order::imaginary(600.0), 1.0);
  CHECK(std::isfinite(big.log_abs));
  CHECK(big.log_abs < -900.0);
  CHECK(big.log_abs > -0.5 * M_PI * 600.0 - 10.0);
}

TEST_CASE("bessel_k_deriv") {
  CHECK(std::abs(bessel_k_deriv(Order::real(0), 1.0).value + 0.6019072302) < 1e-9);
  CHECK(std::abs(bessel_k_deriv(Order::real(0), 1.0).value + std::cyl_bessel_k(1.0, 1.0)) < 1e-12);
  for (double x : {0.1, 1.0, 10.0}) CHECK(bessel_k_deriv(Order::real(0), x).value < 0);
  const double h = 1e-5;
  double fd = (k_real(0.5, 2 + h) - k_real(0.5, 2 - h)) / (2 * h);
  CHECK(std::abs(bessel_k_deriv(Order::real(0.5), 2.0).value - fd) < 1e-6);
  auto ld = bessel_k_logderiv(0.0, 600.0);
  CHECK(rel(ld.ratio, -std::cyl_bessel_k(1.0, 600.0) / std::cyl_bessel_k(0.0, 600.0)) < 1e-12);
}

TEST_CASE("Bessel equation residual for real order") {
  for (double nu : {0.0, 0.3, 1.0}) {
    for (double x = 0.2; x <= 5.0; x += 0.4) {
      const double h = 1e-4;
      double k0 = k_real(nu, x), kp = k_real(nu, x + h), km = k_real(nu, x - h);
      double d1 = (kp - km) / (2 * h), d2 = (kp - 2 * k0 + km) / (h * h);
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(std::abs(x * x * d2 + x * d1 - (x * x + nu * nu) * k0) < 1e-5);
    }
  }
}

TEST_CASE("K0 monotone and positive") {
  double prev = INFINITY;
  for (double x = 0.05; x < 20; x *= 1.3) {
    double v = k_real(0, x);
    CHECK(v > 0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("connection formula K = pi/2 (I_{-nu} - I_nu)/sin(nu pi)") {
  const double nu = 0.3;
  for (double x : {0.5, 1.0, 3.0}) {
    // I_{-nu} from its own power series (bessel_i takes nu >= 0).
    double s = 0, term = std::pow(0.5 * x, -nu) / std::tgamma(1 - nu);
    for (int k = 0; k < 60; ++k) {
      s += term;
      term *= 0.25 * x * x / ((k + 1.0) * (k + 1.0 - nu));
    }
    double conn = M_PI / 2 * (s - bessel_i(nu, x).value) / std::sin(nu * M_PI);
    CHECK(std::abs(conn - k_real(nu, x)) < 1e-8);
  }
}

TEST_CASE("Mellin transform of K0") {
  for (double mu : {0.5, 1.0, 2.0}) {
    auto f = [&](double s) {
      double z = std::exp(s);
      return k_real(0, z) * std::exp(mu * s);
    };
    auto r = integrate_line<double>(f, 0.0, 0.25);
    double exact = std::pow(2.0, mu - 2) * std::pow(oconnell::gamma(mu / 2), 2);
    CAPTURE(mu);
    CHECK(std::abs(r.value - exact) < 1e-6);
  }
  double exact1 = std::pow(2.0, -1.0) * std::pow(oconnell::gamma(0.5), 2);
  CHECK(exact1 == doctest::Approx(M_PI / 2).epsilon(1e-14));
}

TEST_CASE("theta") {
  const double refs[][3] = {{1, 1, 0.73907653130323191697},
                            {0.5, 50, 0.001107463173043642068},
                            {2, 0.5, 4.0453290901483014188},
                            {0.1, 2, 0.042256631634028223442},
                            {5, 10, 0.000073564131615358417855}};
  for (const auto& r : refs) {
    CAPTURE(r[0]);
    CAPTURE(r[1]);
    CHECK(rel(theta(r[0], r[1]).value, r[2]) < 1e-9);
  }
  CHECK(std::abs(theta(1, 1).value - theta_contour(1, 1).value) < 1e-6);
  CHECK(rel(theta_contour(0.1, 2).value, 0.042256631634028223442) < 1e-8);
  for (double r : {0.1, 1.0, 5.0})
    for (double t : {0.5, 2.0, 10.0}) CHECK(theta(r, t).value > 0);
  CHECK_THROWS_AS(theta(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(theta(1.0, 0.001), ConvergenceError);
}

TEST_CASE("log K table") {
  const auto& t = LogKTable::zero();
  for (double z : {1e-20, 1e-9, 0.01, 0.3, 1.0, 2.0, 17.0, 300.0, 1000.0, 2000.0}) {
    CAPTURE(z);
    auto e = t.at(z);
    if (z < 700) {
      CHECK(std::abs(e.log_k - std::log(std::cyl_bessel_k(0.0, z))) < 1e-9);
      CHECK(rel(e.dlog, -z * std::cyl_bessel_k(1.0, z) / std::cyl_bessel_k(0.0, z)) < 1e-8);
    }
  }
  LogKTable t3(0.3);
  for (double z : {1e-19, 0.01, 1.0, 10.0}) {
    CAPTURE(z);
    auto e = t3.at(z);
    CHECK(std::abs(e.log_k - std::log(std::cyl_bessel_k(0.3, z))) < 1e-9);
  }
}
