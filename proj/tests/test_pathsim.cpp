#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "oconnell/parallel.hpp"
#include "oconnell/pathsim.hpp"

using namespace oconnell;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) r(i++) = a;
  return r;
}

SimConfig config(int n, double t, double dt, long paths, std::uint64_t seed) {
  SimConfig c;
  c.n_particles = n;
  c.t_final = t;
  c.dt = dt;
  c.paths = paths;
  c.seed = seed;
  return c;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("statistics helpers") {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(1000, 0.1);
  CHECK(compensated_sum(v) == doctest::Approx(100.0).epsilon(1e-15));
  std::vector<double> u;
  for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000);
  CHECK(ks_statistic(u, [](double x) { return x; }) == doctest::Approx(0.0005).epsilon(1e-9));
  CHECK(ks_two_sample(u, u) == 0.0);
  std::vector<double> shifted = u;
  for (double& x : shifted) x += 0.1;
  double d = ks_two_sample(u, shifted);
  CHECK(d >= 0.1);
  CHECK(d <= 0.101 + 1e-12);
  TabulatedCdf g([](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); }, -9, 9, 600);
  for (double x : {-2.0, -0.3, 0.0, 1.7}) CHECK(std::abs(g(x) - normal_cdf(x)) < 1e-5);
  auto h = Histogram::build(u, {}, 0, 1, 20);
  double integral = 0;
  for (double d : h.density) integral += d * 0.05;
  CHECK(std::abs(integral - 1) < 1e-12);
  CHECK(quantile(u, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bes3_cdf(1e9, 1) == doctest::Approx(1.0));
}

TEST_CASE("Feynman-Kac weight") {
  const double dt = 1e-3;
  Eigen::MatrixXd one = Eigen::MatrixXd::Random(50, 1);
  CHECK(fk_weight(one, dt) == 1.0);
  Eigen::MatrixXd far(50, 3);
  for (int k = 0; k < 50; ++k) far.row(k) << 0.01 * k, 40 + 0.01 * k, 80 + 0.01 * k;
  CHECK(fk_weight(far, dt) >= 1 - 1e-10);
  Eigen::MatrixXd ordered(200, 2);
  for (int k = 0; k < 200; ++k) ordered.row(k) << 0.0, 1.0 + 0.001 * k;
  Eigen::MatrixXd swapped = ordered.rowwise().reverse();
  CHECK(fk_weight(ordered, dt, 0.02) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fk_weight(swapped, dt, 0.02) < 1e-8);
  Eigen::MatrixXd my(3, 1);
  my << 0.0, 0.0, 0.0;
  CHECK(fk_weight(my, 0.1, 1.0, Potential::matsumoto_yor) == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config(2, 1, 2, 10, 1).validate(), DomainError);
  CHECK_THROWS_AS(config(2, 1, 1e-3, 0, 1).validate(), DomainError);
  CHECK(config(1, 1, 3e-4, 1, 1).steps() == 3333);
}

TEST_CASE("killed Brownian density estimates") {
  auto c1 = config(1, 1, 1e-3, 100000, 5);
  auto d1 = fk_density(c1, vec({0}), vec({0.5}));
  CHECK(std::abs(d1.value - heat_kernel(1, 0.5, 0)) < 3 * d1.std_error);
  CHECK(d1.dt_bias == 0.0);

  auto c2 = config(2, 1, 2e-3, 20000, 6);
  Eigen::VectorXd x = vec({0, 2}), y = vec({0.5, 2.5});
  auto w = fk_density(c2, x, y);
  double exact = q_spectral(2, 1, y, x).value;
  CHECK(std::abs(w.value - exact) < 3 * w.std_error + std::abs(w.dt_bias) + w.smoothing_bias);
  c2.kill_mode = KillMode::bernoulli;
  auto b = fk_density(c2, x, y);
  CHECK(std::abs(w.value - b.value) < 3 * std::hypot(w.std_error, b.std_error));
  CHECK(std::abs(b.value - exact) < 3 * b.std_error + b.smoothing_bias);
}

TEST_CASE("survival estimates") {
  auto c = config(1, 1, 1e-3, 20000, 8);
  auto s = fk_survival(c, vec({0}), vec({0}), 1.0, Potential::matsumoto_yor);
  CHECK(std::abs(s.mean - my_survival(1, 0, 0)) < 3 * s.std_error + 2e-3);
  // drift towards the wall
  auto sm = fk_survival(c, vec({0}), vec({0.8}), 1.0, Potential::matsumoto_yor);
  CHECK(std::abs(sm.mean - my_survival(1, 0, 0.8)) < 3 * sm.std_error + 2e-3);
  auto tiny = fk_survival(config(2, 1e-3, 1e-4, 2000, 9), vec({0, 5}), vec({0, 0}));
  CHECK(tiny.mean >= 0.999);

  // A soft wall e^{-gap/eps} acts as a hard wall at gap -2 eps (log(1/eps) - gamma).
  const double eps = 0.05;
  auto cw = config(2, 1, 1e-4, 20000, 10);
  auto sw = fk_survival(cw, vec({0, 2}), vec({0, 0}), eps);
  double a = 2 * eps * (std::log(1 / eps) - kEulerGamma);
  CHECK(std::abs(sw.mean - std::erf((2 + a) / 2)) < 0.01);

  // nested horizons on the same paths
  auto e1 = fk_ensemble(config(2, 0.5, 1e-3, 500, 11), vec({0, 0.5}), vec({0, 0}));
  auto e2 = fk_ensemble(config(2, 1.0, 1e-3, 500, 11), vec({0, 0.5}), vec({0, 0}));
  CHECK((e2.weight.array() <= e1.weight.array()).all());
  CHECK((e2.weight.array() > 0).all());
  CHECK((e2.weight.array() <= 1).all());
}

TEST_CASE("explicit Matsumoto-Yor construction") {
  auto c = config(1, 1, 1e-3, 20000, 12);
  // K_mu = K_{-mu}: the laws for mu and -mu coincide
  auto plus = my_explicit(c, 0.5), minus = my_explicit(config(1, 1, 1e-3, 20000, 21), -0.5);
  CHECK(ks_two_sample(plus.coordinate(0), minus.coordinate(0)) < 0.03);
  auto far = my_explicit(c, 2.0);
  CHECK(ks_two_sample(plus.coordinate(0), far.coordinate(0)) > 0.1);
  // started from -infinity: compare with 2 theta K0
  auto zero = my_explicit(c, 0.0);
  TabulatedCdf law([](double y) { return from_minus_infinity(FromMinusInf::infinite_T, 1, y, 0); }, -4, 12, 400);
  CHECK(ks_statistic(zero.coordinate(0), law) < 0.02);
}

TEST_CASE("Matsumoto-Yor diffusion") {
  CHECK(my_drift(-6, 0) > 300);
  // log-derivative asymptotics: drift -> 1/(eta + log 2 - gamma) for large eta at mu = 0
  for (double eta : {6.0, 12.0}) CHECK(my_drift(eta, 0) == doctest::Approx(1 / (eta + M_LN2 - kEulerGamma)).epsilon(0.01));
  CHECK(my_drift(8, 0.7) == doctest::Approx(0.7).epsilon(1e-3));
  auto left = sde_my(config(1, 0.5, 1e-3, 5000, 13), -6, 0);
  long above = 0;
  for (double v : left.coordinate(0)) above += v > -4;
  CHECK(above >= 0.99 * 5000);
  auto e = sde_my(config(1, 1, 1e-3, 20000, 14), 0, 0);
  TabulatedCdf law([](double y) { return oconnell_density(1, 1, vec({y}), vec({0})).value; }, -4, 8, 300);
  CHECK(ks_statistic(e.coordinate(0), law) < 0.02);
}

TEST_CASE("two-particle O'Connell diffusion") {
  auto f = oconnell_drift(2, vec({0, 1.5}));
  CHECK(f.sum() == doctest::Approx(0.0));
  CHECK((f - drift_field(2, vec({0, 1.5}))).cwiseAbs().maxCoeff() < 1e-8);

  const double t = 1;
  auto c = config(2, t, 1e-3, 20000, 15);
  auto e = sde_oconnell(c, vec({0, 2}));
  Eigen::VectorXd com = 0.5 * (e.terminal.col(0) + e.terminal.col(1));
  auto m = sample_mean(com);
  CHECK(std::abs(m.mean - 1.0) < 3 * m.std_error);
  Eigen::VectorXd sq = (com.array() - 1.0).square();
  auto v = sample_mean(sq);
  CHECK(std::abs(v.mean - t / 2) < 3 * v.std_error);

  // relative coordinate against the one-dimensional diffusion at t/2
  std::vector<double> eta(e.size());
  for (long i = 0; i < e.size(); ++i) eta[i] = 0.5 * (e.terminal(i, 1) - e.terminal(i, 0)) - M_LN2;
  auto my = sde_my(config(1, t / 2, 5e-4, 20000, 16), 1 - M_LN2, 0);
  CHECK(ks_two_sample(eta, my.coordinate(0)) < 0.03);

  // drift sanity over the first step
  auto one = sde_oconnell(config(2, 1e-3, 1e-3, 100000, 17), vec({0, 0.5}));
  Eigen::VectorXd inc = one.terminal.col(1).array() - 0.5;
  auto mi = sample_mean(inc);
  CHECK(std::abs(mi.mean - 1e-3 * oconnell_drift(2, vec({0, 0.5}))(1)) < 3 * mi.std_error);
}

TEST_CASE("Dyson Brownian motion") {
  auto c = config(2, 1, 1e-3, 20000, 18);
  auto e = sde_dyson(c, vec({0, 1}));
  std::vector<double> g = e.gap(0);
  Eigen::VectorXd g2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) g2(i) = g[i] * g[i];
  auto m = sample_mean(g2);
  CHECK(std::abs(m.mean - 7.0) < 3 * m.std_error);
  for (double v : g) CHECK_FALSE(v <= 0);

  // gap / sqrt 2 is BES(3); transition law from r0 = 0.2
  const double r0 = 0.2;
  auto from_r0 = sde_dyson(config(2, 1, 1e-3, 20000, 19), vec({0, r0 * std::sqrt(2.0)}));
  std::vector<double> r = from_r0.gap(0);
  for (double& v : r) v /= std::sqrt(2.0);
  auto bes3_from = [&](double x) {
    if (x <= 0) return 0.0;
    // P(R_1 <= x) = int_0^x (y / r0)(phi(y - r0) - phi(y + r0)) dy
    auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI); };
    return (normal_cdf(x - r0) - normal_cdf(-r0)) + (normal_cdf(x + r0) - normal_cdf(r0)) -
           (phi(x - r0) - phi(x + r0)) / r0;
  };
  CHECK(bes3_from(50) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ks_statistic(r, bes3_from) < 0.02);
  CHECK_THROWS_AS(sde_dyson(c, vec({1, 0})), DomainError);
}

TEST_CASE("scaled drift approaches the Dyson drift") {
  for (double eps : {0.1, 0.05}) {
    auto f = oconnell_drift(2, vec({0, 1}), eps);
    // small-argument K0 asymptotics give 1/(g - 2 eps gamma)
    CHECK(f(1) == doctest::Approx(1 / (1 - 2 * eps * kEulerGamma)).epsilon(2e-3));
    CHECK(f(0) == doctest::Approx(-f(1)));
  }
  CHECK(dyson_drift(vec({0, 1}))(0) == -1.0);
}

TEST_CASE("thread count does not change results") {
  auto c = config(2, 0.2, 1e-3, 3000, 21);
  auto run = [&](const char* threads) {
    setenv("OCONNELL_THREADS", threads, 1);
    auto e = sde_oconnell(c, vec({0, 1}));
    auto f = fk_ensemble(c, vec({0, 1}), vec({0, 0}));
    return std::pair{e.terminal, f.weight};
  };
  auto a = run("1"), b = run("4"), d = run("8");
  unsetenv("OCONNELL_THREADS");
  CHECK((a.first.array() == b.first.array()).all());
  CHECK((a.first.array() == d.first.array()).all());
  CHECK((a.second.array() == d.second.array()).all());
}
