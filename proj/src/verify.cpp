#include "oconnell/verify.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <exception>
#include <map>

#include <json.hpp>

#include "oconnell/densities.hpp"
#include "oconnell/errors.hpp"
#include "oconnell/pathsim.hpp"
#include "oconnell/quadrature.hpp"
#include "oconnell/specfun.hpp"
#include "oconnell/stats.hpp"
#include "oconnell/whittaker.hpp"

namespace oconnell {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) r(i++) = a;
  return r;
}

// Collects checks and stamps each with the time since the previous one.
class Recorder {
 public:
  explicit Recorder(CriterionResult& out) : out_(out), last_(Clock::now()) {}

  void within_abs(const std::string& name, double computed, double expected, double tol) {
    push(name, computed, expected, tol, std::abs(computed - expected) <= tol, "absolute");
  }
  void within_rel(const std::string& name, double computed, double expected, double tol) {
    push(name, computed, expected, tol, std::abs(computed - expected) <= tol * std::abs(expected), "relative");
  }
  void at_most(const std::string& name, double computed, double limit) {
    push(name, computed, 0.0, limit, computed <= limit, "upper bound");
  }
  void within_sigma(const std::string& name, double computed, double expected, double sigma, double k) {
    push(name, computed, expected, k * sigma, std::abs(computed - expected) <= k * sigma,
         "k sigma, sigma = " + format(sigma));
  }
  void flag(const std::string& name, bool ok, const std::string& note) {
    push(name, ok ? 1.0 : 0.0, 1.0, 0.0, ok, note);
  }
  void note(const std::string& text) {
    if (!out_.checks.empty()) out_.checks.back().note += "; " + text;
  }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }
  void push(const std::string& name, double computed, double expected, double tol, bool pass,
            const std::string& note) {
    auto now = Clock::now();
    CheckResult c;
    c.name = name;
    c.computed = computed;
    c.expected = expected;
    c.tolerance = tol;
    c.pass = pass && std::isfinite(computed);
    c.seconds = std::chrono::duration<double>(now - last_).count();
    c.note = note;
    out_.checks.push_back(std::move(c));
    last_ = now;
  }

  CriterionResult& out_;
  Clock::time_point last_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SimConfig sim(int n, double t, double dt, long paths, std::uint64_t seed) {
  SimConfig c;
  c.n_particles = n;
  c.t_final = t;
  c.dt = dt;
  c.paths = paths;
  c.seed = seed;
  return c;
}

double k0(double z) { return bessel_k(Order::real(0), z).value; }

// (1/2) int_{|log(b/a)|}^inf u J0(sqrt(2ab cosh u - a^2 - b^2)) du with the
// substitution w^2 = 2ab cosh u - a^2 - b^2.
double k0_product_integral(double a, double b) {
  const double c = (a - b) * (a - b);
  auto g = [&](double w) {
    double d = (w * w + c) / (2 * a * b);  // cosh u - 1
    double sh = std::sqrt(d * (d + 2));
    if (sh == 0) return 0.0;
    double u = std::log1p(d + sh);
    return u * w / (a * b * sh);
  };
  return 0.5 * integrate_j0_oscillatory(g, 1e-12, 1e-15).value;
}

void c1(Recorder& r, const VerifyOptions&) {
  auto t0 = Clock::now();
  auto s2 = selberg_check(2);
  r.within_abs("N=2 computed vs pi", s2.computed, M_PI, 1e-6);
  r.within_abs("N=2 exact vs pi", s2.exact, M_PI, 1e-6);
  auto s3 = selberg_check(3);
  r.within_rel("N=3 computed vs exact", s3.computed, s3.exact, 1e-4);
  r.at_most("wall time N=2,3 [s]", seconds_since(t0), 10.0);
}

void c2(Recorder& r, const VerifyOptions&) {
  for (double mu : {0.5, 1.0, 2.0}) {
    auto f = [&](double y) { return k0(std::exp(-y)) * std::exp(-mu * y); };
    double lhs =
        integrate_adaptive<double>(f, -7.0, 45.0 / mu, QuadratureSpec::with_tolerance(1e-14, 1e-12), 4000).value;
    double rhs = std::pow(2.0, mu - 2) * std::pow(gamma(mu / 2), 2);
    r.within_abs("mu=" + std::to_string(mu).substr(0, 3) + " quadrature vs 2^{mu-2} Gamma(mu/2)^2", lhs, rhs, 1e-6);
  }
  r.within_abs("mu=1 closed form vs pi/2", std::pow(gamma(0.5), 2) / 2, M_PI / 2, 1e-6);
}

void c3(Recorder& r, const VerifyOptions&) {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}}) {
    char name[64];
    std::snprintf(name, sizeof name, "K0(%g) K0(%g) vs u-integral", a, b);
    r.within_abs(name, k0_product_integral(a, b), k0(a) * k0(b), 1e-6);
  }
}

void c4(Recorder& r, const VerifyOptions&) {
  struct Point {
    Eigen::VectorXd nu, x;
  };
  const std::vector<Point> pts{{vec({0, 0}), vec({0, 0})},
                               {vec({1, -1}), vec({0, 1})},
                               {vec({0.8, 2.1}), vec({0.4, 2.4})},
                               {vec({0.3, -0.5}), vec({-1.0, 0.5})},
                               {vec({1.5, 0.0}), vec({0.7, -0.8})}};
  for (const auto& p : pts) {
    SpectralParameter l{p.nu};
    auto q = psi(2, l, p.x);
    auto c = psi2_closed_form(l, p.x);
    char name[96];
    std::snprintf(name, sizeof name, "nu=(%g,%g) x=(%g,%g) |quad - closed| / |closed|", p.nu(0), p.nu(1), p.x(0),
                  p.x(1));
    r.at_most(name, std::abs(q.value - c) / std::abs(c), 1e-6);
  }
}

void c5(Recorder& r, const VerifyOptions&) {
  r.at_most("N=2 nu=(0.4,-0.9) x=(0,0.8)", eigen_residual(2, SpectralParameter{vec({0.4, -0.9})}, vec({0, 0.8})),
            1e-4);
  r.at_most("N=2 nu=(1.2,0.3) x=(-0.5,1.5)", eigen_residual(2, SpectralParameter{vec({1.2, 0.3})}, vec({-0.5, 1.5})),
            1e-4);
  r.at_most("N=3 nu=(0.3,0,-0.6) x=(-0.4,0.2,1)",
            eigen_residual(3, SpectralParameter{vec({0.3, 0.0, -0.6})}, vec({-0.4, 0.2, 1.0})), 1e-4);
}

void c6(Recorder& r, const VerifyOptions&) {
  const double pts[5][5] = {{1, 0, 2, 0.5, 2.5}, {0.2, 0, 1, 0.1, 1.2}, {5, 0, 2, -1, 3}, {2, -1, 0, 0, 1},
                            {0.5, 0, 3, 0.3, 2.5}};
  for (const auto& p : pts) {
    Eigen::VectorXd x = vec({p[1], p[2]}), y = vec({p[3], p[4]});
    double spectral = q_spectral(2, p[0], y, x, Q2Route::spectral).value;
    double factorized = q_spectral(2, p[0], y, x, Q2Route::factorized).value;
    char name[160];
    std::snprintf(name, sizeof name, "t=%g x=(%g,%g) y=(%g,%g) spectral vs factorized", p[0], p[1], p[2], p[3], p[4]);
    r.within_rel(name, spectral, factorized, 1e-5);
  }
}

void c7(Recorder& r, const VerifyOptions&) {
  auto t0 = Clock::now();
  const double s = 0.5, t = 0.5;
  Eigen::VectorXd x = vec({0, 2}), z = vec({0.3, 2.3});
  // (y1, y2) over a rectangle covering the mass of both factors
  const int n = 80;
  auto rule = gauss_legendre(n);
  const double a1 = -5, b1 = 6, a2 = -3, b2 = 8;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = 0.5 * (a1 + b1) + 0.5 * (b1 - a1) * rule.nodes(i);
    for (int k = 0; k < n; ++k) {
      double v = 0.5 * (a2 + b2) + 0.5 * (b2 - a2) * rule.nodes(k);
      Eigen::VectorXd y = vec({u, v});
      sum += rule.weights(i) * rule.weights(k) * q_spectral(2, t, z, y).value * q_spectral(2, s, y, x).value;
    }
  }
  double lhs = sum * 0.25 * (b1 - a1) * (b2 - a2);
  r.within_rel("int Q(t,z|y) Q(s,y|x) dy vs Q(s+t,z|x), s=t=0.5", lhs, q_spectral(2, s + t, z, x).value, 1e-4);
  r.at_most("wall time [s]", seconds_since(t0), 120.0);
}

void c8(Recorder& r, const VerifyOptions& opt) {
  {
    const double t = 100;
    Eigen::VectorXd x = vec({0, 2});
    double p0 = psi0(2, x).value;
    r.within_abs("C_2 vs 1/(2 pi)", long_time_constant(2), 1 / (2 * M_PI), 1e-15);
    double lhs = t * t * q_spectral(2, t, x, x).value / long_time_constant(2);
    r.within_rel("N=2 t=100 x=y=(0,2): t^2 Q_2 / C_2 vs psi0 psi0", lhs, p0 * p0, 0.02);
  }
  if (opt.fast) return;
  {
    const double t = 50;
    Eigen::VectorXd x = vec({0, 2, 4});
    double p0 = psi0(3, x).value;
    auto q = q_spectral_mc(3, t, x, x, 20000, opt.seed);
    double scale = std::pow(t, 4.5) / long_time_constant(3);
    r.within_sigma("N=3 t=50 x=y=(0,2,4): t^{9/2} Q_3 / C_3 vs psi0 psi0 (20000 samples)", scale * q.value, p0 * p0,
                   scale * q.error_bound, 3.0);
  }
}

void c9(Recorder& r, const VerifyOptions&) {
  const double T = 200, mu = 0.8;
  double lhs = std::sqrt(M_PI / 2) * std::pow(T, 1.5) * std::exp(mu * mu * T / 2) * my_survival(T, 0, mu);
  double rhs = std::pow(2.0, mu - 2) * std::pow(gamma(mu / 2), 2) * k0(1.0);
  r.within_rel("T=200 mu=0.8 scaled survival vs 2^{mu-2} Gamma(mu/2)^2 K0(1)", lhs, rhs, 0.03);
}

void c10(Recorder& r, const VerifyOptions&) {
  const double t = 50;
  for (double rr : {0.5, 1.0, 2.0}) {
    double lhs = std::sqrt(2 * M_PI * t * t * t) * theta(rr, t).value;
    r.within_rel("r=" + std::to_string(rr).substr(0, 3) + " t=50 sqrt(2 pi t^3) theta vs K0(r)", lhs, k0(rr), 0.02);
  }
  r.within_abs("(r,t)=(1,1) contour form vs real-axis form", theta_contour(1, 1).value, theta(1, 1).value, 1e-6);
}

void c11(Recorder& r, const VerifyOptions& opt) {
  auto t0 = Clock::now();
  Eigen::VectorXd x = vec({0, 2}), y = vec({0.5, 2.5});
  auto est = fk_density(sim(2, 1, 1e-3, 100000, opt.seed), x, y);
  auto q = q_spectral(2, 1, y, x);
  double combined = std::sqrt(est.std_error * est.std_error + est.dt_bias * est.dt_bias +
                              est.smoothing_bias * est.smoothing_bias + q.error_bound * q.error_bound);
  r.within_sigma("fk_density vs q_spectral, x=(0,2) y=(0.5,2.5), 1e5 paths, dt=1e-3", est.value, q.value, combined,
                 3.0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "se=%.3g dt_bias=%.3g smoothing=%.3g bandwidth=%.3g", est.std_error, est.dt_bias,
                est.smoothing_bias, est.bandwidth);
  r.note(buf);
  r.at_most("wall time [s]", seconds_since(t0), 300.0);
}

void c12(Recorder& r, const VerifyOptions& opt) {
  const double eps = 0.05, t = 1;
  Eigen::VectorXd x = vec({0, 2});
  // Karlin-McGregor survival: y1 = a, y2 = a + e^b covers the chamber
  QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-12, 1e-10);
  auto inner = [&](double a) {
    auto f = [&](double b) {
      double g = std::exp(b);
      return g * km_density(t, vec({a, a + g}), x);
    };
    return integrate_adaptive<double>(f, -30.0, 3.0, spec, 4000).value;
  };
  double km = integrate_adaptive<double>(inner, -9.0, 11.0, spec, 4000).value;
  auto s = fk_survival(sim(2, t, 2.5e-4, 100000, opt.seed), x, DriftVector::Zero(2), eps);
  r.within_sigma("eps=0.05 soft-wall survival vs int_W q_2 dy, x=(0,2), T=1", s.mean, km, s.std_error, 3.0);
  r.note("closed form erf(1) = " + std::to_string(std::erf(1.0)));
}

void c13(Recorder& r, const VerifyOptions& opt) {
  const double t = 1;
  Eigen::VectorXd x0 = vec({0, 2});
  auto e = sde_oconnell(sim(2, t, 1e-3, 100000, opt.seed), x0);
  // relative coordinate: one-dimensional law at t/2
  const double eta0 = 0.5 * (x0(1) - x0(0)) - M_LN2;
  std::vector<double> eta(e.size()), com(e.size());
  for (long i = 0; i < e.size(); ++i) {
    eta[i] = 0.5 * (e.terminal(i, 1) - e.terminal(i, 0)) - M_LN2;
    com[i] = 0.5 * (e.terminal(i, 0) + e.terminal(i, 1));
  }
  TabulatedCdf law([&](double y) { return oconnell_density(1, t / 2, vec({y}), vec({eta0})).value; }, -4, 8, 400);
  r.at_most("KS of (Z2-Z1)/2 - log 2 vs oconnell_density marginal", ks_statistic(eta, law), 0.02);
  const double m = 0.5 * (x0(0) + x0(1)), sd = std::sqrt(t / 2);
  r.at_most("KS of (Z1+Z2)/2 vs N(1, t/2)", ks_statistic(com, [&](double v) {
              return 0.5 * std::erfc(-(v - m) / (sd * std::sqrt(2.0)));
            }),
            0.02);
}

void c14(Recorder& r, const VerifyOptions& opt) {
  const double t = 1;
  TabulatedCdf law([&](double y) { return from_minus_infinity(FromMinusInf::infinite_T, t, y, 0); }, -4, 12, 400);
  auto explicit_z = my_explicit(sim(1, t, 1e-3, 100000, opt.seed), 0.0);
  auto diffusion = sde_my(sim(1, t, 1e-3, 100000, opt.seed + 1), -8.0, 0.0);
  auto a = explicit_z.coordinate(0), b = diffusion.coordinate(0);
  r.at_most("KS my_explicit vs P(t, y | -inf)", ks_statistic(a, law), 0.02);
  r.at_most("KS sde_my (x0=-8) vs P(t, y | -inf)", ks_statistic(b, law), 0.02);
  r.at_most("KS my_explicit vs sde_my", ks_two_sample(a, b), 0.03);
  auto scaled = my_explicit_scaled(sim(1, t, 1e-4, 100000, opt.seed + 2), 0.05);
  r.at_most("KS eps Z(t/eps^2), eps=0.05, vs 2M - B law", ks_statistic(scaled.coordinate(0), [&](double v) {
              return bes3_cdf(v, t);
            }),
            0.03);
}

void c15(Recorder& r, const VerifyOptions& opt) {
  const double t = 1;
  Eigen::VectorXd x0 = vec({0, 1});
  auto cfg = sim(2, t, 1e-3, 100000, opt.seed);
  auto e = sde_dyson(cfg, x0);
  auto g = e.gap(0);
  Eigen::VectorXd g2(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) g2(static_cast<Eigen::Index>(i)) = g[i] * g[i];
  auto m = sample_mean(g2);
  r.within_sigma("E[gap^2] vs gap0^2 + 6t", m.mean, 1 + 6 * t, m.std_error, 3.0);
  auto rep = scaling_limit_check({0.2, 0.1, 0.05}, sim(2, t, 1e-3, 100000, opt.seed + 1), x0);
  std::string ks;
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%seps=%g: %.4f", i ? ", " : "", rep.eps[i], rep.ks[i]);
    ks += buf;
  }
  r.flag("gap KS decreasing over eps = 0.2, 0.1, 0.05", rep.monotone, ks);
  r.at_most("gap KS at eps=0.05", rep.ks.back(), 0.03);
}

void c16(Recorder& r, const VerifyOptions& opt) {
  QuadratureSpec spec = QuadratureSpec::with_tolerance(1e-12, 1e-10);
  for (double t : {1.0, 3.0}) {
    auto f = [&](double y) { return from_minus_infinity(FromMinusInf::infinite_T, t, y, 0); };
    double mass = integrate_adaptive<double>(f, -6.0, 40.0, spec, 4000).value;
    r.within_abs("t=" + std::to_string(t).substr(0, 3) + " normalization of 2 theta K0", mass, 1.0, 1e-3);
  }
  TabulatedCdf law([&](double y) { return from_minus_infinity(FromMinusInf::infinite_T, 1, y, 0); }, -4, 12, 400);
  auto z = my_explicit(sim(1, 1, 1e-3, 100000, opt.seed + 3), 0.0);
  r.at_most("KS my_explicit (started at -inf) vs 2 theta K0, t=1", ks_statistic(z.coordinate(0), law), 0.02);
}

void c17(Recorder& r, const VerifyOptions& opt) {
  if (!opt.simulate) {
    r.flag("simulate runner available", false, "no runner supplied");
    return;
  }
  const std::vector<std::vector<std::string>> runs{
      {"fk", "--n", "2", "--t", "1", "--x", "0,2", "--paths", "20000", "--dt", "0.001", "--seed", "42"},
      {"sde_oconnell", "--n", "2", "--t", "1", "--x", "0,2", "--paths", "5000", "--dt", "0.001", "--seed", "42"},
      {"my_explicit", "--mu", "0", "--t", "1", "--paths", "20000", "--dt", "0.001", "--seed", "7"}};
  for (const auto& args : runs) {
    std::string base = opt.simulate(args, 1);
    bool same = !base.empty();
    for (unsigned w : {4u, 8u}) same = same && opt.simulate(args, w) == base;
    std::string line = "simulate";
    for (const auto& a : args) line += " " + a;
    r.flag(line, same, std::to_string(base.size()) + " bytes at 1 thread, compared at 4 and 8");
  }
}

using Runner = void (*)(Recorder&, const VerifyOptions&);

const std::map<int, Runner>& runners() {
  static const std::map<int, Runner> m{{1, c1},   {2, c2},   {3, c3},   {4, c4},   {5, c5},   {6, c6},
                                       {7, c7},   {8, c8},   {9, c9},   {10, c10}, {11, c11}, {12, c12},
                                       {13, c13}, {14, c14}, {15, c15}, {16, c16}, {17, c17}};
  return m;
}

}  // namespace

bool CriterionResult::pass() const {
  if (!error.empty() || checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

bool VerificationReport::pass() const {
  for (const auto& c : criteria)
    if (!c.pass()) return false;
  return !criteria.empty();
}

const std::vector<CriterionInfo>& criteria() {
  static const std::vector<CriterionInfo> list{
      {1, "densities", "Selberg integral", true},
      {2, "specfun", "Mellin transform of K0", true},
      {3, "specfun", "K0 product as a u-integral", true},
      {4, "whittaker", "N=2 Whittaker closed form", true},
      {5, "whittaker", "eigenfunction residual", true},
      {6, "densities", "Q2 spectral vs factorized", true},
      {7, "densities", "Chapman-Kolmogorov for Q2", true},
      {8, "densities", "long-time ratio t^alpha Q_N / C_N vs psi0 psi0", true},
      {9, "densities", "long-term survival asymptotics", true},
      {10, "specfun", "theta asymptotics and representations", true},
      {11, "pathsim", "Feynman-Kac density vs spectral", false},
      {12, "pathsim", "soft-wall survival vs Karlin-McGregor", false},
      {13, "pathsim", "O'Connell SDE vs conditioned density", false},
      {14, "pathsim", "Matsumoto-Yor constructions and Pitman limit", false},
      {15, "pathsim", "Dyson oracle and scaling limit", false},
      {16, "pathsim", "distribution started from -infinity", false},
      {17, "pathsim", "thread-count determinism of simulate", false},
  };
  return list;
}

std::vector<int> suite_criteria(const std::string& suite, bool fast) {
  if (suite != "all" && suite != "specfun" && suite != "whittaker" && suite != "densities" && suite != "pathsim")
    throw DomainError("unknown suite '" + suite + "'");
  std::vector<int> ids;
  for (const auto& c : criteria())
    if (suite == "all" || suite == c.suite)
      if (!fast || c.quadrature_only) ids.push_back(c.id);
  return ids;
}

CriterionResult run_criterion(int id, const VerifyOptions& opt) {
  auto it = runners().find(id);
  if (it == runners().end()) throw DomainError("unknown criterion " + std::to_string(id));
  CriterionResult out;
  out.id = id;
  out.title = criteria()[static_cast<std::size_t>(id - 1)].title;
  auto t0 = Clock::now();
  Recorder rec(out);
  try {
    it->second(rec, opt);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = seconds_since(t0);
  return out;
}

VerificationReport run_criteria(const std::vector<int>& ids, const VerifyOptions& opt,
                                const std::function<void(const CriterionResult&)>& on_done) {
  VerificationReport rep;
  for (int id : ids) {
    rep.criteria.push_back(run_criterion(id, opt));
    if (on_done) on_done(rep.criteria.back());
  }
  return rep;
}

std::string to_text(const CriterionResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "criterion %2d %s  %s (%.1f s)\n", r.id, r.pass() ? "PASS" : "FAIL", r.title.c_str(),
                r.seconds);
  std::string s = buf;
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, "    [%s] %s: computed %.10g, expected %.10g, tolerance %.3g (%s)\n",
                  c.pass ? "pass" : "FAIL", c.name.c_str(), c.computed, c.expected, c.tolerance, c.note.c_str());
    s += buf;
  }
  if (!r.error.empty()) s += "    error: " + r.error + "\n";
  return s;
}

std::string to_json(const VerificationReport& r) {
  using nlohmann::json;
  json crit = json::array();
  for (const auto& c : r.criteria) {
    json checks = json::array();
    for (const auto& k : c.checks)
      checks.push_back({{"name", k.name},
                        {"computed", k.computed},
                        {"expected", k.expected},
                        {"tolerance", k.tolerance},
                        {"pass", k.pass},
                        {"wall_seconds", k.seconds},
                        {"note", k.note}});
    json j{{"id", c.id}, {"title", c.title}, {"pass", c.pass()}, {"wall_seconds", c.seconds}, {"checks", checks}};
    if (!c.error.empty()) j["error"] = c.error;
    crit.push_back(j);
  }
  return json{{"format_version", 1}, {"pass", r.pass()}, {"criteria", crit}}.dump(2);
}

}  // namespace oconnell
