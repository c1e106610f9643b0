#include "oconnell/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oconnell/parallel.hpp"
#include "oconnell/random.hpp"
#include "oconnell/specfun.hpp"
#include "oconnell/whittaker.hpp"

namespace oconnell {

namespace {

constexpr std::uint32_t kNoise = 0x4257;
constexpr std::uint32_t kBridge = 0x4252;
constexpr std::uint32_t kKill = 0x4b4c;
constexpr std::uint32_t kBoot = 0x4253;
constexpr int kMaxDepth = 48;
constexpr int kBootstrap = 200;

// Brownian increments of one path, addressed by step index.
class PathNoise {
 public:
  PathNoise(std::uint64_t seed, long path, int n)
      : noise_(seed, kNoise, static_cast<std::uint64_t>(path)),
        seed_(seed),
        path_(static_cast<std::uint64_t>(path)),
        n_(n),
        per_step_((n + 1) / 2) {}

  void increment(long step, double sd, Eigen::VectorXd& out) const {
    NormalSequence z(noise_, static_cast<std::uint64_t>(step) * per_step_);
    for (int j = 0; j < n_; ++j) out(j) = sd * z();
  }

  // Standard normals for the bridge midpoint of tree node `node` in `step`.
  void bridge(long step, std::uint64_t node, Eigen::VectorXd& out) const {
    // a separate key per step leaves the full block index for the node
    std::uint64_t key = seed_ ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(step) + 1));
    NormalSequence z(CounterRng(key, kBridge, path_), node << 3);
    for (int j = 0; j < n_; ++j) out(j) = z();
  }

 private:
  CounterRng noise_;
  std::uint64_t seed_, path_;
  int n_;
  std::uint64_t per_step_;
};

std::uint64_t path_key(std::uint64_t seed, long path) {
  auto b = philox4x32({static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0, 0},
                      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

PathEnsemble make_ensemble(const SimConfig& cfg) {
  PathEnsemble e;
  e.terminal.resize(cfg.paths, cfg.n_particles);
  e.weight = Eigen::VectorXd::Ones(cfg.paths);
  e.path_seed.resize(cfg.paths);
  e.kill_mode = cfg.kill_mode;
  for (long i = 0; i < cfg.paths; ++i) e.path_seed[i] = path_key(cfg.seed, i);
  return e;
}

// One Euler-Maruyama step of length h with Brownian increment dB. A step is
// accepted when the drift displacement is small against scale(x) (euler) or
// after taming (tamed_euler), and the new point passes valid() without
// shrinking the scale by more than a factor 4; otherwise it is split at a
// Brownian-bridge midpoint.
template <class Drift, class Scale, class Valid>
void advance(Eigen::VectorXd& x, double h, const Eigen::VectorXd& dB, Drift& drift, Scale& scale, Valid& valid,
             Scheme scheme, const PathNoise& noise, long step, std::uint64_t node, int depth) {
  Eigen::VectorXd b = drift(x);
  double bmax = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(bmax)) throw IntegrationError("drift is not finite; reduce dt");
  bool ok = true;
  if (scheme == Scheme::tamed_euler) {
    if (bmax * h > 0.5) b /= 1.0 + h * bmax;
  } else {
    ok = bmax * h <= 0.25 * scale(x);
  }
  if (ok) {
    Eigen::VectorXd xn = x + h * b + dB;
    if (valid(xn) && scale(xn) >= 0.25 * scale(x)) {
      x = xn;
      return;
    }
  }
  if (depth >= kMaxDepth) throw IntegrationError("step rejection depth exceeded; reduce dt");
  Eigen::VectorXd z(x.size());
  noise.bridge(step, node, z);
  Eigen::VectorXd d1 = 0.5 * dB + std::sqrt(0.25 * h) * z;
  Eigen::VectorXd d2 = dB - d1;
  advance(x, 0.5 * h, d1, drift, scale, valid, scheme, noise, step, 2 * node, depth + 1);
  advance(x, 0.5 * h, d2, drift, scale, valid, scheme, noise, step, 2 * node + 1, depth + 1);
}

template <class Drift, class Scale, class Valid>
PathEnsemble run_sde(const SimConfig& cfg, const Eigen::VectorXd& x0, Drift drift, Scale scale, Valid valid) {
  cfg.validate();
  if (x0.size() != cfg.n_particles) throw DomainError("SDE: x0 size differs from n_particles");
  PathEnsemble e = make_ensemble(cfg);
  const long steps = cfg.steps();
  const double h = cfg.step(), sd = std::sqrt(h);
  parallel_for(cfg.paths, [&](long i) {
    PathNoise noise(cfg.seed, i, cfg.n_particles);
    Eigen::VectorXd x = x0, dB(cfg.n_particles);
    for (long s = 0; s < steps; ++s) {
      noise.increment(s, sd, dB);
      advance(x, h, dB, drift, scale, valid, cfg.scheme, noise, s, 1, 0);
    }
    e.terminal.row(i) = x.transpose();
  });
  return e;
}

double min_gap(const Eigen::VectorXd& x) {
  double g = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j + 1 < x.size(); ++j) g = std::min(g, x(j + 1) - x(j));
  return g;
}

struct KilledPaths {
  Eigen::MatrixXd state;    // position at the stop step
  Eigen::VectorXd weight;   // trapezoid on the dt grid (or 0/1)
  Eigen::VectorXd coarse;   // trapezoid on the 2 dt grid
};

// Killed paths x + B - mu t up to step `stop`.
KilledPaths run_killed(const SimConfig& cfg, const Configuration& x, const DriftVector& mu, double eps,
                       Potential p, long stop) {
  const int n = cfg.n_particles;
  const double h = cfg.step(), sd = std::sqrt(h);
  KilledPaths out{Eigen::MatrixXd(cfg.paths, n), Eigen::VectorXd(cfg.paths), Eigen::VectorXd(cfg.paths)};
  const bool bernoulli = cfg.kill_mode == KillMode::bernoulli;
  parallel_for(cfg.paths, [&](long i) {
    PathNoise noise(cfg.seed, i, n);
    CounterRng kill(cfg.seed, kKill, static_cast<std::uint64_t>(i));
    Eigen::VectorXd cur = x, dB(n);
    double v_prev = killing_rate(cur, eps, p), v_even = v_prev;
    double integral = 0.0, coarse = 0.0;
    bool alive = true;
    for (long s = 0; s < stop; ++s) {
      noise.increment(s, sd, dB);
      cur += dB - h * mu;
      double v = killing_rate(cur, eps, p);
      double piece = 0.5 * h * (v_prev + v);
      if (bernoulli) {
        if (kill.uniform_pair(static_cast<std::uint64_t>(s))[0] > std::exp(-piece)) {
          alive = false;
          break;
        }
      } else {
        integral += piece;
        if (s % 2 == 1) {
          coarse += h * (v_even + v);
          v_even = v;
        }
      }
      v_prev = v;
    }
    if (!bernoulli && stop % 2 == 1) coarse += 0.5 * h * (v_even + v_prev);
    out.state.row(i) = cur.transpose();
    if (bernoulli) {
      out.weight(i) = alive ? 1.0 : 0.0;
      out.coarse(i) = out.weight(i);
    } else {
      out.weight(i) = std::exp(-integral);
      out.coarse(i) = std::exp(-coarse);
    }
  });
  return out;
}

double bootstrap_error(const Eigen::VectorXd& c, std::uint64_t seed) {
  const long m = c.size();
  if (m < 2) return 0.0;
  Eigen::VectorXd means(kBootstrap);
  parallel_for(kBootstrap, [&](long b) {
    CounterRng rng(seed, kBoot, static_cast<std::uint64_t>(b));
    Eigen::VectorXd pick(m);
    for (long k = 0; k < m; k += 2) {
      auto u = rng.uniform_pair(static_cast<std::uint64_t>(k / 2));
      pick(k) = c(std::min(m - 1, static_cast<long>(u[0] * m)));
      if (k + 1 < m) pick(k + 1) = c(std::min(m - 1, static_cast<long>(u[1] * m)));
    }
    means(b) = compensated_sum(pick) / m;
  });
  double mu = compensated_sum(means) / kBootstrap;
  return std::sqrt((means.array() - mu).square().sum() / (kBootstrap - 1));
}

}  // namespace

void SimConfig::validate() const {
  if (n_particles < 1) throw DomainError("SimConfig: n_particles must be >= 1");
  if (!(t_final > 0) || !std::isfinite(t_final)) throw DomainError("SimConfig: t_final must be positive");
  if (!(dt > 0) || dt > t_final) throw DomainError("SimConfig: need 0 < dt <= t_final");
  if (paths < 1) throw DomainError("SimConfig: paths must be >= 1");
}

long SimConfig::steps() const { return std::max(1L, std::lround(t_final / dt)); }

std::vector<double> PathEnsemble::coordinate(int j) const {
  if (j < 0 || j >= terminal.cols()) throw DomainError("PathEnsemble: coordinate out of range");
  std::vector<double> v(terminal.rows());
  for (Eigen::Index i = 0; i < terminal.rows(); ++i) v[i] = terminal(i, j);
  return v;
}

std::vector<double> PathEnsemble::gap(int j) const {
  if (j < 0 || j + 1 >= terminal.cols()) throw DomainError("PathEnsemble: gap out of range");
  std::vector<double> v(terminal.rows());
  for (Eigen::Index i = 0; i < terminal.rows(); ++i) v[i] = terminal(i, j + 1) - terminal(i, j);
  return v;
}

MeanEstimate PathEnsemble::survival() const { return sample_mean(weight); }

double killing_rate(const Eigen::Ref<const Eigen::VectorXd>& x, double eps, Potential p) {
  if (p == Potential::matsumoto_yor) {
    if (x.size() != 1) throw DomainError("killing_rate: the e^{-2x}/2 potential is one-dimensional");
    return 0.5 * std::exp(-2.0 * x(0));
  }
  double v = 0.0;
  for (Eigen::Index j = 0; j + 1 < x.size(); ++j) v += std::exp(-(x(j + 1) - x(j)) / eps);
  return v;
}

double fk_weight(const Eigen::Ref<const Eigen::MatrixXd>& path, double dt, double eps, Potential p) {
  if (!(dt > 0) || !(eps > 0)) throw DomainError("fk_weight: dt and eps must be positive");
  if (path.rows() < 1) throw DomainError("fk_weight: empty path");
  double integral = 0.0;
  double prev = killing_rate(path.row(0).transpose(), eps, p);
  for (Eigen::Index k = 1; k < path.rows(); ++k) {
    double v = killing_rate(path.row(k).transpose(), eps, p);
    integral += 0.5 * dt * (prev + v);
    prev = v;
  }
  return std::exp(-integral);
}

PathEnsemble fk_ensemble(const SimConfig& cfg, const Configuration& x, const DriftVector& mu, double eps,
                         Potential p) {
  cfg.validate();
  if (x.size() != cfg.n_particles || mu.size() != cfg.n_particles)
    throw DomainError("fk_ensemble: x and mu must have n_particles entries");
  if (!(eps > 0)) throw DomainError("fk_ensemble: eps must be positive");
  auto k = run_killed(cfg, x, mu, eps, p, cfg.steps());
  PathEnsemble e = make_ensemble(cfg);
  e.terminal = k.state;
  e.weight = k.weight;
  return e;
}

FkDensityEstimate fk_density(const SimConfig& cfg, const Configuration& x, const Configuration& y, double bandwidth,
                             double eps, Potential p) {
  cfg.validate();
  const int n = cfg.n_particles;
  if (x.size() != n || y.size() != n) throw DomainError("fk_density: x and y must have n_particles entries");
  const double t = cfg.t_final, h = cfg.step();
  if (!(bandwidth > 0)) bandwidth = 1.06 * std::sqrt(t) * std::pow(static_cast<double>(cfg.paths), -1.0 / (n + 4));
  const long last = std::max(1L, std::lround(bandwidth * bandwidth / h));
  if (last >= cfg.steps()) throw DomainError("fk_density: bandwidth^2 must be below t_final");
  const long stop = cfg.steps() - last;
  const double s = last * h;
  auto k = run_killed(cfg, x, DriftVector::Zero(n), eps, p, stop);
  const double vy = killing_rate(y, eps, p);
  Eigen::VectorXd c(cfg.paths), c2(cfg.paths), dev(cfg.paths);
  for (long i = 0; i < cfg.paths; ++i) {
    Eigen::VectorXd xa = k.state.row(i).transpose();
    double kern = 1.0;
    for (int j = 0; j < n; ++j) kern *= heat_kernel(s, y(j), xa(j));
    double va = killing_rate(xa, eps, p);
    double tail = std::exp(-0.5 * s * (va + vy));
    c(i) = k.weight(i) * tail * kern;
    c2(i) = k.coarse(i) * tail * kern;
    dev(i) = k.weight(i) * kern * (std::exp(-s * va) - tail);
  }
  FkDensityEstimate out;
  out.value = compensated_sum(c) / cfg.paths;
  if (!(c.cwiseAbs().maxCoeff() > 0)) throw EstimationError("fk_density: no path contributes at y");
  out.std_error = bootstrap_error(c, cfg.seed);
  out.dt_bias = cfg.kill_mode == KillMode::weighted ? compensated_sum(c2) / cfg.paths - out.value : 0.0;
  out.smoothing_bias = std::abs(compensated_sum(dev) / cfg.paths);
  out.bandwidth = std::sqrt(s);
  out.paths = cfg.paths;
  return out;
}

MeanEstimate fk_survival(const SimConfig& cfg, const Configuration& x, const DriftVector& mu, double eps,
                         Potential p) {
  return fk_ensemble(cfg, x, mu, eps, p).survival();
}

PathEnsemble my_explicit(const SimConfig& cfg, double mu) {
  cfg.validate();
  if (cfg.n_particles != 1) throw DomainError("my_explicit: one-dimensional");
  PathEnsemble e = make_ensemble(cfg);
  const long steps = cfg.steps();
  const double h = cfg.step(), sd = std::sqrt(h);
  parallel_for(cfg.paths, [&](long i) {
    PathNoise noise(cfg.seed, i, 1);
    Eigen::VectorXd dB(1);
    double b = 0.0;
    // log of the trapezoid sum of e^{2B} h, accumulated as m + log(acc)
    double m = 2.0 * b, acc = 0.5 * h;
    for (long s = 0; s < steps; ++s) {
      noise.increment(s, sd, dB);
      b += dB(0) + mu * h;
      double term = 2.0 * b;
      double c = (s + 1 == steps) ? 0.5 * h : h;
      if (term > m) {
        acc = acc * std::exp(m - term) + c;
        m = term;
      } else {
        acc += c * std::exp(term - m);
      }
    }
    e.terminal(i, 0) = m + std::log(acc) - b;
  });
  return e;
}

PathEnsemble my_explicit_scaled(const SimConfig& cfg, double eps) {
  cfg.validate();
  if (cfg.n_particles != 1) throw DomainError("my_explicit_scaled: one-dimensional");
  if (!(eps > 0)) throw DomainError("my_explicit_scaled: eps must be positive");
  PathEnsemble e = make_ensemble(cfg);
  const long steps = cfg.steps();
  const double h = cfg.step(), sd = std::sqrt(h);
  parallel_for(cfg.paths, [&](long i) {
    PathNoise noise(cfg.seed, i, 1);
    Eigen::VectorXd dW(1);
    double w = 0.0, m = 0.0, acc = 0.5 * h;
    for (long s = 0; s < steps; ++s) {
      noise.increment(s, sd, dW);
      w += dW(0);
      double term = 2.0 * w / eps;
      double c = (s + 1 == steps) ? 0.5 * h : h;
      if (term > m) {
        acc = acc * std::exp(m - term) + c;
        m = term;
      } else {
        acc += c * std::exp(term - m);
      }
    }
    e.terminal(i, 0) = eps * (m + std::log(acc)) - 2.0 * eps * std::log(eps) - w;
  });
  return e;
}

Eigen::VectorXd oconnell_drift(int n, const Eigen::Ref<const Eigen::VectorXd>& x, double eps) {
  if (x.size() != n) throw DomainError("oconnell_drift: size mismatch");
  if (!(eps > 0)) throw DomainError("oconnell_drift: eps must be positive");
  if (n == 1) return Eigen::VectorXd::Zero(1);
  if (n == 2) {
    const double g = (x(1) - x(0)) / eps;
    const double d = LogKTable::zero().at_log(M_LN2 - 0.5 * g).dlog;
    Eigen::VectorXd f(2);
    f << 0.5 * d / eps, -0.5 * d / eps;
    return f;
  }
  if (n > 4) throw CapabilityError("oconnell_drift: N <= 4");
  Eigen::VectorXd xs = x / eps;
  return psi0_log_gradient(n, xs).grad / eps;
}

Eigen::VectorXd dyson_drift(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    for (Eigen::Index k = 0; k < x.size(); ++k)
      if (k != j) f(j) += 1.0 / (x(j) - x(k));
  return f;
}

double my_drift(double eta, double mu) {
  if (!std::isfinite(eta) || !std::isfinite(mu)) throw DomainError("my_drift: non-finite input");
  return -bessel_k_logderiv(mu, std::exp(-eta)).ratio * std::exp(-eta);
}

PathEnsemble sde_oconnell(const SimConfig& cfg, const Configuration& x0, double eps) {
  const int n = cfg.n_particles;
  if (n > 4) throw CapabilityError("sde_oconnell: N <= 4");
  if (!(eps > 0)) throw DomainError("sde_oconnell: eps must be positive");
  auto drift = [&](const Eigen::VectorXd& x) { return oconnell_drift(n, x, eps); };
  auto scale = [&](const Eigen::VectorXd& x) { return std::max(min_gap(x), eps); };
  auto valid = [](const Eigen::VectorXd&) { return true; };
  return run_sde(cfg, x0, drift, scale, valid);
}

PathEnsemble sde_dyson(const SimConfig& cfg, const Configuration& x0) {
  if (cfg.n_particles > 16) throw CapabilityError("sde_dyson: N <= 16");
  if (!in_weyl_chamber(x0)) throw DomainError("sde_dyson: x0 must be strictly ordered");
  auto drift = [](const Eigen::VectorXd& x) { return dyson_drift(x); };
  auto scale = [](const Eigen::VectorXd& x) { return min_gap(x); };
  auto valid = [](const Eigen::VectorXd& x) { return in_weyl_chamber(x); };
  return run_sde(cfg, x0, drift, scale, valid);
}

PathEnsemble sde_my(const SimConfig& cfg, double x0, double mu) {
  if (cfg.n_particles != 1) throw DomainError("sde_my: one-dimensional");
  if (!std::isfinite(mu) || !std::isfinite(x0)) throw DomainError("sde_my: non-finite input");
  const LogKTable table(std::abs(mu));
  auto drift = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd b(1);
    b(0) = -table.at_log(-x(0)).dlog;
    return b;
  };
  auto scale = [](const Eigen::VectorXd&) { return 1.0; };
  auto valid = [](const Eigen::VectorXd&) { return true; };
  Eigen::VectorXd start(1);
  start << x0;
  return run_sde(cfg, start, drift, scale, valid);
}

ScalingReport scaling_limit_check(const std::vector<double>& eps, const SimConfig& cfg, const Configuration& x0) {
  if (cfg.n_particles != 2 && cfg.n_particles != 3) throw DomainError("scaling_limit_check: N = 2 or 3");
  ScalingReport r;
  r.eps = eps;
  std::sort(r.eps.begin(), r.eps.end(), std::greater<>());
  PathEnsemble dyson = sde_dyson(cfg, x0);
  for (double e : r.eps) {
    PathEnsemble oc = sde_oconnell(cfg, x0, e);
    double ks = 0.0;
    for (int j = 0; j + 1 < cfg.n_particles; ++j) ks = std::max(ks, ks_two_sample(oc.gap(j), dyson.gap(j)));
    r.ks.push_back(ks);
  }
  r.monotone = true;
  for (std::size_t i = 1; i < r.ks.size(); ++i) r.monotone = r.monotone && r.ks[i] < r.ks[i - 1];
  return r;
}

double bes3_cdf(double r, double t) {
  if (!(t > 0)) throw DomainError("bes3_cdf: t must be positive");
  if (r <= 0) return 0.0;
  const double a = r / std::sqrt(t);
  return std::erf(a / std::sqrt(2.0)) - std::sqrt(2.0 / M_PI) * a * std::exp(-0.5 * a * a);
}

}  // namespace oconnell
