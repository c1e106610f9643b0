#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "oconnell/densities.hpp"
#include "oconnell/stats.hpp"

namespace oconnell {

enum class Scheme { euler, tamed_euler };
enum class KillMode { weighted, bernoulli };

// Killing potential: nearest-neighbour sum_j e^{-(x_{j+1}-x_j)/eps}, or the
// one-dimensional e^{-2x}/2.
enum class Potential { toda, matsumoto_yor };

struct SimConfig {
  int n_particles = 1;
  double t_final = 1.0;
  double dt = 1e-3;
  long paths = 1000;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::euler;
  KillMode kill_mode = KillMode::weighted;

  void validate() const;
  // Number of steps; dt is rounded so that steps * step() == t_final.
  long steps() const;
  double step() const { return t_final / steps(); }
};

struct PathEnsemble {
  Eigen::MatrixXd terminal;  // paths x N
  Eigen::VectorXd weight;    // survival weight, or 0/1 in bernoulli mode
  std::vector<std::uint64_t> path_seed;
  KillMode kill_mode = KillMode::weighted;

  long size() const { return static_cast<long>(terminal.rows()); }
  std::vector<double> coordinate(int j) const;
  // Per-path gap x_{j+1} - x_j (j is 0-based).
  std::vector<double> gap(int j) const;
  MeanEstimate survival() const;
};

double killing_rate(const Eigen::Ref<const Eigen::VectorXd>& x, double eps = 1.0,
                    Potential p = Potential::toda);

// Weight of a discretized path (rows are time points on a uniform grid).
double fk_weight(const Eigen::Ref<const Eigen::MatrixXd>& path, double dt, double eps = 1.0,
                 Potential p = Potential::toda);

// Killed Brownian paths x + B(t) - mu t with weights or Bernoulli killing.
PathEnsemble fk_ensemble(const SimConfig& cfg, const Configuration& x, const DriftVector& mu,
                         double eps = 1.0, Potential p = Potential::toda);

struct FkDensityEstimate {
  double value = 0.0;
  double std_error = 0.0;       // bootstrap
  double dt_bias = 0.0;         // estimate(2 dt) - estimate(dt) on the same paths
  double smoothing_bias = 0.0;  // last-stretch killing approximation
  double bandwidth = 0.0;
  long paths = 0;
};

// Q_N(t, y | x) by Gaussian-kernel smoothing: paths stop at t - h^2 and
// the last stretch is propagated with the exact heat kernel.
// bandwidth <= 0 selects Silverman's rule with reference scale sqrt(t).
FkDensityEstimate fk_density(const SimConfig& cfg, const Configuration& x, const Configuration& y,
                             double bandwidth = 0.0, double eps = 1.0, Potential p = Potential::toda);

MeanEstimate fk_survival(const SimConfig& cfg, const Configuration& x, const DriftVector& mu,
                         double eps = 1.0, Potential p = Potential::toda);

// Z = log int_0^t e^{2 B^mu(s)} ds - B^mu(t), B^mu(s) = B(s) + mu s.
PathEnsemble my_explicit(const SimConfig& cfg, double mu);
// eps Z^0(t / eps^2), evaluated as eps log int_0^t e^{2W/eps} du - 2 eps log eps - W(t).
PathEnsemble my_explicit_scaled(const SimConfig& cfg, double eps);

// Drift of the scaled process eps Z(t / eps^2): (1/eps) F(x / eps).
Eigen::VectorXd oconnell_drift(int n, const Eigen::Ref<const Eigen::VectorXd>& x, double eps = 1.0);
Eigen::VectorXd dyson_drift(const Eigen::Ref<const Eigen::VectorXd>& x);
// -(K_mu'/K_mu)(e^{-eta}) e^{-eta}.
double my_drift(double eta, double mu);

PathEnsemble sde_oconnell(const SimConfig& cfg, const Configuration& x0, double eps = 1.0);
PathEnsemble sde_dyson(const SimConfig& cfg, const Configuration& x0);
PathEnsemble sde_my(const SimConfig& cfg, double x0, double mu);

struct ScalingReport {
  std::vector<double> eps;
  std::vector<double> ks;  // max over gaps of the two-sample KS distance
  bool monotone = false;
};
ScalingReport scaling_limit_check(const std::vector<double>& eps, const SimConfig& cfg, const Configuration& x0);

// Laws used as simulation oracles.
double bes3_cdf(double r, double t);

}  // namespace oconnell
