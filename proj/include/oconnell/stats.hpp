#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oconnell {

// Order-fixed summation with Neumaier compensation.
double compensated_sum(const Eigen::Ref<const Eigen::VectorXd>& v);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanEstimate sample_mean(const Eigen::Ref<const Eigen::VectorXd>& v);

// Kolmogorov-Smirnov distances.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// CDF tabulated from a density by Gauss-Legendre cells on [lo, hi],
// linearly interpolated between cell edges; mass outside is ignored and the
// table is renormalized to end at 1.
class TabulatedCdf {
 public:
  TabulatedCdf(const std::function<double(double)>& density, double lo, double hi, int cells = 400);
  double operator()(double x) const;
  double mass() const { return mass_; }

 private:
  double lo_, h_;
  std::vector<double> cum_, pdf_;
  double mass_;
};

// Uniform-bin histogram of weighted samples, normalized to unit integral.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> weight_sums;
  std::vector<double> density;
  double normalization = 0.0;

  static Histogram build(const std::vector<double>& x, const std::vector<double>& w, double lo, double hi, int bins);
};

// Silverman's rule of thumb 1.06 sigma n^{-1/(d+4)}.
double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& x, int dims);

// Gaussian KDE of weighted one-dimensional samples on a grid.
std::vector<double> kde(const std::vector<double>& x, const std::vector<double>& w, double bandwidth,
                        const std::vector<double>& grid);

// Sample quantile by linear interpolation between order statistics.
double quantile(std::vector<double> x, double p);

}  // namespace oconnell
