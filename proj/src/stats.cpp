#include "oconnell/stats.hpp"

#include <algorithm>
#include <cmath>

#include "oconnell/errors.hpp"
#include "oconnell/quadrature.hpp"

namespace oconnell {

double compensated_sum(const Eigen::Ref<const Eigen::VectorXd>& v) {
  double s = 0.0, c = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double t = s + v(i);
    if (std::abs(s) >= std::abs(v(i)))
      c += (s - t) + v(i);
    else
      c += (v(i) - t) + s;
    s = t;
  }
  return s + c;
}

MeanEstimate sample_mean(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const auto n = v.size();
  if (n == 0) throw EstimationError("sample_mean: no samples");
  double m = compensated_sum(v) / n;
  if (n == 1) return {m, 0.0};
  Eigen::VectorXd d2 = (v.array() - m).square();
  double var = compensated_sum(d2) / (n - 1);
  return {m, std::sqrt(var / n)};
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw EstimationError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EstimationError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, k = 0;
  double d = 0.0;
  while (i < a.size() && k < b.size()) {
    double x = std::min(a[i], b[k]);
    while (i < a.size() && a[i] <= x) ++i;
    while (k < b.size() && b[k] <= x) ++k;
    d = std::max(d, std::abs(i / na - k / nb));
  }
  return d;
}

TabulatedCdf::TabulatedCdf(const std::function<double(double)>& density, double lo, double hi, int cells)
    : lo_(lo), h_((hi - lo) / cells), cum_(cells + 1, 0.0), pdf_(cells + 1, 0.0) {
  if (!(hi > lo) || cells < 1) throw DomainError("TabulatedCdf: need hi > lo and cells >= 1");
  auto rule = gauss_legendre(8);
  for (int c = 0; c < cells; ++c) {
    double a = lo + c * h_, s = 0.0;
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k)
      s += rule.weights(k) * density(a + 0.5 * h_ * (1.0 + rule.nodes(k)));
    cum_[c + 1] = cum_[c] + 0.5 * h_ * s;
  }
  for (int c = 0; c <= cells; ++c) pdf_[c] = density(lo + c * h_);
  mass_ = cum_.back();
  if (!(mass_ > 0)) throw EstimationError("TabulatedCdf: density has no mass on the range");
  for (double& v : cum_) v /= mass_;
  for (double& v : pdf_) v *= h_ / mass_;
}

double TabulatedCdf::operator()(double x) const {
  double u = (x - lo_) / h_;
  if (u <= 0) return 0.0;
  auto c = static_cast<std::size_t>(u);
  if (c + 1 >= cum_.size()) return 1.0;
  // cubic Hermite with the density as the slope
  double f = u - c, f2 = f * f, f3 = f2 * f;
  double v = (2 * f3 - 3 * f2 + 1) * cum_[c] + (f3 - 2 * f2 + f) * pdf_[c] + (-2 * f3 + 3 * f2) * cum_[c + 1] +
             (f3 - f2) * pdf_[c + 1];
  return std::clamp(v, 0.0, 1.0);
}

Histogram Histogram::build(const std::vector<double>& x, const std::vector<double>& w, double lo, double hi,
                           int bins) {
  if (!(hi > lo) || bins < 1) throw DomainError("Histogram: need hi > lo and bins >= 1");
  if (!w.empty() && w.size() != x.size()) throw DomainError("Histogram: weight size mismatch");
  Histogram h;
  const double width = (hi - lo) / bins;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + i * width;
  h.weight_sums.assign(bins, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lo && x[i] < hi)) continue;
    auto b = std::min(bins - 1, static_cast<int>((x[i] - lo) / width));
    h.weight_sums[b] += w.empty() ? 1.0 : w[i];
  }
  double total = 0.0;
  for (double s : h.weight_sums) total += s;
  h.normalization = total * width;
  h.density.assign(bins, 0.0);
  if (total > 0)
    for (int i = 0; i < bins; ++i) h.density[i] = h.weight_sums[i] / h.normalization;
  return h;
}

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& x, int dims) {
  if (x.size() < 2) throw EstimationError("silverman_bandwidth: need at least two samples");
  double m = x.mean();
  double sd = std::sqrt((x.array() - m).square().sum() / (x.size() - 1));
  return 1.06 * sd * std::pow(static_cast<double>(x.size()), -1.0 / (dims + 4));
}

std::vector<double> kde(const std::vector<double>& x, const std::vector<double>& w, double bandwidth,
                        const std::vector<double>& grid) {
  if (!(bandwidth > 0)) throw DomainError("kde: bandwidth must be positive");
  if (!w.empty() && w.size() != x.size()) throw DomainError("kde: weight size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += w.empty() ? 1.0 : w[i];
  if (!(total > 0)) throw EstimationError("kde: zero total weight");
  const double norm = 1.0 / (total * bandwidth * std::sqrt(2.0 * M_PI));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = (grid[g] - x[i]) / bandwidth;
      if (std::abs(z) < 8) s += (w.empty() ? 1.0 : w[i]) * std::exp(-0.5 * z * z);
    }
    out[g] = s * norm;
  }
  return out;
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw EstimationError("quantile: no samples");
  if (!(p >= 0 && p <= 1)) throw DomainError("quantile: p outside [0, 1]");
  std::sort(x.begin(), x.end());
  double r = p * (x.size() - 1);
  auto i = static_cast<std::size_t>(r);
  if (i + 1 >= x.size()) return x.back();
  double f = r - i;
  return (1 - f) * x[i] + f * x[i + 1];
}

}  // namespace oconnell
