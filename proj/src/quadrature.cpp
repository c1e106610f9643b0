#include "oconnell/quadrature.hpp"

#include <Eigen/Eigenvalues>

namespace oconnell {

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0) || !(rel_tol > 0) || max_refinements < 1)
    throw DomainError("QuadratureSpec: tolerances must be positive and max_refinements >= 1");
  if (truncation == Truncation::explicit_bounds && !(lower < upper))
    throw DomainError("QuadratureSpec: explicit bounds need lower < upper");
}

QuadratureSpec QuadratureSpec::with_tolerance(double abs_tol, double rel_tol) {
  QuadratureSpec s;
  s.abs_tol = abs_tol;
  s.rel_tol = rel_tol;
  return s;
}

const std::array<double, 8> GaussKronrod15::xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const std::array<double, 8> GaussKronrod15::wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const std::array<double, 4> GaussKronrod15::wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

namespace {

GaussRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    j(k, k + 1) = offdiag(k);
    j(k + 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n >= 1 required");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(off, 2.0);
}

GaussRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: n >= 1 required");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(0.5 * k);
  return golub_welsch(off, std::sqrt(M_PI));
}

void WynnEpsilon::push(double partial_sum) {
  constexpr int kWindow = 24;
  sums_.push_back(partial_sum);
  const int n = static_cast<int>(sums_.size());
  const int m = std::min(n, kWindow);
  const int first = n - m;
  // eps[k][i] holds the entry of column k built from sums first+i ...
  std::vector<double> prev(m, 0.0);
  std::vector<double> cur(sums_.begin() + first, sums_.end());
  double best = cur.back();
  double best_err = n >= 2 ? std::abs(cur.back() - cur[m - 2]) : std::abs(cur.back());
  for (int k = 1; static_cast<int>(cur.size()) >= 2; ++k) {
    std::vector<double> next(cur.size() - 1);
    bool ok = true;
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      double d = cur[i + 1] - cur[i];
      if (d == 0.0) {
        ok = false;
        break;
      }
      next[i] = prev[i + 1] + 1.0 / d;
    }
    if (!ok) break;
    prev.assign(cur.begin(), cur.end());
    cur.swap(next);
    if (k % 2 == 0 && !cur.empty()) {
      double est = cur.back();
      double e = cur.size() >= 2 ? std::abs(cur.back() - cur[cur.size() - 2])
                                 : std::numeric_limits<double>::infinity();
      if (std::isfinite(est) && e <= best_err) {
        best = est;
        best_err = e;
      }
    }
  }
  double change = std::isnan(previous_) ? std::numeric_limits<double>::infinity()
                                        : std::abs(best - previous_);
  estimate_ = best;
  error_ = std::max(best_err, change);
  previous_ = best;
}

}  // namespace oconnell
