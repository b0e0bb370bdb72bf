#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "minorlab/density.hpp"

namespace minorlab {

namespace {

bool nonsingular(const GaussianLaw& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.cov);
  return es.eigenvalues().minCoeff() > 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
}

}  // namespace

double gaussian_tv_2d(const GaussianLaw& a, const GaussianLaw& b, std::size_t n) {
  if (a.mean.size() != 2 || b.mean.size() != 2) throw std::invalid_argument("gaussian_tv_2d: laws must be 2-d");
  if (n < 2) throw std::invalid_argument("gaussian_tv_2d: n >= 2");
  const bool sa = nonsingular(a), sb = nonsingular(b);
  if (!sa || !sb) {
    if (sa != sb) return 1.0;
    // Two degenerate laws: equal only if identical.
    return (a.mean - b.mean).norm() == 0 && (a.cov - b.cov).norm() == 0 ? 0.0 : 1.0;
  }
  double lo[2], hi[2];
  for (int k = 0; k < 2; ++k) {
    const double ra = 10 * std::sqrt(a.cov(k, k)), rb = 10 * std::sqrt(b.cov(k, k));
    lo[k] = std::min(a.mean(k) - ra, b.mean(k) - rb);
    hi[k] = std::max(a.mean(k) + ra, b.mean(k) + rb);
  }
  const GaussianDensity fa(a), fb(b);
  const double hx = (hi[0] - lo[0]) / static_cast<double>(n), hy = (hi[1] - lo[1]) / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x[2];
    x[0] = lo[0] + (static_cast<double>(i) + 0.5) * hx;
    for (std::size_t j = 0; j < n; ++j) {
      x[1] = lo[1] + (static_cast<double>(j) + 0.5) * hy;
      acc += std::fabs(fa(x) - fb(x));
    }
  }
  return std::min(1.0, 0.5 * acc * hx * hy);
}

MixingReport mixing_time(const ModelSpec& m, const std::vector<double>& eps_list, const std::vector<double>& t_grid,
                         const GaussianLaw& start, double tv_threshold, std::size_t quad_n) {
  if (m.d != 2) throw std::invalid_argument("mixing_time: quadrature TV is implemented for d = 2 only");
  if (eps_list.empty() || t_grid.empty()) throw std::invalid_argument("mixing_time: empty eps list or time grid");
  MixingReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double eps : eps_list) {
    const GaussianLaw pi = stationary_gaussian(m, eps);
    const auto laws = gaussian_path(m, eps, t_grid, start);
    std::vector<double> curve;
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < laws.size(); ++i) {
      curve.push_back(gaussian_tv_2d(laws[i], pi, quad_n));
      if (curve.back() <= tv_threshold) {
        hit = i;
        break;
      }
    }
    if (!hit) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "TV threshold %.6g not reached on the time grid for eps = %.6g", tv_threshold, eps);
      throw std::runtime_error(buf);
    }
    MixingRow row;
    row.eps = eps;
    row.t_mix = t_grid[*hit];
    row.t_mix_physical = row.t_mix / eps;
    row.eps_times_t_phys = eps * row.t_mix_physical;
    row.tv_at_mix = curve.back();
    row.tv_before = *hit > 0 ? curve[*hit - 1] : 1.0;
    lo = std::min(lo, row.t_mix);
    hi = std::max(hi, row.t_mix);
    rep.rows.push_back(row);
    rep.tv_curves.push_back(std::move(curve));
  }
  rep.spread = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  return rep;
}

MixingReport mixing_time(const ModelSpec& m, const std::vector<double>& eps_list, const std::vector<double>& t_grid,
                         const std::vector<double>& x0, double tv_threshold, std::size_t quad_n) {
  if (x0.size() != m.d) throw std::invalid_argument("x0 dimension mismatch");
  GaussianLaw start;
  start.mean = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  start.cov = Eigen::MatrixXd::Zero(start.mean.size(), start.mean.size());
  return mixing_time(m, eps_list, t_grid, start, tv_threshold, quad_n);
}

}  // namespace minorlab
