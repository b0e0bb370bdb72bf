#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <numbers>

#include "minorlab/sde.hpp"

namespace minorlab {

LinearStructure linear_structure(const ModelSpec& m, double eps) {
  const std::size_t d = m.d;
  const VectorField X = m.drift();
  LinearStructure L;
  L.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  L.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  L.Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (X[i].degree() > 1)
      throw NonlinearModelError("drift component " + std::to_string(i + 1) + " is nonlinear: " +
                                symbolic::to_string(X[i]));
    for (const auto& [e, c] : X[i].terms()) {
      const double v = c.get_d() * std::pow(eps, static_cast<double>(e[d]));
      std::size_t var = d;
      for (std::size_t j = 0; j < d; ++j)
        if (e[j]) var = j;
      if (var == d)
        L.b(static_cast<Eigen::Index>(i)) += v;
      else
        L.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(var)) += v;
    }
  }
  for (const auto& z : m.Zs) {
    if (z.is_zero()) continue;
    if (!z.field.is_x_constant()) throw NonlinearModelError("noise field is state dependent");
    Eigen::VectorXd w(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      auto c = z.field[i].substitute_eps(0).constant_value();
      w(static_cast<Eigen::Index>(i)) = c ? c->get_d() : 0.0;
    }
    L.Q += 2.0 * eps * z.scale_sq.get_d() * w * w.transpose();
  }
  return L;
}

namespace {

struct MomentRhs {
  const LinearStructure& L;
  void operator()(const Eigen::VectorXd& m, const Eigen::MatrixXd& C, Eigen::VectorXd& dm, Eigen::MatrixXd& dC) const {
    dm = L.A * m + L.b;
    dC = L.A * C + C * L.A.transpose() + L.Q;
  }
};

void rk4_advance(const LinearStructure& L, Eigen::VectorXd& m, Eigen::MatrixXd& C, double T, double max_step) {
  if (T <= 0) return;
  const long n = std::max(1L, static_cast<long>(std::ceil(T / max_step - 1e-12)));
  const double h = T / static_cast<double>(n);
  MomentRhs f{L};
  Eigen::VectorXd k1m, k2m, k3m, k4m;
  Eigen::MatrixXd k1c, k2c, k3c, k4c;
  for (long s = 0; s < n; ++s) {
    f(m, C, k1m, k1c);
    f(m + 0.5 * h * k1m, C + 0.5 * h * k1c, k2m, k2c);
    f(m + 0.5 * h * k2m, C + 0.5 * h * k2c, k3m, k3c);
    f(m + h * k3m, C + h * k3c, k4m, k4c);
    m += h / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m);
    C += h / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c);
    C = 0.5 * (C + C.transpose());
  }
}

}  // namespace

std::vector<GaussianLaw> gaussian_path(const ModelSpec& m, double eps, const std::vector<double>& times,
                                       const GaussianLaw& start, double rk4_step) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  if (static_cast<std::size_t>(start.mean.size()) != m.d || start.cov.rows() != start.mean.size() ||
      start.cov.cols() != start.mean.size())
    throw std::invalid_argument("initial law dimension mismatch");
  const LinearStructure L = linear_structure(m, eps);
  Eigen::VectorXd mean = start.mean;
  Eigen::MatrixXd C = start.cov;
  std::vector<GaussianLaw> out;
  double t_prev = 0.0;
  for (double t : times) {
    if (t < t_prev) throw std::invalid_argument("gaussian_path: times must be nondecreasing and >= 0");
    rk4_advance(L, mean, C, (t - t_prev) / eps, rk4_step);
    t_prev = t;
    out.push_back({mean, C});
  }
  return out;
}

std::vector<GaussianLaw> gaussian_path(const ModelSpec& m, double eps, const std::vector<double>& times,
                                       const std::vector<double>& x0, double rk4_step) {
  if (x0.size() != m.d) throw std::invalid_argument("x0 dimension mismatch");
  GaussianLaw start;
  start.mean = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
  start.cov = Eigen::MatrixXd::Zero(start.mean.size(), start.mean.size());
  return gaussian_path(m, eps, times, start, rk4_step);
}

GaussianLaw gaussian_oracle(const ModelSpec& m, double eps, double t, const std::vector<double>& x0, double rk4_step) {
  return gaussian_path(m, eps, {t}, x0, rk4_step).front();
}

GaussianLaw stationary_gaussian(const ModelSpec& m, double eps) {
  const LinearStructure L = linear_structure(m, eps);
  const Eigen::Index d = L.A.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(L.A);
  for (Eigen::Index i = 0; i < d; ++i)
    if (es.eigenvalues()(i).real() >= 0) throw std::invalid_argument("drift matrix is not Hurwitz; no stationary law");
  GaussianLaw law;
  law.mean = -L.A.fullPivLu().solve(L.b);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd K = Eigen::kroneckerProduct(I, L.A);
  K += Eigen::kroneckerProduct(L.A, I);
  Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(L.Q.data(), d * d);
  Eigen::VectorXd c = K.fullPivLu().solve(-q);
  law.cov = Eigen::Map<Eigen::MatrixXd>(c.data(), d, d);
  law.cov = 0.5 * (law.cov + law.cov.transpose());
  return law;
}

GaussianDensity::GaussianDensity(const GaussianLaw& law) : mean_(law.mean) {
  Eigen::LLT<Eigen::MatrixXd> llt(law.cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
  Eigen::MatrixXd Lm = llt.matrixL();
  Linv_ = Lm.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(Lm.rows(), Lm.cols()));
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < Lm.rows(); ++i) logdet += 2.0 * std::log(Lm(i, i));
  log_norm_ = -0.5 * (static_cast<double>(Lm.rows()) * std::log(2.0 * std::numbers::pi) + logdet);
}

double GaussianDensity::log_density(const double* x) const {
  const Eigen::Index d = mean_.size();
  Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x, d) - mean_;
  Eigen::VectorXd z = Linv_.triangularView<Eigen::Lower>() * r;
  return log_norm_ - 0.5 * z.squaredNorm();
}

double GaussianDensity::operator()(const double* x) const { return std::exp(log_density(x)); }

}  // namespace minorlab
