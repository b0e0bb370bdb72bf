#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "minorlab/exec.hpp"
#include "minorlab/models.hpp"

namespace minorlab {

struct SimConfig {
  double eps = 0.1;
  double t_end = 1.0;    // rescaled time; physical horizon t_end/eps
  double dt_phys = 1e-3;
  std::size_t n_traj = 1;
  std::uint64_t seed = 0;
  // One shared start, or one per trajectory.
  std::vector<std::vector<double>> x0;
  double escape_level = 1e4;  // H level beyond which a trajectory is flagged escaped
  // A single drift step may change H by at most this fraction of max(1, H).
  double stability_fraction = 0.5;
  bool zero_noise = false;  // test hook

  void validate(std::size_t d) const;
  std::uint64_t hash() const;
  std::size_t steps() const;
};

struct EndpointSet {
  std::string model_name;
  std::uint64_t config_hash = 0;
  std::size_t dim = 0;
  std::vector<double> points;  // row-major, n_traj x dim
  std::vector<std::uint8_t> escaped;

  std::size_t n_traj() const { return escaped.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
  std::size_t n_escaped() const;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t traj, std::size_t step)
      : std::runtime_error(what + " (trajectory " + std::to_string(traj) + ", step " + std::to_string(step) + ")"),
        traj_(traj), step_(step) {}
  std::size_t trajectory() const { return traj_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t traj_, step_;
};

// Default dt_phys = 1e-3 * min(1, 1/||params||), ||.|| the max absolute parameter.
double default_dt_phys(const ModelSpec& m);

EndpointSet simulate_ensemble(const ModelSpec& m, const SimConfig& cfg, Exec exec = Exec::Parallel);

// As simulate_ensemble, with a per-trajectory rescaled horizon (cfg.t_end ignored).
EndpointSet simulate_to_times(const ModelSpec& m, const SimConfig& cfg, std::span<const double> t_end,
                              Exec exec = Exec::Parallel);

// Columns: traj_id, x1..xd, escaped.
void write_endpoints_csv(const EndpointSet& e, std::ostream& out);

// ---- Gaussian oracle for affine drift and constant noise ----

struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

class NonlinearModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LinearStructure {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd Q;  // 2 eps sum_j s_j w_j w_j^T
};

LinearStructure linear_structure(const ModelSpec& m, double eps);

// Law at rescaled time t by RK4 in physical time with step <= rk4_step.
GaussianLaw gaussian_oracle(const ModelSpec& m, double eps, double t, const std::vector<double>& x0,
                            double rk4_step = 1e-2);
// Laws at increasing rescaled times.
std::vector<GaussianLaw> gaussian_path(const ModelSpec& m, double eps, const std::vector<double>& times,
                                       const std::vector<double>& x0, double rk4_step = 1e-2);
// Same, started from a Gaussian law instead of a point mass.
std::vector<GaussianLaw> gaussian_path(const ModelSpec& m, double eps, const std::vector<double>& times,
                                       const GaussianLaw& start, double rk4_step = 1e-2);
GaussianLaw stationary_gaussian(const ModelSpec& m, double eps);

class GaussianDensity {
 public:
  explicit GaussianDensity(const GaussianLaw& law);
  double operator()(const double* x) const;
  double log_density(const double* x) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd Linv_;
  double log_norm_ = 0.0;
};

}  // namespace minorlab
