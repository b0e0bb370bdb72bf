#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "minorlab/exec.hpp"
#include "minorlab/models.hpp"
#include "minorlab/sde.hpp"

namespace minorlab {

// Axis-aligned box split into cells; cell indices are row-major with the
// last axis fastest.
struct GridSpec {
  std::vector<double> lo, hi;
  std::vector<std::size_t> cells;

  void validate() const;
  std::size_t dim() const { return lo.size(); }
  std::size_t n_cells() const;
  double width(std::size_t axis) const { return (hi[axis] - lo[axis]) / static_cast<double>(cells[axis]); }
  double cell_volume() const;
  std::vector<double> center(std::size_t cell) const;
  // Lower corner of a cell.
  std::vector<double> corner(std::size_t cell) const;
  std::optional<std::size_t> locate(const double* x) const;

  // Same box and cell count on every axis.
  static GridSpec cube(std::size_t d, double lo, double hi, std::size_t cells);
};

// Clopper-Pearson interval for k successes out of n.
std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double level = 0.95);

struct DensityGrid {
  GridSpec grid;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_effective = 0;  // non-escaped samples
  std::uint64_t n_out_of_box = 0;
  std::vector<std::uint8_t> hr_mask;
  // Binomial 95% interval on each cell's probability, divided by the cell volume.
  std::vector<double> ci_lo, ci_hi;

  double estimate(std::size_t cell) const;
  double total_mass() const;
  double out_of_box_fraction() const;
};

// hr_mask[i] = H(center_i) < R.
std::vector<std::uint8_t> sublevel_mask(const GridSpec& g, const PolyExpr& H, double R);

// Histogram of the non-escaped points, with CIs and mask filled in.
DensityGrid bin_endpoints(const EndpointSet& e, const GridSpec& g, const PolyExpr& H, double R,
                          Exec exec = Exec::Parallel);

class GridCoverageError : public std::runtime_error {
 public:
  GridCoverageError(const std::string& what, double fraction) : std::runtime_error(what), fraction_(fraction) {}
  double fraction() const { return fraction_; }

 private:
  double fraction_;
};

struct DensityRun {
  double eps = 0.1;
  double t0 = 2.0;
  double R = 1.0;
  GridSpec grid;
  std::size_t n_traj = 100000;
  std::uint64_t seed = 0;
  double dt_phys = 1e-3;
  double escape_level = 1e4;
  double max_out_of_box = 0.01;
  // Refuse grids whose boundary probes do not clear H = 2R.
  bool require_cover = true;
};

// Seed of start i within a run.
std::uint64_t start_seed(std::uint64_t run_seed, std::size_t start_index);

// One grid per start, each from an ensemble at rescaled time t0.
std::vector<DensityGrid> estimate_density_grid(const ModelSpec& m, const std::vector<std::vector<double>>& starts,
                                               const DensityRun& run, Exec exec = Exec::Parallel);

// inf div Z when div Z is constant; throws otherwise.
double default_alpha(const ModelSpec& m);

// Endpoints at tau = t0 + Exp(alpha) per trajectory.
DensityGrid estimate_time_averaged(const ModelSpec& m, const std::vector<double>& start, double alpha,
                                   const DensityRun& run, Exec exec = Exec::Parallel);

// 3^d lattice {-s,0,s}^d with the largest s keeping every point in H <= fraction*R.
std::vector<std::vector<double>> start_lattice(const ModelSpec& m, double R, double fraction = 0.9);

// ---- oracles for affine models ----

// Gauss-Legendre nodes/weights on [-1,1] and Gauss-Laguerre for weight e^{-x}.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n);
std::pair<std::vector<double>, std::vector<double>> gauss_laguerre(std::size_t n);

// Cell averages of a Gaussian density (nodes per axis of tensor Gauss-Legendre).
std::vector<double> gaussian_cell_averages(const GaussianLaw& law, const GridSpec& g, std::size_t nodes = 4);

// Cell averages of alpha int_{t0}^inf e^{-alpha(t-t0)} q_t dt by Gauss-Laguerre in t.
std::vector<double> time_averaged_cell_averages(const ModelSpec& m, double eps, const std::vector<double>& x0,
                                                double t0, double alpha, const GridSpec& g,
                                                std::size_t t_nodes = 40, std::size_t x_nodes = 4);

struct OracleComparison {
  std::size_t n_masked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_cell = 0;
  std::size_t n_in_ci = 0;
  double fraction_in_ci = 0.0;
};

OracleComparison compare_to_oracle(const DensityGrid& g, const std::vector<double>& oracle);

// ---- minorization sweep ----

struct MinorizationRow {
  double eps = 0, t0 = 0, R = 0;
  double lambda_hat = 0, lambda_ci_low = 0;
  std::size_t argmin_start = 0, argmin_cell = 0;
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
  std::optional<double> oracle_lambda;
};

struct MinorizationReport {
  std::vector<MinorizationRow> rows;
  std::vector<std::vector<double>> starts;
  double ratio_bound = 3.0;
  double min_ci_low = 0, lambda_ratio = 0;
  std::optional<double> oracle_ratio;
  bool passes = false;
};

// Min over (start, masked cell) of a per-start cell table.
struct MaskedMin {
  double value = 0;
  std::size_t start = 0, cell = 0;
};
MaskedMin masked_minimum(const std::vector<std::vector<double>>& per_start, const std::vector<std::uint8_t>& mask);

MinorizationRow minorization_row(const std::vector<DensityGrid>& grids, const DensityRun& run);

// Oracle lambda(eps): min over starts and masked cells of the Gaussian cell averages.
MaskedMin oracle_minorization(const ModelSpec& m, const std::vector<std::vector<double>>& starts, double eps,
                              double t0, double R, const GridSpec& g);

struct SweepConfig {
  double R = 4.0, t0 = 2.0;
  std::vector<double> eps_list;
  GridSpec grid;
  double start_fraction = 0.9;
  std::size_t n_traj = 100000;
  std::uint64_t seed = 0;
  // dt_phys for the runs; 0 selects default_dt_phys.
  double dt_phys = 0.0;
  double ratio_bound = 3.0;
  bool with_oracle = false;
};

MinorizationReport minorization_sweep(const ModelSpec& m, const SweepConfig& cfg, Exec exec = Exec::Parallel);

// Header: eps,t0,R,lambda_hat,lambda_ci_low,argmin_start,argmin_cell,n_traj,seed
void write_sweep_csv(const MinorizationReport& r, std::ostream& out);
// Header: cell_index,center_coords,estimate,ci_lo,ci_hi,hr_mask. center_coords
// joins the coordinates with ';'.
void write_density_csv(const DensityGrid& g, std::ostream& out);

// ---- mixing ----

// Total variation between two 2-d Gaussian laws by midpoint quadrature on an
// n x n grid. A law with singular covariance is at distance 1 from any
// nonsingular law.
double gaussian_tv_2d(const GaussianLaw& a, const GaussianLaw& b, std::size_t n = 400);

struct MixingRow {
  double eps = 0;
  double t_mix = 0;          // rescaled
  double t_mix_physical = 0;  // t_mix / eps
  double eps_times_t_phys = 0;
  double tv_at_mix = 0, tv_before = 1;
};

struct MixingReport {
  std::vector<MixingRow> rows;
  double spread = 0;  // max/min of rescaled t_mix
  std::vector<std::vector<double>> tv_curves;  // per eps, over the evaluated prefix of t_grid
};

MixingReport mixing_time(const ModelSpec& m, const std::vector<double>& eps_list, const std::vector<double>& t_grid,
                         const GaussianLaw& start, double tv_threshold = 0.25, std::size_t quad_n = 400);
MixingReport mixing_time(const ModelSpec& m, const std::vector<double>& eps_list, const std::vector<double>& t_grid,
                         const std::vector<double>& x0, double tv_threshold = 0.25, std::size_t quad_n = 400);

}  // namespace minorlab
