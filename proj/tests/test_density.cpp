#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "minorlab/density.hpp"
#include "minorlab/io.hpp"

using namespace minorlab;

namespace {

GridSpec grid40() { return GridSpec::cube(2, -3.0, 3.0, 40); }

DensityRun run_for(double eps, double t0, double R, GridSpec g, std::size_t n, std::uint64_t seed) {
  DensityRun r;
  r.eps = eps;
  r.t0 = t0;
  r.R = R;
  r.grid = std::move(g);
  r.n_traj = n;
  r.seed = seed;
  r.dt_phys = 0.02;
  return r;
}

}  // namespace

TEST_CASE("grid geometry") {
  GridSpec g{{-1.0, 0.0}, {1.0, 3.0}, {4, 3}};
  CHECK(g.n_cells() == 12);
  CHECK(g.cell_volume() == doctest::Approx(0.5));
  CHECK(g.center(0) == std::vector<double>{-0.75, 0.5});
  CHECK(g.center(5) == std::vector<double>{-0.25, 2.5});  // last axis fastest
  CHECK(g.corner(5) == std::vector<double>{-0.5, 2.0});
  const double in[2] = {0.1, 1.2}, out[2] = {1.5, 0.0}, edge[2] = {1.0, 3.0};
  CHECK(g.locate(in) == std::optional<std::size_t>(2 * 3 + 1));
  CHECK_FALSE(g.locate(out).has_value());
  CHECK(g.locate(edge) == std::optional<std::size_t>(11));
  GridSpec bad{{0.0}, {0.0}, {3}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("quadrature rules match numpy") {
  auto [lx, lw] = gauss_legendre(5);
  const double ex[5] = {-0.906179845938664, -0.5384693101056831, 0.0, 0.5384693101056831, 0.906179845938664};
  const double ew[5] = {0.23692688505618942, 0.4786286704993662, 0.568888888888889, 0.4786286704993662,
                        0.23692688505618942};
  for (int i = 0; i < 5; ++i) {
    CHECK(lx[i] == doctest::Approx(ex[i]).epsilon(1e-13));
    CHECK(lw[i] == doctest::Approx(ew[i]).epsilon(1e-13));
  }
  auto [gx, gw] = gauss_laguerre(5);
  const double qx[5] = {0.26356031971814087, 1.4134030591065168, 3.596425771040722, 7.085810005858837,
                        12.640800844275782};
  const double qw[5] = {0.5217556105828085, 0.398666811083176, 0.07594244968170769, 0.0036117586799220545,
                        2.3369972385776248e-05};
  for (int i = 0; i < 5; ++i) {
    CHECK(gx[i] == doctest::Approx(qx[i]).epsilon(1e-12));
    CHECK(gw[i] == doctest::Approx(qw[i]).epsilon(1e-10));
  }
}

TEST_CASE("Clopper-Pearson intervals match scipy beta quantiles") {
  auto a = clopper_pearson(3, 100);
  CHECK(a.first == doctest::Approx(0.006229971538306395).epsilon(1e-12));
  CHECK(a.second == doctest::Approx(0.08517605297428002).epsilon(1e-12));
  auto b = clopper_pearson(0, 50);
  CHECK(b.first == 0.0);
  CHECK(b.second == doctest::Approx(0.07112173646419764).epsilon(1e-12));
  auto c = clopper_pearson(50, 50);
  CHECK(c.first == doctest::Approx(0.9288782635358024).epsilon(1e-12));
  CHECK(c.second == 1.0);
  auto d = clopper_pearson(500, 1000);
  CHECK(d.first == doctest::Approx(0.46854917297179216).epsilon(1e-12));
  CHECK(d.second == doctest::Approx(0.5314508270282079).epsilon(1e-12));
}

TEST_CASE("Gaussian cell averages match adaptive 2-d quadrature") {
  GaussianLaw law = gaussian_oracle(testing::linear_langevin(1), 0.1, 2.0, {0.0, 0.0});
  auto c = gaussian_cell_averages(law, grid40());
  CHECK(c[820] == doctest::Approx(0.18262739163708083).epsilon(1e-7));
  CHECK(c[425] == doctest::Approx(0.03756505831507292).epsilon(1e-7));
  CHECK(c[0] == doctest::Approx(1.0655654102554857e-05).epsilon(1e-6));
}

TEST_CASE("time-averaged oracle matches nested adaptive quadrature") {
  auto c = time_averaged_cell_averages(testing::linear_langevin(1), 0.1, {0.0, 0.0}, 1.0, 1.0, grid40());
  CHECK(c[820] == doctest::Approx(0.19678550532863032).epsilon(1e-3));
  CHECK(c[507] == doctest::Approx(0.03986221528474508).epsilon(1e-3));
}

TEST_CASE("histogram is unbiased on a uniform law") {
  // Uniform points on [0,1]^2, binned on a 10 x 10 grid: every cell has probability 1/100.
  // Over 5 seeds (500 cells) 95% intervals should cover 1.0 at least 475 - 3 sd = 460 times.
  const std::size_t N = 100000;
  GridSpec g = GridSpec::cube(2, 0.0, 1.0, 10);
  std::size_t inside = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EndpointSet e;
    e.dim = 2;
    e.points.resize(2 * N);
    e.escaped.assign(N, 0);
    CounterStream s(seed, StreamPurpose::Fixture, 0);
    for (auto& v : e.points) v = s.next_uniform();
    DensityGrid d = bin_endpoints(e, g, symbolic::parse_scalar("x1^2 + x2^2", 2), 100.0);
    double chi2 = 0;
    for (std::size_t c = 0; c < g.n_cells(); ++c) {
      if (d.ci_lo[c] <= 1.0 && 1.0 <= d.ci_hi[c]) ++inside;
      const double k = double(d.counts[c]);
      chi2 += (k - 1000.0) * (k - 1000.0) / 1000.0;
    }
    CHECK(chi2 < 99.0 + 4.0 * std::sqrt(198.0));
    CHECK(d.total_mass() == doctest::Approx(1.0));
    CHECK(d.out_of_box_fraction() == 0.0);
  }
  CHECK(inside >= 460);
}

TEST_CASE("binning counts escaped and out-of-box samples correctly") {
  EndpointSet e;
  e.dim = 1;
  e.points = {0.5, 2.0, -0.5, 0.25};
  e.escaped = {0, 0, 1, 0};
  GridSpec g = GridSpec::cube(1, 0.0, 1.0, 2);
  DensityGrid d = bin_endpoints(e, g, symbolic::parse_scalar("x1^2", 1), 0.5);
  CHECK(d.n_effective == 3);
  CHECK(d.n_out_of_box == 1);
  CHECK(d.counts == std::vector<std::uint64_t>{1, 1});
  CHECK(d.hr_mask == std::vector<std::uint8_t>{1, 0});
  CHECK(d.estimate(0) == doctest::Approx(2.0 / 3.0));
  CHECK(d.total_mass() <= 1.0);
}

TEST_CASE("density estimate matches the Gaussian oracle on masked cells") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -3.0, 3.0, 12);
  DensityRun r = run_for(0.2, 2.0, 1.0, g, 200000, 9);
  auto grids = estimate_density_grid(m, {{0.0, 0.0}}, r);
  REQUIRE(grids.size() == 1);
  CHECK(grids[0].total_mass() <= 1.0 + 1e-12);
  auto oracle = gaussian_cell_averages(gaussian_oracle(m, 0.2, 2.0, {0.0, 0.0}), g);
  OracleComparison c = compare_to_oracle(grids[0], oracle);
  CHECK(c.n_masked > 0);
  CHECK(c.max_rel_error <= 0.15);
  CHECK(c.fraction_in_ci >= 0.93);
}

TEST_CASE("density runs are deterministic and bit-identical across execution modes") {
  ModelSpec m = testing::linear_langevin(1);
  DensityRun r = run_for(0.3, 1.0, 1.0, GridSpec::cube(2, -4.0, 4.0, 16), 5000, 4);
  auto a = estimate_density_grid(m, {{0.0, 0.0}, {0.5, 0.5}}, r, Exec::Serial);
  auto b = estimate_density_grid(m, {{0.0, 0.0}, {0.5, 0.5}}, r, Exec::Parallel);
  auto c = estimate_density_grid(m, {{0.0, 0.0}, {0.5, 0.5}}, r, Exec::Parallel);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].counts == b[i].counts);
    CHECK(b[i].counts == c[i].counts);
  }
  CHECK(a[0].counts != a[1].counts);
}

TEST_CASE("density run preconditions") {
  ModelSpec m = testing::linear_langevin(1);
  SUBCASE("start outside H_R") {
    DensityRun r = run_for(0.3, 1.0, 1.0, GridSpec::cube(2, -4.0, 4.0, 16), 100, 1);
    CHECK_THROWS_AS(estimate_density_grid(m, {{3.0, 0.0}}, r), std::invalid_argument);
  }
  SUBCASE("box not covering H < 2R") {
    DensityRun r = run_for(0.3, 1.0, 1.0, GridSpec::cube(2, -1.0, 1.0, 8), 100, 1);
    CHECK_THROWS_AS(estimate_density_grid(m, {{0.0, 0.0}}, r), std::invalid_argument);
  }
  SUBCASE("endpoint cloud leaking out of the box") {
    DensityRun r = run_for(0.3, 1.0, 0.5, GridSpec::cube(2, -1.5, 1.5, 12), 2000, 1);
    CHECK_THROWS_AS(estimate_density_grid(m, {{0.0, 0.0}}, r), GridCoverageError);
  }
  SUBCASE("R below the grid resolution") {
    DensityRun r = run_for(0.3, 1.0, 1e-6, GridSpec::cube(2, -4.0, 4.0, 8), 100, 1);
    CHECK_THROWS_AS(estimate_density_grid(m, {{0.0, 0.0}}, r), std::invalid_argument);
  }
}

TEST_CASE("masked minimum is monotone in R on fixed data") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -4.0, 4.0, 16);
  DensityRun r = run_for(0.3, 1.0, 2.0, g, 20000, 2);
  auto grids = estimate_density_grid(m, {{0.0, 0.0}}, r);
  std::vector<std::vector<double>> est(1, std::vector<double>(g.n_cells()));
  for (std::size_t c = 0; c < g.n_cells(); ++c) est[0][c] = grids[0].estimate(c);
  double prev = std::numeric_limits<double>::infinity();
  for (double R : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double v = masked_minimum(est, sublevel_mask(g, m.H, R)).value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("time-averaged estimator matches its quadrature oracle") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -3.0, 3.0, 12);
  DensityRun r = run_for(0.2, 1.0, 1.0, g, 200000, 12);
  const double alpha = default_alpha(m);
  CHECK(alpha == 1.0);
  DensityGrid d = estimate_time_averaged(m, {0.0, 0.0}, alpha, r);
  auto oracle = time_averaged_cell_averages(m, 0.2, {0.0, 0.0}, 1.0, alpha, g);
  OracleComparison c = compare_to_oracle(d, oracle);
  CHECK(c.max_rel_error <= 0.15);
  CHECK(d.total_mass() <= 1.0 + 1e-12);
}

TEST_CASE("time-averaged oracle converges to the fixed-time law as alpha grows") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -3.0, 3.0, 12);
  // Largest relative gap over cells with mass: 6.5% at alpha = 50, 0.3% at alpha = 1000.
  const auto ft = gaussian_cell_averages(gaussian_oracle(m, 0.2, 1.0, {0.0, 0.0}), g);
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {50.0, 200.0, 1000.0}) {
    const auto ta = time_averaged_cell_averages(m, 0.2, {0.0, 0.0}, 1.0, a, g);
    double mx = 0;
    for (std::size_t c = 0; c < g.n_cells(); ++c)
      if (ft[c] > 0.01) mx = std::max(mx, std::abs(ta[c] / ft[c] - 1));
    CHECK(mx < prev);
    prev = mx;
  }
  CHECK(prev < 0.004);
}

TEST_CASE("alpha = 50 agrees with the fixed-time estimator within joint CIs") {
  // At N = 1e4 the joint intervals (about 20% in the densest cell) cover the true 6.5% gap.
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -3.0, 3.0, 12);
  DensityRun r = run_for(0.2, 1.0, 1.0, g, 10000, 13);
  DensityGrid ta = estimate_time_averaged(m, {0.0, 0.0}, 50.0, r);
  DensityGrid ft = estimate_density_grid(m, {{0.0, 0.0}}, r)[0];
  for (std::size_t c = 0; c < g.n_cells(); ++c)
    if (ta.hr_mask[c]) {
      CAPTURE(c);
      CHECK(ta.ci_lo[c] <= ft.ci_hi[c]);
      CHECK(ft.ci_lo[c] <= ta.ci_hi[c]);
    }
}

TEST_CASE("time-averaged CI width shrinks like 1/sqrt(n)") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -3.0, 3.0, 12);
  auto mean_width = [&](std::size_t n) {
    DensityGrid d = estimate_time_averaged(m, {0.0, 0.0}, 1.0, run_for(0.3, 1.0, 1.0, g, n, 14));
    double acc = 0;
    std::size_t k = 0;
    for (std::size_t c = 0; c < g.n_cells(); ++c)
      if (d.hr_mask[c]) acc += d.ci_hi[c] - d.ci_lo[c], ++k;
    return acc / double(k);
  };
  const double w1 = mean_width(20000), w4 = mean_width(80000);
  CHECK(w4 / w1 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("e^{-alpha t0} times the time-averaged maximum is bounded across eps") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -3.0, 3.0, 12);
  std::vector<double> maxima;
  for (double eps : {0.4, 0.2}) {
    DensityGrid d = estimate_time_averaged(m, {0.0, 0.0}, 1.0, run_for(eps, 1.0, 1.0, g, 20000, 15));
    double mx = 0;
    for (std::size_t c = 0; c < g.n_cells(); ++c)
      if (d.hr_mask[c]) mx = std::max(mx, std::exp(-1.0) * d.estimate(c));
    maxima.push_back(mx);
  }
  CHECK(*std::max_element(maxima.begin(), maxima.end()) / *std::min_element(maxima.begin(), maxima.end()) <= 3.0);
}

TEST_CASE("default alpha needs constant div Z") {
  CHECK(default_alpha(testing::lorenz4()) == 2.0);
  ModelSpec m = testing::linear_langevin(1);
  m.Z = symbolic::parse_field("x1*d/dv1 + v1^2*d/dv1", 2);
  CHECK_THROWS_AS(default_alpha(m), std::invalid_argument);
}

TEST_CASE("start lattice is the largest 3^d lattice inside H <= 0.9 R") {
  auto pts = start_lattice(testing::linear_langevin(1), 4.0, 0.9);
  REQUIRE(pts.size() == 9);
  // H = (x^2 + v^2)/2 is largest at the corners: s^2 = 0.9 * 4.
  const double s = std::sqrt(3.6);
  double mx = 0;
  for (const auto& p : pts) mx = std::max(mx, std::abs(p[0]));
  CHECK(mx == doctest::Approx(s).epsilon(1e-12));
  CHECK(std::count(pts.begin(), pts.end(), std::vector<double>{0.0, 0.0}) == 1);
}

TEST_CASE("minorization sweep: oracle values and an empty mask") {
  ModelSpec m = testing::linear_langevin(1);
  GridSpec g = GridSpec::cube(2, -4.0, 4.0, 16);
  auto starts = start_lattice(m, 1.0);
  MaskedMin a = oracle_minorization(m, starts, 0.4, 2.0, 1.0, g), b = oracle_minorization(m, starts, 0.2, 2.0, 1.0, g);
  CHECK(a.value > 0);
  CHECK(b.value > 0);
  CHECK_THROWS_AS(oracle_minorization(m, starts, 0.4, 2.0, 1e-6, g), std::invalid_argument);
}

TEST_CASE("minorization sweep end to end at small scale") {
  ModelSpec m = testing::linear_langevin(1);
  SweepConfig cfg;
  cfg.R = 1.0;
  cfg.t0 = 2.0;
  cfg.eps_list = {0.4, 0.2};
  cfg.grid = GridSpec::cube(2, -3.5, 3.5, 14);
  cfg.n_traj = 20000;
  cfg.seed = 3;
  cfg.dt_phys = 0.05;
  cfg.with_oracle = true;
  MinorizationReport a = minorization_sweep(m, cfg, Exec::Serial);
  MinorizationReport b = minorization_sweep(m, cfg, Exec::Parallel);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].lambda_hat == b.rows[0].lambda_hat);
  CHECK(a.rows[1].lambda_ci_low == b.rows[1].lambda_ci_low);
  CHECK(a.min_ci_low > 0);
  CHECK(a.passes);
  CHECK(a.oracle_ratio.has_value());
  std::ostringstream csv;
  write_sweep_csv(a, csv);
  CHECK(csv.str().rfind("eps,t0,R,lambda_hat,lambda_ci_low,argmin_start,argmin_cell,n_traj,seed\n", 0) == 0);
}

// ---- mixing ----

TEST_CASE("TV between two Gaussians matches adaptive quadrature") {
  GaussianLaw a{Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()};
  GaussianLaw b{Eigen::Vector2d(0.5, 0), (Eigen::Matrix2d() << 1.0, 0.0, 0.0, 1.5).finished()};
  CHECK(gaussian_tv_2d(a, b) == doctest::Approx(0.2228200626796574).epsilon(1e-5));
  CHECK(gaussian_tv_2d(a, a) == 0.0);
  GaussianLaw point{Eigen::Vector2d(0, 0), Eigen::Matrix2d::Zero()};
  CHECK(gaussian_tv_2d(point, a) == 1.0);
}

TEST_CASE("mixing time from x0 = (2,0) on a 0.01 grid") {
  ModelSpec m = testing::linear_langevin(1);
  std::vector<double> t;
  for (int k = 1; k <= 1000; ++k) t.push_back(0.01 * k);
  MixingReport r = mixing_time(m, {0.2, 0.1}, t, std::vector<double>{2.0, 0.0});
  REQUIRE(r.rows.size() == 2);
  // Oracle: first grid time with TV <= 1/4 on a 1200^2 midpoint grid.
  CHECK(r.rows[0].t_mix == doctest::Approx(2.30));
  CHECK(r.rows[1].t_mix == doctest::Approx(2.36));
  CHECK(r.rows[1].t_mix_physical == doctest::Approx(23.6));
  CHECK(r.spread <= 1.3);
  CHECK(r.rows[0].tv_at_mix <= 0.25);
  CHECK(r.rows[0].tv_before > 0.25);
}

TEST_CASE("TV decays to zero and vanishes from stationarity") {
  ModelSpec m = testing::linear_langevin(1);
  auto laws = gaussian_path(m, 0.2, {100.0}, std::vector<double>{2.0, 0.0});
  CHECK(gaussian_tv_2d(laws[0], stationary_gaussian(m, 0.2)) <= 1e-3);
  GaussianLaw pi = stationary_gaussian(m, 0.2);
  for (const auto& g : gaussian_path(m, 0.2, {0.5, 1.0, 3.0}, pi)) CHECK(gaussian_tv_2d(g, pi) <= 1e-9);
}

TEST_CASE("mixing fails loudly when the threshold is never reached") {
  CHECK_THROWS_AS(mixing_time(testing::linear_langevin(1), {0.2}, {0.1, 0.2}, std::vector<double>{2.0, 0.0}),
                  std::runtime_error);
}

TEST_CASE("CSV writers emit the documented headers") {
  DensityGrid d;
  d.grid = GridSpec::cube(2, 0.0, 1.0, 1);
  d.counts = {1};
  d.n_effective = 1;
  d.hr_mask = {1};
  d.ci_lo = {0.5};
  d.ci_hi = {1.0};
  std::ostringstream a;
  write_density_csv(d, a);
  CHECK(a.str() == "cell_index,center_coords,estimate,ci_lo,ci_hi,hr_mask\n0,0.5;0.5,1,0.5,1,1\n");
  MixingReport r;
  r.rows.push_back({0.2, 0.02, 0.1, 0.02, 0.2, 0.3});
  r.tv_curves = {{0.3, 0.2}};
  std::ostringstream b;
  write_mixing_csv(r, {0.01, 0.02}, b);
  const std::string text = b.str();
  CHECK(text.rfind("eps,t,tv\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
