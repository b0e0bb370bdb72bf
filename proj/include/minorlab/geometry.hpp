#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "minorlab/symbolic.hpp"

namespace minorlab {

struct PolytopeSample {
  std::size_t d = 0;
  double S = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> vertices;
};

// N points uniform on the sphere of radius S (normalized Gaussian draws).
PolytopeSample sample_polytope(std::size_t d, double S, std::size_t N, std::uint64_t seed);

class LPError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LPResult {
  enum class Status { Optimal, Infeasible, Unbounded } status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// min c.x subject to A x = b, x >= 0. Dense two-phase simplex, Bland's rule,
// feasibility tolerance 1e-9. Throws LPError when the iteration guard trips.
LPResult simplex_solve(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c, std::size_t max_iterations = 0);

// query in conv(vertices), by feasibility of the convex-combination LP.
bool hull_contains(const PolytopeSample& P, const std::vector<double>& query);
bool hull_contains(const std::vector<std::vector<double>>& vertices, const std::vector<double>& query);

struct Facet {
  std::vector<std::size_t> vertices;  // 2 for an edge (d=2), 3 for a triangle (d=3)
  std::vector<double> normal;         // outward
};

// Hull facets: gift wrapping in 2-d, incremental construction in 3-d.
std::vector<Facet> hull_facets(const std::vector<std::vector<double>>& points);

struct TransversalityReport {
  bool all_transverse = false;
  std::size_t n_facets = 0;
  std::vector<Facet> offenders;
};

// A facet is transverse to v iff |n.v| > 1e-9 |n||v|.
TransversalityReport transversality_check(const PolytopeSample& P, const std::vector<double>& v);

// Max over n_probes equally spaced points S u on the circle of their distance
// to the hull (d = 2); estimates the Hausdorff distance between hull and disk.
double hausdorff_probe_2d(const PolytopeSample& P, std::size_t n_probes = 1000);

struct SublevelContainment {
  std::size_t n_probes = 0, n_inside = 0;
  std::optional<std::vector<double>> first_outside;
  bool contained = false;
};

// LP membership of seeded points on the boundary of {H < R} (found by
// bisection along random rays from the origin).
SublevelContainment hull_contains_sublevel(const PolytopeSample& P, const symbolic::PolyExpr& H, double R,
                                           std::size_t n_probes, std::uint64_t seed);

}  // namespace minorlab
