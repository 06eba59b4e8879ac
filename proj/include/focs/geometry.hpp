#ifndef FOCS_GEOMETRY_HPP
#define FOCS_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "focs/engine.hpp"
#include "focs/graph.hpp"

namespace focs {

// Minimal extreme-point representation. Degenerate inputs collapse:
// intrinsic_dim 0 is a single point, 1 a segment (two endpoint vertices),
// 2 a counterclockwise polygon (planar when the ambient dimension is 3),
// 3 a polytope with outward-oriented triangular faces.
struct ConvexHull {
    std::size_t dim = 0;  // ambient dimension, 1..3
    int intrinsic_dim = 0;
    std::vector<std::vector<double>> vertices;
    std::vector<std::array<std::size_t, 3>> faces;  // only when intrinsic_dim == 3
};

// Exact hulls for ambient dimension 1, 2, or 3; anything higher throws an
// unsupported-dimension error (coordinate-wise spread remains available).
ConvexHull convex_hull(const std::vector<std::vector<double>>& points);

// Euclidean distance from a point to the hull set; 0 when inside.
double hull_distance(std::span<const double> point, const ConvexHull& hull);

// distance <= tol counts as inside.
bool point_in_hull(std::span<const double> point, const ConvexHull& hull, double tol = 1e-3);

// Lebesgue measure in the ambient dimension: length / area / volume, 0 for
// degenerate hulls.
double hull_volume(const ConvexHull& hull);

// Coordinate-wise max minus min over all agents.
std::vector<double> spread(const StateSet& states);

struct ContainmentReport {
    bool complete = false;       // run finished its full horizon
    std::string status;          // run status name
    bool connectivity_preserved = false;  // <=> min_margin_over_run > 0
    double min_margin_over_run = 0.0;
    std::vector<double> final_hull_distances;       // per follower, leader-only hull
    std::vector<double> hull_volume_series;         // per recorded step, all agents
    std::vector<std::vector<double>> spread_series; // [record][coordinate]
    std::vector<double> equilibrium_residuals;      // per follower, final record
    double min_offdiagonal = 0.0;    // worst over recorded steps
    double max_row_sum_abs = 0.0;    // worst over recorded steps
    std::optional<BreachInfo> breach;
    std::string note;  // set when a dimension fallback replaced exact hulls
};

// Aggregates the run verdicts. For dimension > 3, hull distances and
// volumes fall back to per-coordinate interval checks (a necessary-condition
// proxy) and the note labels the substitution.
ContainmentReport build_report(const TrajectoryRecord& trajectory, const NetworkTopology& topology,
                               const ControllerParams& params);

}  // namespace focs

#endif
