#pragma once

#include <span>
#include <vector>

#include "lipfield/lip_mesh.hpp"

namespace lipfield {

/// Lipschitz envelopes of a damage field under the edge-graph metric.
struct BoundsPair {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Envelopes computed by two priority-queue sweeps, O(n log n).
BoundsPair dijkstra_bounds(std::span<const double> d_loc, const EdgeGraph& graph, double l);

/// Same envelopes from one shortest-path tree per source vertex, O(n^2 log n).
BoundsPair bruteforce_bounds(std::span<const double> d_loc, const EdgeGraph& graph, double l);

enum class LipschitzSet {
    Lh,       // per triangle: |grad d| <= 1/l
    Lh_plus,  // per edge: |d(x) - d(y)| <= |x - y| / l
};

/// Largest constraint excess lhs - 1/l (gradient units); <= 0 means membership.
double lipschitz_violation(std::span<const double> d, const LipMesh& lip, double l, LipschitzSet set);

/// Largest excess |d(x) - d(y)| - dist(x, y) / l over all vertex pairs, with
/// dist the edge-graph distance (damage units). O(n^2 log n), for tests and
/// validation.
double pairwise_violation(std::span<const double> d, const EdgeGraph& graph, double l);

}  // namespace lipfield
