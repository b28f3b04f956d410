#pragma once

#include <span>
#include <vector>

#include "lipfield/geometry.hpp"

namespace lipfield {

/// Delaunay triangulation of a planar point set by incremental insertion and
/// Lawson edge flips, with exact orientation/incircle predicates.
/// Returns counterclockwise triangles indexing into `points`. Cocircular
/// configurations are resolved arbitrarily but consistently.
/// Throws MeshError on duplicate points, fewer than 3 points or a fully
/// collinear set.
std::vector<Tri> delaunay_triangulation(std::span<const Point2> points);

}  // namespace lipfield
