#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lipfield/cone_solver.hpp"
#include "lipfield/lip_mesh.hpp"

namespace lipfield {

/// Projection of the cone max(1 - r / l_bar, 0) onto 1/l-Lipschitz functions
/// of the plane: max((l_bar / l)^(2/3) - r / l, 0) when l_bar < l, the cone
/// itself otherwise.
double cone_projection_exact(double r, double l, double l_bar);

/// || f_h - exact ||_L2 / || exact ||_L2 for a piecewise-linear f_h, with a
/// degree-4 rule on each triangle split into `refine`^2 subtriangles.
double l2_relative_error(const LipMesh& lip, std::span<const double> field,
                         const std::function<double(Point2)>& exact, int refine = 8);

struct ProjectionCase {
    LipMesh mesh;
    int cells = 0;                  // per side
    double h = 0.0;                 // edge length along x (mm)
    std::vector<double> input;      // nodal cone
    std::vector<double> projected;
    double error = 0.0;             // L2 relative error against the exact projection
    double peak = 0.0;              // projected value at the origin
    bool degenerate = false;        // l_bar >= l: the input is already admissible
};

/// Square of side L centred at the origin, `cells` (even) cells per side.
ProjectionCase projection_benchmark(double L, int cells, double l, double l_bar,
                                    const ConeSolverOptions& options = {});

}  // namespace lipfield
