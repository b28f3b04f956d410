#pragma once

#include <cstdint>

#include "lipfield/mesh.hpp"

namespace lipfield::meshgen {

/// Boundary tags shared by the generators.
enum Tag : int {
    bottom = 1,
    right = 2,
    top = 3,
    left = 4,
    hole = 5,
    crack_upper = 10,  // crack-path edge of the upper half / upper slit lip
    crack_lower = 11,
    left_upper = 12,   // loaded edges of split specimens
    left_lower = 13,
};

/// [x0,x1]x[y0,y1] split into nx*ny cells, two triangles each, diagonals
/// alternating in a checkerboard.
MeshData structured_rectangle(double x0, double y0, double x1, double y1, int nx, int ny);

/// Square [-L/2, L/2]^2 with a centered hole of radius R. O-grid with
/// n_side cells per square side and n_radial geometrically graded layers.
MeshData plate_with_hole(double L, double R, int n_side, int n_radial);

/// Strip [0,Lx]x[-H,H] with a slit along y = 0 from x = 0 to x = a0 (nodes
/// duplicated on the slit). Left edge halves are tagged left_upper and
/// left_lower, slit lips crack_upper and crack_lower. Row heights grow by
/// the factor `grading` away from y = 0.
MeshData slit_strip(double Lx, double H, double a0, int nx, int ny_half, double grading = 1.0);

/// Two disconnected halves [0,Lx]x[0,H] and [0,Lx]x[-H,0] with coincident
/// nodes on y = 0 (tags crack_upper / crack_lower); left edges tagged
/// left_upper / left_lower.
MeshData two_half_strip(double Lx, double H, int nx, int ny_half);

/// Structured rectangle with interior nodes jittered by up to
/// `jitter` (< 0.25) times the cell size.
MeshData perturbed_rectangle(double Lx, double Ly, int nx, int ny, double jitter, std::uint64_t seed);

}  // namespace lipfield::meshgen
