#include "lipfield/benchmark.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "lipfield/damage.hpp"

namespace lipfield {

namespace {

// Symmetric 6-point rule, exact for degree 4 (barycentric weights sum to 1).
struct QuadPoint {
    double a, b, w;
};
constexpr std::array<QuadPoint, 6> kRule{{
    {0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.109951743655322},
    {0.816847572980459, 0.091576213509771, 0.109951743655322},
}};

}  // namespace

double cone_projection_exact(double r, double l, double l_bar) {
    if (l_bar >= l) return std::max(1.0 - r / l_bar, 0.0);
    return std::max(std::cbrt((l_bar / l) * (l_bar / l)) - r / l, 0.0);
}

double l2_relative_error(const LipMesh& lip, std::span<const double> field,
                         const std::function<double(Point2)>& exact, int refine) {
    if (field.size() != lip.num_vertices()) throw std::invalid_argument("field size does not match the mesh");
    if (refine < 1) throw std::invalid_argument("refinement must be positive");
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
        const Tri& tri = lip.triangles()[t];
        const Point2 P[3] = {lip.vertices()[tri[0]], lip.vertices()[tri[1]], lip.vertices()[tri[2]]};
        const double F[3] = {field[tri[0]], field[tri[1]], field[tri[2]]};
        const double sub_area = lip.triangle_area(t) / (refine * refine);
        // Sub-triangles in barycentric lattice coordinates (i, j), both orientations.
        auto integrate = [&](std::array<double, 2> b0, std::array<double, 2> b1, std::array<double, 2> b2) {
            for (const QuadPoint& q : kRule) {
                const double c = 1.0 - q.a - q.b;
                const double s = q.a * b0[0] + q.b * b1[0] + c * b2[0];
                const double u = q.a * b0[1] + q.b * b1[1] + c * b2[1];
                const double w = 1.0 - s - u;
                const Point2 x = w * P[0] + s * P[1] + u * P[2];
                const double fh = w * F[0] + s * F[1] + u * F[2];
                const double fe = exact(x);
                err2 += q.w * sub_area * (fh - fe) * (fh - fe);
                ref2 += q.w * sub_area * fe * fe;
            }
        };
        const double k = 1.0 / refine;
        for (int i = 0; i < refine; ++i) {
            for (int j = 0; i + j < refine; ++j) {
                integrate({i * k, j * k}, {(i + 1) * k, j * k}, {i * k, (j + 1) * k});
                if (i + j + 1 < refine)
                    integrate({(i + 1) * k, j * k}, {(i + 1) * k, (j + 1) * k}, {i * k, (j + 1) * k});
            }
        }
    }
    if (ref2 <= 0.0) throw std::invalid_argument("reference field has zero norm");
    return std::sqrt(err2 / ref2);
}

ProjectionCase projection_benchmark(double L, int cells, double l, double l_bar, const ConeSolverOptions& options) {
    if (!(L > 0.0 && l > 0.0 && l_bar > 0.0)) throw std::invalid_argument("L, l and l_bar must be positive");
    if (cells < 2 || cells % 2 != 0) throw std::invalid_argument("the cell count per side must be even");
    const double half = 0.5 * L;
    ProjectionCase pc{structured_lip_mesh(-half, -half, half, half, cells, cells), cells, L / cells, {}, {}, 0.0, 0.0,
                      l_bar >= l};
    const auto& verts = pc.mesh.vertices();
    pc.input.resize(verts.size());
    for (std::size_t v = 0; v < verts.size(); ++v) pc.input[v] = std::max(1.0 - norm(verts[v]) / l_bar, 0.0);
    pc.projected = lip_project_L2(pc.input, pc.mesh, l, options);
    pc.error = l2_relative_error(pc.mesh, pc.projected,
                                 [&](Point2 x) { return cone_projection_exact(norm(x), l, l_bar); });
    const int centre = (cells / 2) * (cells + 1) + cells / 2;
    pc.peak = pc.projected[centre];
    return pc;
}

}  // namespace lipfield
