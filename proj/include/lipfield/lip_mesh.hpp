#pragma once

#include <span>
#include <vector>

#include "lipfield/geometry.hpp"
#include "lipfield/mesh.hpp"

namespace lipfield {

/// Linear map from the three vertex values of a triangle to the constant
/// gradient of their linear interpolant (1/mm).
struct GradientRows {
    std::array<double, 3> dx{};
    std::array<double, 3> dy{};
};

struct LipEdge {
    int a = 0;
    int b = 0;
    double length = 0.0;
};

/// Triangulation carrying the piecewise-linear damage field. When built from
/// an FeMesh, vertex i is the centroid of FE element i.
class LipMesh {
public:
    LipMesh(std::vector<Point2> vertices, std::vector<Tri> triangles);

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<Tri>& triangles() const { return triangles_; }
    const std::vector<LipEdge>& edges() const { return edges_; }

    const GradientRows& gradient_rows(std::size_t t) const { return rows_.at(t); }
    double triangle_area(std::size_t t) const { return areas_[t]; }

    /// Triangles incident to vertex v.
    std::span<const int> vertex_triangles(int v) const {
        return {star_.data() + star_offsets_[v], star_.data() + star_offsets_[v + 1]};
    }

    Point2 gradient(std::span<const double> field, std::size_t t) const;

private:
    std::vector<Point2> vertices_;
    std::vector<Tri> triangles_;
    std::vector<double> areas_;
    std::vector<GradientRows> rows_;
    std::vector<LipEdge> edges_;
    std::vector<int> star_offsets_;
    std::vector<int> star_;
};

/// Lip-mesh of an FE mesh: Delaunay triangulation of the element centroids,
/// minus every triangle whose centroid falls outside the FE domain or whose
/// edges touch an FE boundary edge. The result never bridges a hole, slit or
/// re-entrant notch.
LipMesh build_lip_mesh(const FeMesh& mesh);

/// Structured triangulation of [x0,x1]x[y0,y1] with nx*ny cells, each split
/// along alternating diagonals.
LipMesh structured_lip_mesh(double x0, double y0, double x1, double y1, int nx, int ny);

/// Lip-mesh adjacency with Euclidean edge lengths.
class EdgeGraph {
public:
    struct Arc {
        int to = 0;
        double length = 0.0;
    };

    explicit EdgeGraph(const LipMesh& lip);

    std::size_t num_vertices() const { return offsets_.size() - 1; }
    std::span<const Arc> neighbors(int v) const {
        return {arcs_.data() + offsets_[v], arcs_.data() + offsets_[v + 1]};
    }

private:
    std::vector<int> offsets_;
    std::vector<Arc> arcs_;
};

inline EdgeGraph edge_graph(const LipMesh& lip) { return EdgeGraph(lip); }

/// Shortest edge-path distances from a set of sources (infinity when unreachable).
std::vector<double> graph_distances(const EdgeGraph& graph, std::span<const int> sources);

}  // namespace lipfield
