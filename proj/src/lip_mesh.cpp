#include "lipfield/lip_mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>

#include "lipfield/delaunay.hpp"

namespace lipfield {

namespace {

/// Uniform bucket grid over axis-aligned boxes.
class BoxGrid {
public:
    BoxGrid(double xmin, double ymin, double xmax, double ymax, std::size_t expected)
        : xmin_(xmin), ymin_(ymin) {
        const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(expected))));
        nx_ = ny_ = side;
        wx_ = std::max(xmax - xmin, 1e-300) / nx_;
        wy_ = std::max(ymax - ymin, 1e-300) / ny_;
        cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    }

    void insert(int id, double x0, double y0, double x1, double y1) {
        for_cells(x0, y0, x1, y1, [&](std::vector<int>& cell) { cell.push_back(id); });
    }

    template <class Fn>
    void for_cells(double x0, double y0, double x1, double y1, Fn&& fn) {
        const int i0 = clampx(x0), i1 = clampx(x1), j0 = clampy(y0), j1 = clampy(y1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) fn(cells_[static_cast<std::size_t>(j) * nx_ + i]);
    }

private:
    double xmin_, ymin_, wx_ = 1, wy_ = 1;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> cells_;

    int clampx(double x) const { return std::clamp(static_cast<int>(std::floor((x - xmin_) / wx_)), 0, nx_ - 1); }
    int clampy(double y) const { return std::clamp(static_cast<int>(std::floor((y - ymin_) / wy_)), 0, ny_ - 1); }
};

std::uint64_t key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

LipMesh::LipMesh(std::vector<Point2> vertices, std::vector<Tri> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int nv = static_cast<int>(vertices_.size());
    areas_.reserve(triangles_.size());
    rows_.reserve(triangles_.size());
    std::unordered_map<std::uint64_t, int> edge_index;
    std::vector<int> star_count(nv + 1, 0);
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        Tri& tri = triangles_[t];
        for (int v : tri)
            if (v < 0 || v >= nv) throw MeshError("Lip-mesh triangle " + std::to_string(t) + " has an invalid vertex");
        if (predicates::orient(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) < 0) std::swap(tri[1], tri[2]);
        const Point2 p0 = vertices_[tri[0]], p1 = vertices_[tri[1]], p2 = vertices_[tri[2]];
        const double two_a = cross(p1 - p0, p2 - p0);
        if (!(two_a > 0.0)) throw MeshError("degenerate Lip-mesh triangle " + std::to_string(t));
        areas_.push_back(0.5 * two_a);
        GradientRows r;
        r.dx = {(p1.y - p2.y) / two_a, (p2.y - p0.y) / two_a, (p0.y - p1.y) / two_a};
        r.dy = {(p2.x - p1.x) / two_a, (p0.x - p2.x) / two_a, (p1.x - p0.x) / two_a};
        rows_.push_back(r);
        for (int i = 0; i < 3; ++i) {
            const int a = tri[i], b = tri[(i + 1) % 3];
            if (edge_index.emplace(key(a, b), static_cast<int>(edges_.size())).second)
                edges_.push_back(LipEdge{std::min(a, b), std::max(a, b), distance(vertices_[a], vertices_[b])});
            ++star_count[a + 1];
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const LipEdge& l, const LipEdge& r) {
        return std::pair(l.a, l.b) < std::pair(r.a, r.b);
    });
    star_offsets_.assign(nv + 1, 0);
    for (int v = 0; v < nv; ++v) star_offsets_[v + 1] = star_offsets_[v] + star_count[v + 1];
    star_.resize(star_offsets_.back());
    std::vector<int> fill(star_offsets_.begin(), star_offsets_.end() - 1);
    for (std::size_t t = 0; t < triangles_.size(); ++t)
        for (int v : triangles_[t]) star_[fill[v]++] = static_cast<int>(t);
}

Point2 LipMesh::gradient(std::span<const double> field, std::size_t t) const {
    const Tri& tri = triangles_[t];
    const GradientRows& r = rows_[t];
    Point2 g;
    for (int i = 0; i < 3; ++i) {
        g.x += r.dx[i] * field[tri[i]];
        g.y += r.dy[i] * field[tri[i]];
    }
    return g;
}

LipMesh build_lip_mesh(const FeMesh& mesh) {
    const std::vector<Point2>& centers = mesh.centroids();
    if (centers.size() < 3) throw MeshError("cannot build Lip-mesh: fewer than 3 centroids");
    std::vector<Tri> candidates;
    try {
        candidates = delaunay_triangulation(centers);
    } catch (const MeshError& e) {
        throw MeshError(std::string("cannot build Lip-mesh: ") + e.what());
    }

    double xmin = std::numeric_limits<double>::max(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const Point2& p : mesh.nodes()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }

    // Point-in-domain via a bucket grid of FE triangles.
    BoxGrid fe_grid(xmin, ymin, xmax, ymax, mesh.num_elements() / 2 + 1);
    const auto& nodes = mesh.nodes();
    const auto& tris = mesh.triangles();
    for (std::size_t e = 0; e < tris.size(); ++e) {
        const Point2 a = nodes[tris[e][0]], b = nodes[tris[e][1]], c = nodes[tris[e][2]];
        fe_grid.insert(static_cast<int>(e), std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y}),
                       std::max({a.x, b.x, c.x}), std::max({a.y, b.y, c.y}));
    }
    auto inside_domain = [&](Point2 p) {
        bool found = false;
        fe_grid.for_cells(p.x, p.y, p.x, p.y, [&](std::vector<int>& cell) {
            for (int e : cell) {
                if (found) return;
                const Point2 a = nodes[tris[e][0]], b = nodes[tris[e][1]], c = nodes[tris[e][2]];
                if (predicates::orient(a, b, p) >= 0 && predicates::orient(b, c, p) >= 0 &&
                    predicates::orient(c, a, p) >= 0)
                    found = true;
            }
        });
        return found;
    };

    const auto& bedges = mesh.boundary_edges();
    BoxGrid b_grid(xmin, ymin, xmax, ymax, bedges.size() + 1);
    for (std::size_t i = 0; i < bedges.size(); ++i) {
        const Point2 a = nodes[bedges[i].nodes[0]], b = nodes[bedges[i].nodes[1]];
        b_grid.insert(static_cast<int>(i), std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                      std::max(a.y, b.y));
    }
    std::vector<int> stamp(bedges.size(), -1);
    int query = 0;
    std::unordered_map<std::uint64_t, bool> crossing;
    auto edge_crosses = [&](int u, int v) {
        auto [it, fresh] = crossing.emplace(key(u, v), false);
        if (!fresh) return it->second;
        const Point2 p = centers[u], q = centers[v];
        bool hit = false;
        ++query;
        b_grid.for_cells(std::min(p.x, q.x), std::min(p.y, q.y), std::max(p.x, q.x), std::max(p.y, q.y),
                         [&](std::vector<int>& cell) {
                             for (int i : cell) {
                                 if (hit || stamp[i] == query) continue;
                                 stamp[i] = query;
                                 if (predicates::segments_intersect(p, q, nodes[bedges[i].nodes[0]],
                                                                    nodes[bedges[i].nodes[1]]))
                                     hit = true;
                             }
                         });
        it->second = hit;
        return hit;
    };

    std::vector<Tri> kept;
    kept.reserve(candidates.size());
    for (const Tri& t : candidates) {
        const Point2 c = centroid(centers[t[0]], centers[t[1]], centers[t[2]]);
        if (!inside_domain(c)) continue;
        if (edge_crosses(t[0], t[1]) || edge_crosses(t[1], t[2]) || edge_crosses(t[2], t[0])) continue;
        kept.push_back(t);
    }
    if (kept.empty()) throw MeshError("cannot build Lip-mesh: no triangle survives the domain filter");
    return LipMesh(centers, std::move(kept));
}

LipMesh structured_lip_mesh(double x0, double y0, double x1, double y1, int nx, int ny) {
    if (nx < 1 || ny < 1) throw MeshError("structured mesh needs at least one cell per direction");
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            pts.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
    std::vector<Tri> tris;
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if ((i + j) % 2 == 0) {
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            } else {
                tris.push_back({a, b, d});
                tris.push_back({b, c, d});
            }
        }
    }
    return LipMesh(std::move(pts), std::move(tris));
}

EdgeGraph::EdgeGraph(const LipMesh& lip) {
    const std::size_t n = lip.num_vertices();
    std::vector<int> count(n + 1, 0);
    for (const LipEdge& e : lip.edges()) {
        ++count[e.a + 1];
        ++count[e.b + 1];
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + count[v + 1];
    arcs_.resize(offsets_.back());
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (const LipEdge& e : lip.edges()) {
        arcs_[fill[e.a]++] = Arc{e.b, e.length};
        arcs_[fill[e.b]++] = Arc{e.a, e.length};
    }
}

std::vector<double> graph_distances(const EdgeGraph& graph, std::span<const int> sources) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.num_vertices(), inf);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (int s : sources) {
        dist[s] = 0.0;
        heap.push({0.0, s});
    }
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (const EdgeGraph::Arc& arc : graph.neighbors(v)) {
            const double cand = d + arc.length;
            if (cand < dist[arc.to]) {
                dist[arc.to] = cand;
                heap.push({cand, arc.to});
            }
        }
    }
    return dist;
}

}  // namespace lipfield
