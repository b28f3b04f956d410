#include "lipfield/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace lipfield {

namespace {

void check_sizes(std::span<const double> d, const EdgeGraph& graph, double l) {
    if (d.size() != graph.num_vertices()) throw std::invalid_argument("field size does not match the Lip-mesh");
    if (!(l > 0.0)) throw std::invalid_argument("regularization length must be positive");
}

// sign = +1 sweeps the upper envelope (max-heap), -1 the lower one.
std::vector<double> sweep(std::span<const double> d_loc, const EdgeGraph& graph, double l, double sign) {
    std::vector<double> b(d_loc.begin(), d_loc.end());
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry> heap;  // keyed by sign * value
    for (std::size_t v = 0; v < b.size(); ++v) heap.push({sign * b[v], static_cast<int>(v)});
    std::vector<char> done(b.size(), 0);
    while (!heap.empty()) {
        const auto [key, v] = heap.top();
        heap.pop();
        if (done[v] || key != sign * b[v]) continue;  // stale entry
        done[v] = 1;
        for (const EdgeGraph::Arc& arc : graph.neighbors(v)) {
            if (done[arc.to]) continue;
            const double cand = b[v] - sign * arc.length / l;
            if (sign * cand > sign * b[arc.to]) {
                b[arc.to] = cand;
                heap.push({sign * cand, arc.to});
            }
        }
    }
    return b;
}

}  // namespace

BoundsPair dijkstra_bounds(std::span<const double> d_loc, const EdgeGraph& graph, double l) {
    check_sizes(d_loc, graph, l);
    return {sweep(d_loc, graph, l, -1.0), sweep(d_loc, graph, l, +1.0)};
}

BoundsPair bruteforce_bounds(std::span<const double> d_loc, const EdgeGraph& graph, double l) {
    check_sizes(d_loc, graph, l);
    const std::size_t n = d_loc.size();
    BoundsPair b{std::vector<double>(n, std::numeric_limits<double>::infinity()),
                 std::vector<double>(n, -std::numeric_limits<double>::infinity())};
    for (std::size_t y = 0; y < n; ++y) {
        const int src = static_cast<int>(y);
        const std::vector<double> dist = graph_distances(graph, std::span<const int>(&src, 1));
        for (std::size_t x = 0; x < n; ++x) {
            if (!std::isfinite(dist[x])) continue;
            b.lower[x] = std::min(b.lower[x], d_loc[y] + dist[x] / l);
            b.upper[x] = std::max(b.upper[x], d_loc[y] - dist[x] / l);
        }
    }
    return b;
}

double lipschitz_violation(std::span<const double> d, const LipMesh& lip, double l, LipschitzSet set) {
    if (d.size() != lip.num_vertices()) throw std::invalid_argument("field size does not match the Lip-mesh");
    double worst = -std::numeric_limits<double>::infinity();
    if (set == LipschitzSet::Lh) {
        for (std::size_t t = 0; t < lip.num_triangles(); ++t) worst = std::max(worst, norm(lip.gradient(d, t)));
    } else {
        for (const LipEdge& e : lip.edges()) worst = std::max(worst, std::abs(d[e.a] - d[e.b]) / e.length);
    }
    if (!std::isfinite(worst)) worst = 0.0;
    return worst - 1.0 / l;
}

double pairwise_violation(std::span<const double> d, const EdgeGraph& graph, double l) {
    check_sizes(d, graph, l);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < d.size(); ++y) {
        const int src = static_cast<int>(y);
        const std::vector<double> dist = graph_distances(graph, std::span<const int>(&src, 1));
        for (std::size_t x = 0; x < d.size(); ++x) {
            if (x == y || !std::isfinite(dist[x])) continue;
            worst = std::max(worst, std::abs(d[x] - d[y]) - dist[x] / l);
        }
    }
    return worst;
}

}  // namespace lipfield
