#include "lipfield/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lipfield/mesh.hpp"

namespace lipfield {

namespace {

struct Face {
    std::array<int, 3> v{};
    std::array<int, 3> nb{-1, -1, -1};  // nb[i] lies across the edge opposite v[i]
};

constexpr int next(int i) { return (i + 1) % 3; }
constexpr int prev(int i) { return (i + 2) % 3; }

class Triangulator {
public:
    explicit Triangulator(std::span<const Point2> input) : pts_(input.begin(), input.end()), n_(input.size()) {}

    std::vector<Tri> run() {
        if (n_ < 3) throw MeshError("fewer than 3 points to triangulate");
        add_super_triangle();
        for (int idx : insertion_order()) insert(idx);

        std::vector<Tri> out;
        out.reserve(faces_.size());
        for (const Face& f : faces_) {
            if (f.v[0] >= static_cast<int>(n_) || f.v[1] >= static_cast<int>(n_) ||
                f.v[2] >= static_cast<int>(n_))
                continue;
            out.push_back({f.v[0], f.v[1], f.v[2]});
        }
        if (out.empty()) throw MeshError("degenerate point set: all points are collinear");
        return out;
    }

private:
    std::vector<Point2> pts_;
    std::size_t n_;
    std::vector<Face> faces_;
    std::vector<std::pair<int, int>> stack_;
    int last_ = 0;
    unsigned rng_ = 12345u;

    void add_super_triangle() {
        double xmin = pts_[0].x, xmax = xmin, ymin = pts_[0].y, ymax = ymin;
        for (const Point2& p : pts_) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        const double extent = std::max({xmax - xmin, ymax - ymin, 1e-300});
        const Point2 c{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
        const double m = 1e5 * extent;
        pts_.push_back({c.x - m, c.y - m});
        pts_.push_back({c.x + m, c.y - m});
        pts_.push_back({c.x, c.y + m});
        const int s = static_cast<int>(n_);
        faces_.push_back(Face{{s, s + 1, s + 2}, {-1, -1, -1}});
    }

    // Snake order over a coarse grid keeps the walk short.
    std::vector<int> insertion_order() const {
        double xmin = pts_[0].x, xmax = xmin, ymin = pts_[0].y, ymax = ymin;
        for (std::size_t i = 0; i < n_; ++i) {
            xmin = std::min(xmin, pts_[i].x);
            xmax = std::max(xmax, pts_[i].x);
            ymin = std::min(ymin, pts_[i].y);
            ymax = std::max(ymax, pts_[i].y);
        }
        const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_) / 4.0)));
        const double wx = std::max(xmax - xmin, 1e-300), wy = std::max(ymax - ymin, 1e-300);
        std::vector<std::pair<long, int>> keys(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            int row = std::min(cells - 1, static_cast<int>((pts_[i].y - ymin) / wy * cells));
            double fx = (pts_[i].x - xmin) / wx;
            if (row % 2 == 1) fx = 1.0 - fx;
            const long col = std::min(1L << 20, static_cast<long>(fx * (1L << 20)));
            keys[i] = {static_cast<long>(row) * ((1L << 20) + 1) + col, static_cast<int>(i)};
        }
        std::sort(keys.begin(), keys.end());
        std::vector<int> order(n_);
        for (std::size_t i = 0; i < n_; ++i) order[i] = keys[i].second;
        return order;
    }

    int orient_edge(const Face& f, int i, Point2 p) const {
        return predicates::orient(pts_[f.v[next(i)]], pts_[f.v[prev(i)]], p);
    }

    int locate(Point2 p) {
        int t = last_;
        const std::size_t limit = 8 * faces_.size() + 64;
        for (std::size_t step = 0; step < limit; ++step) {
            const Face& f = faces_[t];
            rng_ = rng_ * 1103515245u + 12345u;
            const int start = static_cast<int>((rng_ >> 16) % 3);
            int moved = -1;
            for (int k = 0; k < 3; ++k) {
                const int i = (start + k) % 3;
                if (orient_edge(f, i, p) < 0) {
                    moved = f.nb[i];
                    break;
                }
            }
            if (moved < 0) return t;
            t = moved;
        }
        // The visibility walk terminates on Delaunay triangulations; the scan
        // below only guards against pathological rounding in the caller.
        for (std::size_t t2 = 0; t2 < faces_.size(); ++t2) {
            const Face& f = faces_[t2];
            if (orient_edge(f, 0, p) >= 0 && orient_edge(f, 1, p) >= 0 && orient_edge(f, 2, p) >= 0)
                return static_cast<int>(t2);
        }
        throw MeshError("point location failed during triangulation");
    }

    void set_neighbor(int face, int old_nb, int new_nb) {
        if (face < 0) return;
        for (int& x : faces_[face].nb) {
            if (x == old_nb) {
                x = new_nb;
                return;
            }
        }
    }

    void insert(int pi) {
        const Point2 p = pts_[pi];
        const int t = locate(p);
        Face f = faces_[t];
        int zero_edge = -1;
        int zeros = 0;
        for (int i = 0; i < 3; ++i) {
            if (pts_[f.v[i]] == p)
                throw MeshError("duplicate point " + std::to_string(pi) + " in triangulation input");
            if (orient_edge(f, i, p) == 0) {
                zero_edge = i;
                ++zeros;
            }
        }
        if (zeros == 0)
            split_face(t, pi);
        else
            split_edge(t, zero_edge, pi);
        legalize();
    }

    void split_face(int t, int p) {
        const Face f = faces_[t];
        const int a = f.v[0], b = f.v[1], c = f.v[2];
        const int na = f.nb[0], nb = f.nb[1], nc = f.nb[2];
        const int f0 = t;
        const int f1 = static_cast<int>(faces_.size());
        const int f2 = f1 + 1;
        faces_[f0] = Face{{a, b, p}, {f1, f2, nc}};
        faces_.push_back(Face{{b, c, p}, {f2, f0, na}});
        faces_.push_back(Face{{c, a, p}, {f0, f1, nb}});
        set_neighbor(na, t, f1);
        set_neighbor(nb, t, f2);
        stack_.push_back({f0, 2});
        stack_.push_back({f1, 2});
        stack_.push_back({f2, 2});
        last_ = f0;
    }

    void split_edge(int t, int i, int p) {
        const Face ft = faces_[t];
        const int u = ft.nb[i];
        if (u < 0) throw MeshError("point on the outer boundary of the enclosing triangle");
        const Face fu = faces_[u];
        int j = 0;
        while (fu.nb[j] != t) ++j;
        const int a = ft.v[i], b = ft.v[next(i)], c = ft.v[prev(i)];
        const int d = fu.v[j];
        const int tC = ft.nb[prev(i)], tB = ft.nb[next(i)];
        // in u: vertices (d, c, b) starting at j
        const int uB = fu.nb[prev(j)];  // across (d, c), opposite b
        const int uC = fu.nb[next(j)];  // across (b, d), opposite c
        const int f0 = t, f2 = u;
        const int f1 = static_cast<int>(faces_.size());
        const int f3 = f1 + 1;
        faces_[f0] = Face{{a, b, p}, {f3, f1, tC}};
        faces_.push_back(Face{{a, p, c}, {f2, tB, f0}});
        faces_[f2] = Face{{d, c, p}, {f1, f3, uB}};
        faces_.push_back(Face{{d, p, b}, {f0, uC, f2}});
        set_neighbor(tB, t, f1);
        set_neighbor(uC, u, f3);
        stack_.push_back({f0, 2});
        stack_.push_back({f1, 1});
        stack_.push_back({f2, 2});
        stack_.push_back({f3, 1});
        last_ = f0;
    }

    // Each stack entry is (face, index of the newly inserted vertex in it).
    void legalize() {
        while (!stack_.empty()) {
            const auto [t, i] = stack_.back();
            stack_.pop_back();
            const Face ft = faces_[t];
            const int u = ft.nb[i];
            if (u < 0) continue;
            const Face fu = faces_[u];
            int j = 0;
            while (j < 3 && fu.nb[j] != t) ++j;
            if (j == 3) continue;
            const int p = ft.v[i], a = ft.v[next(i)], b = ft.v[prev(i)];
            const int q = fu.v[j];
            if (predicates::incircle(pts_[p], pts_[a], pts_[b], pts_[q]) <= 0) continue;
            // Flip requires a strictly convex quadrilateral p-a-q-b.
            if (predicates::orient(pts_[p], pts_[a], pts_[q]) <= 0 ||
                predicates::orient(pts_[p], pts_[q], pts_[b]) <= 0)
                continue;
            const int tA = ft.nb[next(i)];  // across (b, p)
            const int tB = ft.nb[prev(i)];  // across (p, a)
            const int uB = fu.nb[next(j)];  // across (a, q), opposite b
            const int uA = fu.nb[prev(j)];  // across (q, b), opposite a
            faces_[t] = Face{{p, a, q}, {uB, u, tB}};
            faces_[u] = Face{{p, q, b}, {uA, tA, t}};
            set_neighbor(uB, u, t);
            set_neighbor(tA, t, u);
            stack_.push_back({t, 0});
            stack_.push_back({u, 0});
        }
    }
};

}  // namespace

std::vector<Tri> delaunay_triangulation(std::span<const Point2> points) {
    return Triangulator(points).run();
}

}  // namespace lipfield
