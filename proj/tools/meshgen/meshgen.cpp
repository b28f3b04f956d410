#include "meshgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lipfield::meshgen {

namespace {

class Builder {
public:
    int node(double x, double y) {
        data_.nodes.push_back({x, y});
        return static_cast<int>(data_.nodes.size()) - 1;
    }
    void tri(int a, int b, int c) {
        if (signed_area(data_.nodes[a], data_.nodes[b], data_.nodes[c]) < 0.0) std::swap(b, c);
        data_.triangles.push_back({a, b, c});
    }
    // Quad a-b-c-d split along a-c or b-d.
    void quad(int a, int b, int c, int d, bool diag_ac) {
        if (diag_ac) {
            tri(a, b, c);
            tri(a, c, d);
        } else {
            tri(a, b, d);
            tri(b, c, d);
        }
    }
    void line(int a, int b, int tag) { data_.lines.push_back({{a, b}, tag}); }
    void name(int tag, const std::string& n) { data_.physical_names[tag] = n; }
    MeshData take() { return std::move(data_); }

private:
    MeshData data_;
};

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

MeshData split_strip(double Lx, double H, int nx, int ny, int n_dup, double grading) {
    require(Lx > 0.0 && H > 0.0 && nx >= 1 && ny >= 1, "strip dimensions must be positive");
    require(grading >= 1.0, "grading must be at least 1");
    // Row heights grow geometrically away from y = 0.
    std::vector<double> ys(ny + 1, 0.0);
    for (int j = 1; j <= ny; ++j) ys[j] = ys[j - 1] + std::pow(grading, j - 1);
    for (double& y : ys) y *= H / ys[ny];
    Builder b;
    // upper[j][i] for j = 0..ny (y >= 0), lower[j][i] for j = 0..ny (y <= 0)
    std::vector<std::vector<int>> upper(ny + 1, std::vector<int>(nx + 1));
    std::vector<std::vector<int>> lower(ny + 1, std::vector<int>(nx + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) upper[j][i] = b.node(Lx * i / nx, ys[j]);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            if (j == 0 && i >= n_dup)
                lower[0][i] = upper[0][i];
            else
                lower[j][i] = b.node(Lx * i / nx, -ys[j]);
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            b.quad(upper[j][i], upper[j][i + 1], upper[j + 1][i + 1], upper[j + 1][i], (i + j) % 2 == 0);
            b.quad(lower[j][i], lower[j][i + 1], lower[j + 1][i + 1], lower[j + 1][i], (i + j) % 2 == 0);
        }
    }
    for (int i = 0; i < nx; ++i) {
        b.line(upper[ny][i], upper[ny][i + 1], top);
        b.line(lower[ny][i], lower[ny][i + 1], bottom);
        if (i < n_dup) {
            b.line(upper[0][i], upper[0][i + 1], crack_upper);
            b.line(lower[0][i], lower[0][i + 1], crack_lower);
        }
    }
    for (int j = 0; j < ny; ++j) {
        b.line(upper[j][0], upper[j + 1][0], left_upper);
        b.line(lower[j][0], lower[j + 1][0], left_lower);
        b.line(upper[j][nx], upper[j + 1][nx], right);
        b.line(lower[j][nx], lower[j + 1][nx], right);
    }
    b.name(bottom, "bottom");
    b.name(right, "right");
    b.name(top, "top");
    b.name(crack_upper, "crack_upper");
    b.name(crack_lower, "crack_lower");
    b.name(left_upper, "left_upper");
    b.name(left_lower, "left_lower");
    return b.take();
}

}  // namespace

MeshData structured_rectangle(double x0, double y0, double x1, double y1, int nx, int ny) {
    require(x1 > x0 && y1 > y0 && nx >= 1 && ny >= 1, "rectangle dimensions must be positive");
    Builder b;
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) b.node(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            b.quad(id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), (i + j) % 2 == 0);
    for (int i = 0; i < nx; ++i) {
        b.line(id(i, 0), id(i + 1, 0), bottom);
        b.line(id(i, ny), id(i + 1, ny), top);
    }
    for (int j = 0; j < ny; ++j) {
        b.line(id(nx, j), id(nx, j + 1), right);
        b.line(id(0, j), id(0, j + 1), left);
    }
    b.name(bottom, "bottom");
    b.name(right, "right");
    b.name(top, "top");
    b.name(left, "left");
    return b.take();
}

MeshData plate_with_hole(double L, double R, int n_side, int n_radial) {
    require(L > 0.0 && R > 0.0 && 2.0 * R < L && n_side >= 1 && n_radial >= 1, "invalid plate-with-hole dimensions");
    const double h = 0.5 * L;
    const int n_perim = 4 * n_side;
    std::vector<Point2> outer(n_perim);
    std::vector<int> side_tag(n_perim);
    const Point2 corners[4] = {{h, -h}, {h, h}, {-h, h}, {-h, -h}};
    const int tags[4] = {right, top, left, bottom};
    for (int s = 0; s < 4; ++s) {
        const Point2 a = corners[s], c = corners[(s + 1) % 4];
        for (int i = 0; i < n_side; ++i) {
            const double t = static_cast<double>(i) / n_side;
            outer[s * n_side + i] = a + t * (c - a);
            side_tag[s * n_side + i] = tags[s];
        }
    }
    // Grading ratio so that the first layer matches the spacing on the hole.
    const double first = 2.0 * std::numbers::pi * R / n_perim;
    const double span = h - R;
    double q = 1.0;
    if (first * n_radial < span) {
        double lo = 1.0 + 1e-12, hi = 2.0;
        while (first * (std::pow(hi, n_radial) - 1.0) / (hi - 1.0) < span) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (first * (std::pow(mid, n_radial) - 1.0) / (mid - 1.0) < span)
                lo = mid;
            else
                hi = mid;
        }
        q = 0.5 * (lo + hi);
    }
    std::vector<double> t(n_radial + 1);
    for (int j = 0; j <= n_radial; ++j)
        t[j] = q == 1.0 ? static_cast<double>(j) / n_radial : (std::pow(q, j) - 1.0) / (std::pow(q, n_radial) - 1.0);

    Builder b;
    std::vector<std::vector<int>> id(n_radial + 1, std::vector<int>(n_perim));
    for (int k = 0; k < n_perim; ++k) {
        const double theta = -0.25 * std::numbers::pi + 2.0 * std::numbers::pi * k / n_perim;
        const Point2 inner{R * std::cos(theta), R * std::sin(theta)};
        for (int j = 0; j <= n_radial; ++j) {
            const Point2 p = j == n_radial ? outer[k] : inner + t[j] * (outer[k] - inner);
            id[j][k] = b.node(p.x, p.y);
        }
    }
    for (int j = 0; j < n_radial; ++j) {
        for (int k = 0; k < n_perim; ++k) {
            const int k1 = (k + 1) % n_perim;
            b.quad(id[j][k], id[j][k1], id[j + 1][k1], id[j + 1][k], (j + k) % 2 == 0);
        }
    }
    for (int k = 0; k < n_perim; ++k) {
        const int k1 = (k + 1) % n_perim;
        b.line(id[n_radial][k], id[n_radial][k1], side_tag[k]);
        b.line(id[0][k], id[0][k1], hole);
    }
    b.name(bottom, "bottom");
    b.name(right, "right");
    b.name(top, "top");
    b.name(left, "left");
    b.name(hole, "hole");
    return b.take();
}

MeshData slit_strip(double Lx, double H, double a0, int nx, int ny_half, double grading) {
    const double dx = Lx / nx;
    const long n_dup = std::lround(a0 / dx);
    require(a0 >= 0.0 && std::abs(n_dup * dx - a0) <= 1e-9 * Lx && n_dup < nx,
            "slit length must be a multiple of the cell size, shorter than the strip");
    return split_strip(Lx, H, nx, ny_half, static_cast<int>(n_dup), grading);
}

MeshData two_half_strip(double Lx, double H, int nx, int ny_half) {
    return split_strip(Lx, H, nx, ny_half, nx + 1, 1.0);
}

MeshData perturbed_rectangle(double Lx, double Ly, int nx, int ny, double jitter, std::uint64_t seed) {
    require(jitter >= 0.0 && jitter < 0.25, "jitter must lie in [0, 0.25)");
    MeshData m = structured_rectangle(0.0, 0.0, Lx, Ly, nx, ny);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double hx = Lx / nx, hy = Ly / ny;
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            Point2& p = m.nodes[j * (nx + 1) + i];
            p.x += jitter * hx * u(rng);
            p.y += jitter * hy * u(rng);
        }
    }
    return m;
}

}  // namespace lipfield::meshgen
