#pragma once

#include <array>
#include <cmath>
#include <span>

namespace lipfield {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

using Tri = std::array<int, 3>;

/// Signed area of (a, b, c); positive when counterclockwise.
inline double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

inline Point2 centroid(Point2 a, Point2 b, Point2 c) {
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

namespace predicates {

/// Sign of the orientation determinant of (a, b, c): +1 ccw, -1 cw, 0 collinear.
/// Exact: floating-point filter with a rational fallback.
int orient(Point2 a, Point2 b, Point2 c);

/// Sign of the incircle determinant: +1 when d is strictly inside the circumcircle
/// of the ccw triangle (a, b, c), 0 when cocircular. Exact.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

/// True when the closed segments [p0,p1] and [q0,q1] share at least one point.
bool segments_intersect(Point2 p0, Point2 p1, Point2 q0, Point2 q1);

}  // namespace predicates

}  // namespace lipfield
