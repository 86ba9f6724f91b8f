#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace stclus {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(const Point2& a, const Point2& b) { return !(a == b); }

inline double point_distance(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Dense trajectory identifier, assigned in ascending name order by the
/// ingestion layer. Algorithms order everything by this id.
using TrajId = std::int32_t;

/// Motion of one object over one time interval, assumed constant velocity.
/// Interval indices are 1-based; time is normalized to [0,1] within the
/// interval, so a stationary object has start == end.
struct Segment {
    TrajId traj = -1;
    int interval = 1;
    Point2 start;
    Point2 end;
};

/// Coefficients of the squared relative distance q(t) = a*t^2 + b*t + c
/// between two co-temporal segments, t in [0,1].
struct QuadraticCoeffs {
    double a = 0.0;  // squared relative speed
    double b = 0.0;  // 2 * (relative position . relative velocity)
    double c = 0.0;  // squared initial relative distance
};

inline QuadraticCoeffs relative_coeffs(const Segment& s1, const Segment& s2) {
    if (s1.interval != s2.interval) {
        throw std::invalid_argument("relative_coeffs: segments from different intervals");
    }
    const double d0x = s1.start.x - s2.start.x;
    const double d0y = s1.start.y - s2.start.y;
    const double d1x = s1.end.x - s2.end.x;
    const double d1y = s1.end.y - s2.end.y;
    const double vx = d1x - d0x;
    const double vy = d1y - d0y;
    QuadraticCoeffs q;
    q.a = vx * vx + vy * vy;
    q.b = 2.0 * (d0x * vx + d0y * vy);
    q.c = d0x * d0x + d0y * d0y;
    return q;
}

/// Composite Simpson quadrature of the relative distance over [0,1].
/// n_points must be odd and >= 3. Converges to segment_distance.
inline double segment_distance_oracle(const Segment& s1, const Segment& s2, int n_points) {
    if (s1.interval != s2.interval) {
        throw std::invalid_argument("segment_distance_oracle: segments from different intervals");
    }
    if (n_points < 3 || n_points % 2 == 0) {
        throw std::invalid_argument("segment_distance_oracle: n_points must be odd and >= 3");
    }
    const double d0x = s1.start.x - s2.start.x;
    const double d0y = s1.start.y - s2.start.y;
    const double vx = (s1.end.x - s2.end.x) - d0x;
    const double vy = (s1.end.y - s2.end.y) - d0y;
    const double h = 1.0 / static_cast<double>(n_points - 1);
    auto norm_at = [&](int k) {
        const double t = static_cast<double>(k) * h;
        const double rx = d0x + t * vx;
        const double ry = d0y + t * vy;
        return std::sqrt(rx * rx + ry * ry);
    };
    double sum = norm_at(0) + norm_at(n_points - 1);
    for (int k = 1; k < n_points - 1; ++k) {
        sum += (k % 2 == 1 ? 4.0 : 2.0) * norm_at(k);
    }
    return sum * h / 3.0;
}

namespace detail {

inline double simpson_fallback(const QuadraticCoeffs& q, int n_points) {
    const double h = 1.0 / static_cast<double>(n_points - 1);
    auto f = [&](int k) {
        const double t = static_cast<double>(k) * h;
        return std::sqrt(std::max(0.0, (q.a * t + q.b) * t + q.c));
    };
    double sum = f(0) + f(n_points - 1);
    for (int k = 1; k < n_points - 1; ++k) {
        sum += (k % 2 == 1 ? 4.0 : 2.0) * f(k);
    }
    return sum * h / 3.0;
}

// Integral of sqrt(q(t)) over [0,1] when the relative speed is negligible:
// series in u = (a*t^2 + b*t)/c around sqrt(c). Requires c well above a.
inline double near_constant_integral(const QuadraticCoeffs& q) {
    const double a = q.a, b = q.b, c = q.c;
    const double rc = std::sqrt(c);
    const double t1 = (a / 3.0 + b / 2.0) / c;
    const double t2 = (a * a / 5.0 + a * b / 2.0 + b * b / 3.0) / (c * c);
    const double t3 = (a * a * a / 7.0 + a * a * b / 2.0 + 3.0 * a * b * b / 5.0 + b * b * b / 4.0) /
                      (c * c * c);
    return rc * (1.0 + t1 / 2.0 - t2 / 8.0 + t3 / 16.0);
}

// Integral of sqrt(a) * |t - t0| over [0,1] (double-root case).
inline double double_root_integral(double a, double t0) {
    const double s = std::sqrt(a);
    if (t0 <= 0.0) return s * (0.5 - t0);
    if (t0 >= 1.0) return s * (t0 - 0.5);
    return s * (t0 * t0 + (1.0 - t0) * (1.0 - t0)) * 0.5;
}

}  // namespace detail

/// Continuous average Euclidean distance between two co-temporal segments:
/// the integral of the pointwise distance over the normalized interval.
/// Exact closed form with guarded degenerate branches; symmetric in its
/// arguments and never negative.
inline double segment_distance(const Segment& s1, const Segment& s2) {
    const QuadraticCoeffs q = relative_coeffs(s1, s2);
    const double a = q.a, b = q.b, c = q.c;

    if (a == 0.0) return std::sqrt(c);

    const double a_tol = 1e-12 * std::max(1.0, c);
    if (a <= a_tol) {
        // Relative speed negligible against the offset. When both are tiny
        // the series loses its small parameter; quadrature is cheap there.
        if (c <= 1e-8) return detail::simpson_fallback(q, 10001);
        return detail::near_constant_integral(q);
    }

    const double disc = b * b - 4.0 * a * c;
    const double disc_tol = 1e-12 * (b * b + 4.0 * a * c);
    if (std::abs(disc) <= disc_tol) {
        return detail::double_root_integral(a, -b / (2.0 * a));
    }

    const double q0 = std::sqrt(std::max(0.0, c));
    const double q1 = std::sqrt(std::max(0.0, a + b + c));
    const double ra = std::sqrt(a);
    const double arg0 = 2.0 * ra * q0 + b;
    const double arg1 = 2.0 * ra * q1 + 2.0 * a + b;
    if (arg0 <= 0.0 || arg1 <= 0.0) {
        // q(t) >= 0 makes both arguments positive in exact arithmetic;
        // rounding can only break that next to a double root.
        return detail::simpson_fallback(q, 10001);
    }
    const double sqrt_term = ((2.0 * a + b) * q1 - b * q0) / (4.0 * a);
    const double log_term = disc * (std::log(arg1) - std::log(arg0)) / (8.0 * a * ra);
    return std::max(0.0, sqrt_term - log_term);
}

enum class FastPath { Neighbor, Unknown };

/// Endpoint pre-check: if both endpoint pairs are within eps, convexity of
/// the norm bounds the average distance by eps and the integral is skipped.
inline FastPath endpoint_fast_path(const Segment& s1, const Segment& s2, double eps) {
    if (s1.interval != s2.interval) {
        throw std::invalid_argument("endpoint_fast_path: segments from different intervals");
    }
    if (point_distance(s1.start, s2.start) <= eps && point_distance(s1.end, s2.end) <= eps) {
        return FastPath::Neighbor;
    }
    return FastPath::Unknown;
}

}  // namespace stclus
