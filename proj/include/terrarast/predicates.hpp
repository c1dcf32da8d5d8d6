#pragma once

// Orientation and in-circle predicates with a floating-point filter and exact rational
// fallback. Signs are always exact.

#include <array>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace terrarast::geom {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
inline constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

inline int sign_of(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline int orient_exact(const Point2& a, const Point2& b, const Point2& c) {
    const Rational acx = Rational(a.x) - Rational(c.x), acy = Rational(a.y) - Rational(c.y);
    const Rational bcx = Rational(b.x) - Rational(c.x), bcy = Rational(b.y) - Rational(c.y);
    return sign_of(acx * bcy - acy * bcx);
}

inline int incircle_exact(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const Rational adx = Rational(a.x) - Rational(d.x), ady = Rational(a.y) - Rational(d.y);
    const Rational bdx = Rational(b.x) - Rational(d.x), bdy = Rational(b.y) - Rational(d.y);
    const Rational cdx = Rational(c.x) - Rational(d.x), cdy = Rational(c.y) - Rational(d.y);
    const Rational alift = adx * adx + ady * ady;
    const Rational blift = bdx * bdx + bdy * bdy;
    const Rational clift = cdx * cdx + cdy * cdy;
    const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
    return sign_of(det);
}

}  // namespace detail

/// +1 if a, b, c are counterclockwise, -1 if clockwise, 0 if collinear.
inline int orient2d(const Point2& a, const Point2& b, const Point2& c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    const double bound = detail::kOrientBound * (std::abs(detleft) + std::abs(detright));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return detail::orient_exact(a, b, c);
}

/// +1 if d lies inside the circle through a, b, c (counterclockwise), -1 outside, 0 on it.
inline int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift + (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = detail::kInCircleBound * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return detail::incircle_exact(a, b, c, d);
}

/// In-circle test under symbolic perturbation of the lifted heights: vertex with global id k
/// is lowered by eps^(k+1), so lower ids dominate. Never returns 0 when a, b, c are not
/// collinear; exactly cocircular configurations resolve to the triangulation whose diagonal
/// touches the lowest-id vertex.
inline int incircle_perturbed(const Point2& a, const Point2& b, const Point2& c, const Point2& d, std::array<std::size_t, 4> ids) {
    const int s = incircle(a, b, c, d);
    if (s != 0) return s;
    // d(det)/d(eps_v) for each vertex of the lifted 3x3 determinant.
    const std::array<int, 4> coef{-orient2d(b, c, d), orient2d(a, c, d), -orient2d(a, b, d), orient2d(a, b, c)};
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    for (std::size_t i = 1; i < 4; ++i) {
        for (std::size_t j = i; j > 0 && ids[order[j]] < ids[order[j - 1]]; --j) std::swap(order[j], order[j - 1]);
    }
    for (const auto k : order) {
        if (coef[k] != 0) return coef[k];
    }
    return 0;
}

}  // namespace terrarast::geom
