#include "lorentz.hpp"

#include <cmath>

namespace migtf::lorentz {

HPoint lift(const Vector& v, Curvature c) {
    if (!v.allFinite()) fail(ErrorCode::numeric, "lift: non-finite input coordinates");
    return HPoint{std::sqrt(c.beta + v.squaredNorm()), v};
}

HPoint origin(Index spatial_dim, Curvature c) {
    return HPoint{std::sqrt(c.beta), Vector::Zero(spatial_dim)};
}

Vector lift_x0(const Matrix& rows, Curvature c) {
    return (rows.rowwise().squaredNorm().array() + c.beta).sqrt();
}

double lorentz_inner(const HPoint& x, const HPoint& y) {
    if (x.spatial.size() != y.spatial.size())
        fail(ErrorCode::shape, "lorentz_inner: spatial dimension mismatch");
    return -x.x0 * y.x0 + x.spatial.dot(y.spatial);
}

double sq_lorentz_dist(const HPoint& x, const HPoint& y, Curvature c) {
    return -2.0 * c.beta - 2.0 * lorentz_inner(x, y);
}

double geodesic_dist(const HPoint& x, const HPoint& y, Curvature c) {
    double arg = -lorentz_inner(x, y) / c.beta;
    if (arg < 1.0) arg = 1.0;  // rounding can dip below the arccosh domain
    return std::acosh(arg);
}

double score_sg(const HPoint& u, const HPoint& v, const HPoint& t, Curvature c) {
    HPoint o = origin(u.spatial.size(), c);
    return geodesic_dist(u, v, c) + geodesic_dist(o, t, c) - geodesic_dist(u, t, c) -
           geodesic_dist(v, t, c) - geodesic_dist(o, u, c) - geodesic_dist(o, v, c);
}

double score_sh(const HPoint& u, const HPoint& v, const HPoint& t, Curvature c) {
    double beta = c.beta;
    double rb = std::sqrt(beta);
    double uv = lorentz_inner(u, v);
    double ut = lorentz_inner(u, t);
    double tv = lorentz_inner(t, v);
    double num = 2.0 * beta + rb * (t.x0 - u.x0 - v.x0) - (uv - ut - tv);
    double den = beta * (u.x0 * v.x0 + u.x0 * t.x0 + t.x0 * v.x0);
    return num / den;
}

Vector score_sh_batch(const HPoint& u, const Matrix& v_rows, const Vector& v_x0,
                      const HPoint& t, Curvature c) {
    if (v_rows.cols() != u.spatial.size() || t.spatial.size() != u.spatial.size())
        fail(ErrorCode::shape, "score_sh_batch: spatial dimension mismatch");
    if (v_rows.rows() != v_x0.size())
        fail(ErrorCode::shape, "score_sh_batch: time-coordinate count mismatch");

    double beta = c.beta;
    double rb = std::sqrt(beta);
    double ut = -u.x0 * t.x0 + u.spatial.dot(t.spatial);

    Vector au = v_rows * u.spatial;  // spatial dots with u per row
    Vector at = v_rows * t.spatial;  // spatial dots with t per row

    Index n = v_rows.rows();
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
        double v0 = v_x0[i];
        double uv = -u.x0 * v0 + au[i];
        double tv = -t.x0 * v0 + at[i];
        double num = 2.0 * beta + rb * (t.x0 - u.x0 - v0) - (uv - ut - tv);
        double den = beta * (u.x0 * v0 + u.x0 * t.x0 + t.x0 * v0);
        out[i] = num / den;
    }
    return out;
}

LandscapeGrid landscape_grid(const Vector& t, double grid_min, double grid_max,
                             Index steps, Curvature c, LandscapeMode mode) {
    if (t.size() != 2)
        fail(ErrorCode::invalid_argument, "landscape_grid: relation point must be two-dimensional");
    if (steps < 2) fail(ErrorCode::invalid_argument, "landscape_grid: steps must be >= 2");

    HPoint tp = lift(t, c);
    Vector coords(steps);
    for (Index i = 0; i < steps; ++i)
        coords[i] = grid_min + (grid_max - grid_min) * static_cast<double>(i) /
                                   static_cast<double>(steps - 1);

    Matrix values(steps, steps);
    Vector eu(2), ev(2);
    for (Index i = 0; i < steps; ++i) {
        eu << coords[i], 0.0;
        HPoint up = lift(eu, c);
        for (Index j = 0; j < steps; ++j) {
            ev << 0.0, coords[j];
            HPoint vp = lift(ev, c);
            values(i, j) = mode == LandscapeMode::lorentz ? score_sh(up, vp, tp, c)
                                                          : score_sg(up, vp, tp, c);
        }
    }
    return LandscapeGrid{coords, values};
}

void write_landscape_csv(std::ostream& out, const LandscapeGrid& grid) {
    Index n = grid.coords.size();
    out << "";
    for (Index j = 0; j < n; ++j) out << ',' << grid.coords[j];
    out << '\n';
    for (Index i = 0; i < n; ++i) {
        out << grid.coords[i];
        for (Index j = 0; j < n; ++j) out << ',' << grid.values(i, j);
        out << '\n';
    }
}

}  // namespace migtf::lorentz
