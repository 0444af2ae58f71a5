#pragma once
// Lorentz-model hyperbolic primitives: hyperboloid lift, Lorentz inner
// product, squared and geodesic distances, the tetrahedron scores S_G and
// S_H, the batched S_H over an entity table, and score-landscape grids.
//
// Conventions (fixed project-wide):
//   <x,y>_L = -x0*y0 + dot(spatial)          on-hyperboloid: <x,x>_L = -beta
//   lift(v) = (sqrt(beta + |v|^2), v)
//   origin  = (sqrt(beta), 0,...,0)           so <0,x>_L = -sqrt(beta)*x0
//   d_geo(x,y) = arccosh(-<x,y>_L / beta)     argument clamped at 1
//   d_sq(x,y)  = <x-y, x-y>_L = -2*beta - 2*<x,y>_L

#include <ostream>

#include "dense.hpp"

namespace migtf::lorentz {

struct Curvature {
    double beta;

    explicit Curvature(double b) : beta(b) {
        if (!(b > 0.0)) fail(ErrorCode::invalid_argument, "curvature beta must be positive");
    }
};

// Point on the beta-hyperboloid: time coordinate x0 plus spatial part.
struct HPoint {
    double x0;
    Vector spatial;
};

HPoint lift(const Vector& v, Curvature c);
HPoint origin(Index spatial_dim, Curvature c);

// Time coordinates for a table of Euclidean rows lifted onto the hyperboloid.
Vector lift_x0(const Matrix& rows, Curvature c);

double lorentz_inner(const HPoint& x, const HPoint& y);
double sq_lorentz_dist(const HPoint& x, const HPoint& y, Curvature c);
double geodesic_dist(const HPoint& x, const HPoint& y, Curvature c);

// Tetrahedron-inequality score with geodesic distances. Positive iff the
// inequality is violated.
double score_sg(const HPoint& u, const HPoint& v, const HPoint& t, Curvature c);

// Smoothed score: closed form
//   (2*beta + sqrt(beta)*(t0 - u0 - v0) - (<u,v> - <u,t> - <t,v>))
//   / (beta*(u0*v0 + u0*t0 + t0*v0))
// Equals the six-squared-distance form; denominator >= 3*beta^2 on-hyperboloid.
double score_sh(const HPoint& u, const HPoint& v, const HPoint& t, Curvature c);

// score_sh of (u, row_i, t) for every row of v_rows (Euclidean coordinates,
// lifted via the precomputed time coordinates v_x0). Inner-product
// formulation; no per-pair distance scalars.
Vector score_sh_batch(const HPoint& u, const Matrix& v_rows, const Vector& v_x0,
                      const HPoint& t, Curvature c);

enum class LandscapeMode { lorentz, geodesic };

// Score landscape over a square grid. Embeddings are two-dimensional with one
// scalar axis per argument: cell (i,j) scores u=(g_i,0), v=(0,g_j) against the
// fixed 2-D relation point t. g is the linspace [grid_min, grid_max] of
// `steps` points.
struct LandscapeGrid {
    Vector coords;  // the shared axis grid
    Matrix values;  // steps x steps scores
};

LandscapeGrid landscape_grid(const Vector& t, double grid_min, double grid_max,
                             Index steps, Curvature c, LandscapeMode mode);

// CSV layout: first row/column carry the grid coordinates, corner cell empty.
void write_landscape_csv(std::ostream& out, const LandscapeGrid& grid);

}  // namespace migtf::lorentz
