#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lorentz.hpp"
#include "rng.hpp"

using namespace migtf;
using namespace migtf::lorentz;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

HPoint random_point(Rng& rng, Index dim, Curvature c, double scale = 2.0) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = rng.uniform(-scale, scale);
    return lift(v, c);
}

// Six-squared-distance form of the smoothed score with the rewritten
// denominator; test-side oracle, kept independent of score_sh.
double sh_six_distance_form(const HPoint& u, const HPoint& v, const HPoint& t, Curvature c) {
    HPoint o = origin(u.spatial.size(), c);
    double num = 0.5 * (sq_lorentz_dist(u, v, c) + sq_lorentz_dist(o, t, c) -
                        sq_lorentz_dist(u, t, c) - sq_lorentz_dist(t, v, c) -
                        sq_lorentz_dist(o, u, c) - sq_lorentz_dist(o, v, c));
    double den = c.beta * (u.x0 * v.x0 + u.x0 * t.x0 + t.x0 * v.x0);
    return num / den;
}

}  // namespace

TEST_CASE("lift places points on the hyperboloid") {
    Curvature c1(1.0);
    HPoint o = lift(Vector::Zero(4), c1);
    CHECK(o.x0 == doctest::Approx(1.0).epsilon(1e-12));

    HPoint p = lift(vec2(0.6, 0.8), c1);
    CHECK(p.x0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    Curvature c15(1.5);
    HPoint o15 = lift(Vector::Zero(3), c15);
    CHECK(o15.x0 == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));

    Vector bad = vec2(0.1, std::nan(""));
    CHECK_THROWS_AS(lift(bad, c1), Error);
}

TEST_CASE("lift invariant <x,x> = -beta over random points") {
    for (double beta : {0.5, 1.0, 1.5}) {
        Curvature c(beta);
        Rng rng(11);
        for (int i = 0; i < 1000; ++i) {
            HPoint x = random_point(rng, 1 + static_cast<Index>(rng.below(40)), c);
            CHECK(std::abs(lorentz_inner(x, x) + beta) <= 1e-9 * beta);
        }
    }
}

TEST_CASE("lorentz inner product") {
    Curvature c(1.0);
    HPoint o = origin(2, c);
    CHECK(lorentz_inner(o, o) == doctest::Approx(-1.0).epsilon(1e-12));

    HPoint p = lift(vec2(0.6, 0.8), c);
    CHECK(lorentz_inner(p, o) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));

    HPoint a = lift(vec2(1.0, 0.0), c);
    HPoint b = lift(vec2(0.0, 1.0), c);
    CHECK(lorentz_inner(a, b) == doctest::Approx(-2.0).epsilon(1e-12));

    HPoint wrong = origin(3, c);
    CHECK_THROWS_AS(lorentz_inner(a, wrong), Error);
}

TEST_CASE("squared Lorentz distance") {
    Curvature c(1.0);
    HPoint o = origin(2, c);
    CHECK(sq_lorentz_dist(o, o, c) == 0.0);

    HPoint p = lift(vec2(0.6, 0.8), c);
    CHECK(sq_lorentz_dist(p, o, c) ==
          doctest::Approx(-2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-10));

    Curvature c15(1.5);
    HPoint o15 = origin(2, c15);
    CHECK(std::abs(sq_lorentz_dist(o15, o15, c15)) <= 1e-12);

    // symmetry is bit-exact, d(x,x) vanishes to rounding
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        HPoint x = random_point(rng, 5, c);
        HPoint y = random_point(rng, 5, c);
        CHECK(sq_lorentz_dist(x, y, c) == sq_lorentz_dist(y, x, c));
        CHECK(std::abs(sq_lorentz_dist(x, x, c)) <= 1e-12);
    }
}

TEST_CASE("squared Lorentz distance violates the triangle inequality somewhere") {
    Curvature c(1.0);
    Rng rng(17);
    bool found = false;
    for (int i = 0; i < 2000 && !found; ++i) {
        HPoint x = random_point(rng, 2, c, 3.0);
        HPoint y = random_point(rng, 2, c, 3.0);
        HPoint z = random_point(rng, 2, c, 3.0);
        double xz = sq_lorentz_dist(x, z, c);
        double xy = sq_lorentz_dist(x, y, c);
        double yz = sq_lorentz_dist(y, z, c);
        if (xz > xy + yz + 1e-9) found = true;
    }
    CHECK(found);
}

TEST_CASE("geodesic distance") {
    Curvature c(1.0);
    HPoint o = origin(2, c);
    HPoint p = lift(vec2(0.6, 0.8), c);

    CHECK(geodesic_dist(o, o, c) == 0.0);
    CHECK(geodesic_dist(p, o, c) == doctest::Approx(std::acosh(std::sqrt(2.0))).epsilon(1e-10));
    CHECK(geodesic_dist(p, o, c) == geodesic_dist(o, p, c));

    Curvature c13(1.3);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        HPoint x = random_point(rng, 4, c13);
        CHECK(std::abs(geodesic_dist(x, x, c13)) <= 1e-7);  // acosh blows up sqrt-like near 1
        HPoint y = random_point(rng, 4, c13);
        CHECK(geodesic_dist(x, y, c13) >= 0.0);
        CHECK(geodesic_dist(x, y, c13) == geodesic_dist(y, x, c13));
    }
}

TEST_CASE("score_sg tetrahedron score") {
    Curvature c(1.0);
    HPoint o = origin(2, c);
    HPoint t = lift(vec2(0.6, 0.8), c);

    CHECK(score_sg(o, o, o, c) == 0.0);
    CHECK(score_sg(o, o, t, c) ==
          doctest::Approx(-std::acosh(std::sqrt(2.0))).epsilon(1e-10));

    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        HPoint u = random_point(rng, 3, c);
        HPoint v = random_point(rng, 3, c);
        HPoint w = random_point(rng, 3, c);
        CHECK(score_sg(u, v, w, c) == doctest::Approx(score_sg(v, u, w, c)).epsilon(1e-12));
    }
}

TEST_CASE("score_sg sign matches direct tetrahedron-inequality evaluation") {
    Curvature c(1.0);
    Rng rng(29);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        HPoint u = random_point(rng, 2, c, 3.0);
        HPoint v = random_point(rng, 2, c, 3.0);
        HPoint t = random_point(rng, 2, c, 3.0);
        HPoint o = origin(2, c);
        double lhs = geodesic_dist(u, v, c) + geodesic_dist(o, t, c);
        double rhs = geodesic_dist(u, t, c) + geodesic_dist(v, t, c) + geodesic_dist(o, u, c) +
                     geodesic_dist(o, v, c);
        double s = score_sg(u, v, t, c);
        if (std::abs(s) < 1e-9) continue;  // regrouping noise near zero
        CHECK((s > 0.0) == (lhs > rhs));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("score_sh closed form") {
    Curvature c(1.0);
    HPoint o = origin(2, c);
    HPoint t = lift(vec2(0.6, 0.8), c);

    CHECK(score_sh(o, o, o, c) == 0.0);

    double expected = (1.0 - std::sqrt(2.0)) / (1.0 + 2.0 * std::sqrt(2.0));
    CHECK(score_sh(o, o, t, c) == doctest::Approx(expected).epsilon(1e-7));
    CHECK(score_sh(o, o, t, c) == doctest::Approx(-0.1081951).epsilon(1e-6));

    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        HPoint u = random_point(rng, 4, c);
        HPoint v = random_point(rng, 4, c);
        HPoint w = random_point(rng, 4, c);
        CHECK(score_sh(u, v, w, c) == doctest::Approx(score_sh(v, u, w, c)).epsilon(1e-12));
    }
}

TEST_CASE("score_sh equals the six-squared-distance form at beta = 1") {
    Curvature c(1.0);
    Rng rng(37);
    for (int i = 0; i < 500; ++i) {
        HPoint u = random_point(rng, 3, c);
        HPoint v = random_point(rng, 3, c);
        HPoint t = random_point(rng, 3, c);
        CHECK(std::abs(score_sh(u, v, t, c) - sh_six_distance_form(u, v, t, c)) <= 1e-10);
    }
}

TEST_CASE("score_sh denominator stays positive at general beta") {
    for (double beta : {0.5, 1.3, 2.0}) {
        Curvature c(beta);
        Rng rng(41);
        for (int i = 0; i < 200; ++i) {
            HPoint u = random_point(rng, 3, c, 4.0);
            HPoint v = random_point(rng, 3, c, 4.0);
            HPoint t = random_point(rng, 3, c, 4.0);
            double den = beta * (u.x0 * v.x0 + u.x0 * t.x0 + t.x0 * v.x0);
            CHECK(den >= 3.0 * beta * beta * (1.0 - 1e-12));
            CHECK(std::isfinite(score_sh(u, v, t, c)));
        }
    }
}

TEST_CASE("score_sh_batch equals the scalar path") {
    Curvature c(1.3);
    Rng rng(43);
    Index n = 5, d = 4;
    Matrix rows(n, d);
    for (Index i = 0; i < rows.size(); ++i) rows.data()[i] = rng.uniform(-2.0, 2.0);
    Vector x0 = lift_x0(rows, c);
    HPoint u = random_point(rng, d, c);
    HPoint t = random_point(rng, d, c);

    Vector batch = score_sh_batch(u, rows, x0, t, c);
    REQUIRE(batch.size() == n);
    for (Index i = 0; i < n; ++i) {
        HPoint v = lift(rows.row(i), c);
        CHECK(std::abs(batch[i] - score_sh(u, v, t, c)) <= 1e-12);
    }

    Matrix empty(0, d);
    Vector empty_x0 = lift_x0(empty, c);
    CHECK(score_sh_batch(u, empty, empty_x0, t, c).size() == 0);

    Curvature c1(1.0);
    Matrix one = Matrix::Zero(1, d);
    HPoint o = origin(d, c1);
    Vector s = score_sh_batch(o, one, lift_x0(one, c1), o, c1);
    CHECK(s[0] == 0.0);
}

TEST_CASE("landscape grid") {
    Curvature c(1.0);

    SUBCASE("degenerate all-zero grid") {
        auto grid = landscape_grid(vec2(0.0, 0.0), 0.0, 0.0, 4, c, LandscapeMode::lorentz);
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < 4; ++j) CHECK(grid.values(i, j) == 0.0);
        auto geo = landscape_grid(vec2(0.0, 0.0), 0.0, 0.0, 4, c, LandscapeMode::geodesic);
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < 4; ++j) CHECK(geo.values(i, j) == 0.0);
    }

    SUBCASE("steps = 2 matches scalar calls") {
        Vector t = vec2(0.7, -0.4);
        auto grid = landscape_grid(t, -1.0, 1.0, 2, c, LandscapeMode::lorentz);
        HPoint tp = lift(t, c);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 2; ++j) {
                HPoint u = lift(vec2(grid.coords[i], 0.0), c);
                HPoint v = lift(vec2(0.0, grid.coords[j]), c);
                CHECK(grid.values(i, j) == score_sh(u, v, tp, c));
            }
    }

    SUBCASE("sign agreement with the geodesic landscape") {
        for (double tc : {-10.0, 0.0, 10.0}) {
            auto sh = landscape_grid(vec2(tc, tc), -2.5, 2.5, 31, c, LandscapeMode::lorentz);
            auto sg = landscape_grid(vec2(tc, tc), -2.5, 2.5, 31, c, LandscapeMode::geodesic);
            int agree = 0;
            for (Index i = 0; i < 31; ++i)
                for (Index j = 0; j < 31; ++j) {
                    auto sgn = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
                    if (sgn(sh.values(i, j)) == sgn(sg.values(i, j))) ++agree;
                }
            CHECK(static_cast<double>(agree) / (31.0 * 31.0) >= 0.9);
        }
    }

    SUBCASE("rejects non-2D relation points") {
        Vector t3(3);
        t3 << 1.0, 2.0, 3.0;
        CHECK_THROWS_AS(landscape_grid(t3, -1.0, 1.0, 5, c, LandscapeMode::lorentz), Error);
        CHECK_THROWS_AS(landscape_grid(vec2(0, 0), -1.0, 1.0, 1, c, LandscapeMode::lorentz),
                        Error);
    }

    SUBCASE("CSV layout") {
        auto grid = landscape_grid(vec2(1.0, 1.0), -1.0, 1.0, 3, c, LandscapeMode::lorentz);
        std::ostringstream out;
        write_landscape_csv(out, grid);
        std::string text = out.str();
        int lines = 0;
        for (char ch : text)
            if (ch == '\n') ++lines;
        CHECK(lines == 4);             // header row + 3 data rows
        CHECK(text.substr(0, 1) == ","); // empty corner cell
    }
}
