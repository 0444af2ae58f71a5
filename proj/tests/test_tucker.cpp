#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "tucker.hpp"

using namespace migtf;
using namespace migtf::tucker;
using testutil::same_bits;

namespace {

// Naive triple-loop contraction, the spec's oracle for mode_n_product.
Tensor3 mode_n_naive(const Tensor3& g, const Matrix& m, int mode) {
    Index d0 = g.dim(0), d1 = g.dim(1), d2 = g.dim(2);
    Index k = m.cols();
    Index axis = mode - 1;
    Tensor3 out(axis == 0 ? k : d0, axis == 1 ? k : d1, axis == 2 ? k : d2);
    for (Index i = 0; i < out.dim(0); ++i)
        for (Index j = 0; j < out.dim(1); ++j)
            for (Index l = 0; l < out.dim(2); ++l) {
                double sum = 0.0;
                for (Index a = 0; a < g.dim(static_cast<int>(axis)); ++a) {
                    double gv = axis == 0 ? g(a, j, l) : axis == 1 ? g(i, a, l) : g(i, j, a);
                    double mv = m(a, axis == 0 ? i : axis == 1 ? j : l);
                    sum += gv * mv;
                }
                out(i, j, l) = sum;
            }
    return out;
}

Tensor3 random_tensor(Index d0, Index d1, Index d2, Rng& rng) {
    Tensor3 g(d0, d1, d2);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1.0, 1.0);
    return g;
}

Matrix random_matrix(Index r, Index c, Rng& rng) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("mode_n_product basics") {
    Tensor3 g(1, 1, 1);
    g(0, 0, 0) = 2.0;
    Matrix m(1, 1);
    m << 3.0;
    CHECK(mode_n_product(g, m, 1)(0, 0, 0) == 6.0);

    Rng rng(3);
    Tensor3 g2 = random_tensor(2, 3, 2, rng);
    for (int mode = 1; mode <= 3; ++mode) {
        Index extent = g2.dim(mode - 1);
        Matrix id = Matrix::Identity(extent, extent);
        Tensor3 out = mode_n_product(g2, id, mode);
        REQUIRE(out.same_shape(g2));
        for (Index i = 0; i < g2.size(); ++i)
            CHECK(out.data()[i] == doctest::Approx(g2.data()[i]).epsilon(1e-14));
    }

    Matrix bad(5, 2);
    CHECK_THROWS_AS(mode_n_product(g2, bad, 1), Error);
    CHECK_THROWS_AS(mode_n_product(g2, bad, 4), Error);
}

TEST_CASE("mode_n_product matches the naive-loop oracle") {
    Rng rng(5);
    Tensor3 g = random_tensor(2, 3, 2, rng);
    Matrix m = random_matrix(3, 4, rng);
    Tensor3 fast = mode_n_product(g, m, 2);
    Tensor3 naive = mode_n_naive(g, m, 2);
    REQUIRE(fast.same_shape(naive));
    for (Index i = 0; i < fast.size(); ++i)
        CHECK(std::abs(fast.data()[i] - naive.data()[i]) <= 1e-12);

    SUBCASE("random shapes up to 64 entries, all modes") {
        for (int trial = 0; trial < 30; ++trial) {
            Index d0 = 1 + static_cast<Index>(rng.below(4));
            Index d1 = 1 + static_cast<Index>(rng.below(4));
            Index d2 = 1 + static_cast<Index>(rng.below(4));
            Tensor3 gg = random_tensor(d0, d1, d2, rng);
            int mode = 1 + static_cast<int>(rng.below(3));
            Index k = 1 + static_cast<Index>(rng.below(4));
            Matrix mm = random_matrix(gg.dim(mode - 1), k, rng);
            Tensor3 a = mode_n_product(gg, mm, mode);
            Tensor3 b = mode_n_naive(gg, mm, mode);
            REQUIRE(a.same_shape(b));
            for (Index i = 0; i < a.size(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) <= 1e-12);
        }
    }
}

TEST_CASE("score_se_batch scalar example") {
    TuckerParams p;
    p.core = Tensor3(1, 1, 1);
    p.core(0, 0, 0) = 2.0;
    p.entities = Matrix(2, 1);
    p.entities << 3.0, 1.0;
    p.relations = Matrix(1, 1);
    p.relations << 0.5;

    DropoutSpec none;
    Vector s = score_se_batch(p, 0, 0, none, nullptr, false);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(3.0).epsilon(1e-14));

    p.core(0, 0, 0) = 0.0;
    Vector z = score_se_batch(p, 0, 0, none, nullptr, false);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    CHECK_THROWS_AS(score_se_batch(p, 5, 0, none, nullptr, false), Error);
    CHECK_THROWS_AS(score_se_batch(p, 0, 3, none, nullptr, false), Error);
}

TEST_CASE("score_se_batch matches the per-entity triple-loop oracle") {
    Rng rng(7);
    TuckerParams p = init_tucker(6, 3, 4, 2, 11);
    DropoutSpec none;
    for (Index head = 0; head < 6; ++head) {
        Vector s = score_se_batch(p, head, 1, none, nullptr, false);
        for (Index i = 0; i < 6; ++i) {
            double expect = 0.0;
            for (Index a = 0; a < 4; ++a)
                for (Index b = 0; b < 4; ++b)
                    for (Index g = 0; g < 2; ++g)
                        expect += p.core(a, b, g) * p.entities(head, a) * p.entities(i, b) *
                                  p.relations(1, g);
            CHECK(std::abs(s[i] - expect) <= 1e-10);
        }
    }
}

TEST_CASE("init_tucker is deterministic and shape-correct") {
    TuckerParams a = init_tucker(7, 3, 4, 2, 99);
    TuckerParams b = init_tucker(7, 3, 4, 2, 99);
    CHECK(same_bits(a.entities, b.entities));
    CHECK(same_bits(a.relations, b.relations));
    CHECK(a.core.storage() == b.core.storage());

    TuckerParams c = init_tucker(7, 3, 4, 2, 100);
    CHECK(!same_bits(a.entities, c.entities));

    TuckerParams tiny = init_tucker(1, 1, 1, 1, 1);
    CHECK(tiny.entities.size() == 1);
    CHECK(tiny.core.size() == 1);

    CHECK_THROWS_AS(init_tucker(0, 1, 1, 1, 1), Error);
}

TEST_CASE("parameter count at WN18RR scale stays near the reported order") {
    // 40,943 entities, 11 relations augmented to 22, d_e = 200, d_r = 30
    Index n_e = 40943, n_r = 22, d_e = 200, d_r = 30;
    Index count = n_e * d_e + n_r * d_r + d_e * d_e * d_r;
    CHECK(count == 9389260);
    CHECK(count > 8'000'000);
    CHECK(count < 10'500'000);
}

TEST_CASE("evaluation mode is deterministic; dropout only acts in training") {
    TuckerParams p = init_tucker(5, 2, 3, 2, 21);
    DropoutSpec spec{0.4, 0.4, 0.4};

    Vector a = score_se_batch(p, 1, 0, spec, nullptr, false);
    Vector b = score_se_batch(p, 1, 0, spec, nullptr, false);
    CHECK(same_bits(a, b));

    DropoutSpec none;
    CHECK(same_bits(a, score_se_batch(p, 1, 0, none, nullptr, false)));

    // p = 0 masks are all-ones, so training equals evaluation
    Rng rng(5);
    Vector c = score_se_batch(p, 1, 0, none, &rng, true);
    CHECK(same_bits(a, c));

    DropoutSpec invalid{1.0, 0.0, 0.0};
    Rng rng2(5);
    CHECK_THROWS_AS(score_se_batch(p, 1, 0, invalid, &rng2, true), Error);
}

TEST_CASE("scores are bilinear in the head embedding") {
    TuckerParams p = init_tucker(5, 2, 3, 2, 31);
    DropoutSpec none;
    Index head = 2;
    Vector before = score_se_batch(p, head, 1, none, nullptr, false);
    double lambda = 3.0;
    p.entities.row(head) *= lambda;
    Vector after = score_se_batch(p, head, 1, none, nullptr, false);
    for (Index i = 0; i < 5; ++i) {
        double factor = i == head ? lambda * lambda : lambda;  // shared entity matrix
        CHECK(after[i] == doctest::Approx(factor * before[i]).epsilon(1e-10));
    }
}
