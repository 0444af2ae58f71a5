#include <doctest.h>

#include <cmath>

#include "models.hpp"
#include "test_util.hpp"

using namespace migtf;
using namespace migtf::models;
using testutil::same_bits;

TEST_CASE("init_tptf determinism and validation") {
    TptfParams a = init_tptf(5, 2, 3, 1.3, 0.5, 0.5, 0.0, 0.0, 9);
    TptfParams b = init_tptf(5, 2, 3, 1.3, 0.5, 0.5, 0.0, 0.0, 9);
    CHECK(same_bits(a.entities, b.entities));
    CHECK(same_bits(a.relations, b.relations));
    CHECK(a.beta == 1.3);
    CHECK_THROWS_AS(init_tptf(5, 2, 3, -1.0, 0.5, 0.5, 0.0, 0.0, 9), Error);
}

TEST_CASE("tptf_score_batch") {
    SUBCASE("all-zero embeddings score zero everywhere") {
        TptfParams p = init_tptf(4, 1, 3, 1.0, 0.0, 0.0, 0.0, 0.0, 1);
        p.entities.setZero();
        p.relations.setZero();
        Vector s = tptf_score_batch(p, 0, 0, false, nullptr);
        for (Index i = 0; i < 4; ++i) CHECK(s[i] == 0.0);
    }

    SUBCASE("matches the scalar closed-form example") {
        // head at the origin, relation (0.6, 0.8), candidate entity at the origin
        TptfParams p;
        p.beta = 1.0;
        p.entities = Matrix::Zero(2, 2);
        p.entities.row(1) << 0.3, -0.2;
        p.relations = Matrix(1, 2);
        p.relations << 0.6, 0.8;
        Vector s = tptf_score_batch(p, 0, 0, false, nullptr);
        CHECK(s[0] == doctest::Approx(-0.1081951).epsilon(1e-6));
    }

    SUBCASE("evaluation is bit-deterministic") {
        TptfParams p = init_tptf(6, 2, 4, 1.5, 0.3, 0.3, 0.2, 0.2, 3);
        Vector a = tptf_score_batch(p, 2, 1, false, nullptr);
        Vector b = tptf_score_batch(p, 2, 1, false, nullptr);
        CHECK(same_bits(a, b));
    }

    SUBCASE("index validation") {
        TptfParams p = init_tptf(3, 1, 2, 1.0, 0.1, 0.1, 0.0, 0.0, 5);
        CHECK_THROWS_AS(tptf_score_batch(p, 3, 0, false, nullptr), Error);
        CHECK_THROWS_AS(tptf_score_batch(p, 0, 1, false, nullptr), Error);
    }
}

TEST_CASE("qr_orthogonalize") {
    SUBCASE("diagonal input is already orthogonal") {
        Matrix t(2, 2);
        t << 2.0, 0.0, 0.0, 3.0;
        QrResult qr = qr_orthogonalize(t);
        CHECK_FALSE(qr.reduced);
        CHECK(qr.q_rows(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qr.q_rows(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(qr.q_rows(0, 1)) <= 1e-12);
        CHECK(qr.r_tri(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(qr.r_tri(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    }

    SUBCASE("orthogonal permutation input returns itself with R = I") {
        Matrix t(2, 2);
        t << 0.0, 1.0, 1.0, 0.0;
        QrResult qr = qr_orthogonalize(t);
        CHECK(qr.q_rows(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qr.q_rows(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qr.r_tri(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qr.r_tri(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(qr.r_tri(0, 1)) <= 1e-12);
    }

    SUBCASE("random 4x8: orthonormal rows and exact reconstruction") {
        Rng rng(13);
        Matrix t(4, 8);
        for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
        QrResult qr = qr_orthogonalize(t);
        CHECK_FALSE(qr.reduced);
        REQUIRE(qr.q_rows.rows() == 4);

        Matrix gram = qr.q_rows * qr.q_rows.transpose();
        CHECK((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);

        Matrix recon = qr.q_rows.transpose() * qr.r_tri;  // = T^T
        CHECK((recon - t.transpose()).cwiseAbs().maxCoeff() <= 1e-8);

        for (Index i = 0; i < 4; ++i) CHECK(qr.r_tri(i, i) >= 0.0);
        for (Index i = 1; i < 4; ++i)
            for (Index j = 0; j < i; ++j) CHECK(qr.r_tri(i, j) == 0.0);
    }

    SUBCASE("reduced decomposition when relations outnumber dimensions") {
        Rng rng(17);
        Matrix t(5, 3);
        for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
        QrResult qr = qr_orthogonalize(t);
        CHECK(qr.reduced);
        REQUIRE(qr.q_rows.rows() == 3);
        Matrix gram = qr.q_rows * qr.q_rows.transpose();
        CHECK((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);
        Matrix recon = qr.q_rows.transpose() * qr.r_tri;
        CHECK((recon - t.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("migtf_score_batch") {
    MigTfModel model;
    model.tucker = tucker::init_tucker(3, 2, 2, 2, 5);
    model.tptf = init_tptf(3, 2, 2, 1.0, 0.4, 0.4, 0.0, 0.0, 6);
    model.mu = 0.5;

    tucker::DropoutSpec none;
    Vector se = tucker::score_se_batch(model.tucker, 1, 0, none, nullptr, false);
    Vector sh = tptf_score_batch(model.tptf, 1, 0, false, nullptr);

    SUBCASE("mu endpoints are exact algebraic selections") {
        model.mu = 1.0;
        Vector at1 = migtf_score_batch(model, 1, 0, false, nullptr);
        CHECK(same_bits(at1, Vector(2.0 * se)));

        model.mu = 0.0;
        Vector at0 = migtf_score_batch(model, 1, 0, false, nullptr);
        CHECK(same_bits(at0, Vector(2.0 * sh)));
    }

    SUBCASE("mu = 0.5 reproduces the plain sum") {
        model.mu = 0.5;
        Vector s = migtf_score_batch(model, 1, 0, false, nullptr);
        for (Index i = 0; i < 3; ++i)
            CHECK(s[i] == doctest::Approx(se[i] + sh[i]).epsilon(1e-12));
    }

    SUBCASE("composition matches hand-scaled components") {
        model.mu = 0.3;
        Vector s = migtf_score_batch(model, 1, 0, false, nullptr);
        for (Index i = 0; i < 3; ++i)
            CHECK(std::abs(s[i] - 2.0 * (0.3 * se[i] + 0.7 * sh[i])) <= 1e-10);
    }

    SUBCASE("invalid mu is rejected") {
        model.mu = 1.5;
        CHECK_THROWS_AS(migtf_score_batch(model, 1, 0, false, nullptr), Error);
    }
}

TEST_CASE("migtf QR substitution uses orthonormal relation rows") {
    MigTfModel model;
    model.tucker = tucker::init_tucker(4, 2, 2, 2, 7);
    model.tptf = init_tptf(4, 2, 3, 1.0, 0.4, 0.4, 0.0, 0.0, 8);
    model.qr_enabled = true;

    MigTfForwardCache cache;
    Vector s = migtf_score_batch(model, 0, 1, false, nullptr, &cache);
    CHECK(cache.used_qr);
    Matrix gram = cache.qr.q_rows * cache.qr.q_rows.transpose();
    CHECK((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);

    // scoring actually used row 1 of Q
    QrResult qr = qr_orthogonalize(model.tptf.relations);
    CHECK(same_bits(cache.tptf.c, Vector(qr.q_rows.row(1))));

    // by hand: substitute q into a plain tptf model
    TptfParams sub = model.tptf;
    sub.relations = qr.q_rows;
    Vector sh = tptf_score_batch(sub, 0, 1, false, nullptr);
    tucker::DropoutSpec none;
    Vector se = tucker::score_se_batch(model.tucker, 0, 1, none, nullptr, false);
    for (Index i = 0; i < 4; ++i)
        CHECK(std::abs(s[i] - (se[i] + sh[i])) <= 1e-12);
}

TEST_CASE("bce_loss") {
    SUBCASE("sigmoid midpoint") {
        Vector s(1), y(1);
        s << 0.0;
        y << 1.0;
        auto [loss, grad] = bce_loss(s, y);
        CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(grad[0] == doctest::Approx(-0.5).epsilon(1e-12));
    }

    SUBCASE("stationary when labels equal the prediction") {
        Vector s(3);
        s << 0.3, -1.2, 2.0;
        Vector y(3);
        for (Index i = 0; i < 3; ++i) y[i] = 1.0 / (1.0 + std::exp(-s[i]));
        auto [loss, grad] = bce_loss(s, y);
        (void)loss;
        for (Index i = 0; i < 3; ++i) CHECK(std::abs(grad[i]) <= 1e-15);
    }

    SUBCASE("no overflow at large logits") {
        Vector s(1), y(1);
        s << 100.0;
        y << 0.0;
        auto [loss, grad] = bce_loss(s, y);
        CHECK(loss == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(std::isfinite(grad[0]));

        s << 10000.0;
        auto [big, g2] = bce_loss(s, y);
        CHECK(big == doctest::Approx(10000.0).epsilon(1e-12));
        CHECK(std::isfinite(g2[0]));
    }

    SUBCASE("gradient matches central finite differences") {
        Rng rng(19);
        Vector s(8), y(8);
        for (Index i = 0; i < 8; ++i) {
            s[i] = rng.uniform(-4.0, 4.0);
            y[i] = rng.uniform();
        }
        auto [loss, grad] = bce_loss(s, y);
        (void)loss;
        double h = 1e-6;
        for (Index i = 0; i < 8; ++i) {
            double saved = s[i];
            s[i] = saved + h;
            double lp = bce_loss(s, y).loss;
            s[i] = saved - h;
            double lm = bce_loss(s, y).loss;
            s[i] = saved;
            double fd = (lp - lm) / (2.0 * h);
            CHECK(std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-10}) <=
                  1e-6);
        }
    }

    SUBCASE("length mismatch") {
        Vector s(2), y(3);
        s.setZero();
        y.setZero();
        CHECK_THROWS_AS(bce_loss(s, y), Error);
    }
}
