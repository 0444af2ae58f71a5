#include "models.hpp"

#include <cmath>

namespace migtf::models {

namespace {

void check_indices(Index head, Index rel, Index n_e, Index n_r, const char* who) {
    if (head < 0 || head >= n_e)
        fail(ErrorCode::invalid_argument, std::string(who) + ": head index out of range");
    if (rel < 0 || rel >= n_r)
        fail(ErrorCode::invalid_argument, std::string(who) + ": relation index out of range");
}

Vector dropout_mask(Index n, double p, Rng& rng) {
    Vector mask(n);
    double keep = 1.0 - p;
    for (Index i = 0; i < n; ++i) mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mask;
}

// Shared core of the TPTF forward/backward: scores with explicitly supplied
// head/relation coordinates (post-substitution, post-dropout).
Vector sh_scores(const Matrix& entities, const Vector& v_x0, const Vector& a,
                 const Vector& c, double beta) {
    double rb = std::sqrt(beta);
    double u0 = std::sqrt(beta + a.squaredNorm());
    double t0 = std::sqrt(beta + c.squaredNorm());
    double ut = -u0 * t0 + a.dot(c);

    Vector au = entities * a;
    Vector at = entities * c;
    Index n = entities.rows();
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
        double v0 = v_x0[i];
        double num = 2.0 * beta + rb * (t0 - u0 - v0) -
                     ((-u0 * v0 + au[i]) - ut - (-t0 * v0 + at[i]));
        double den = beta * (u0 * v0 + u0 * t0 + t0 * v0);
        out[i] = num / den;
    }
    return out;
}

}  // namespace

TptfParams init_tptf(Index n_e, Index n_r, Index d_h, double beta, double rho_e,
                     double rho_r, double dropout_e, double dropout_r, std::uint64_t seed) {
    if (n_e < 1 || n_r < 1 || d_h < 1)
        fail(ErrorCode::invalid_argument, "init_tptf: dimensions must be positive");
    if (!(beta > 0.0)) fail(ErrorCode::invalid_argument, "init_tptf: beta must be positive");

    Rng rng(seed);
    TptfParams p;
    p.beta = beta;
    p.init_std_e = rho_e;
    p.init_std_r = rho_r;
    p.dropout_e = dropout_e;
    p.dropout_r = dropout_r;
    p.entities.resize(n_e, d_h);
    for (Index i = 0; i < p.entities.size(); ++i) p.entities.data()[i] = rng.normal(0.0, rho_e);
    p.relations.resize(n_r, d_h);
    for (Index i = 0; i < p.relations.size(); ++i) p.relations.data()[i] = rng.normal(0.0, rho_r);
    return p;
}

Vector tptf_score_batch(const TptfParams& params, Index head, Index rel,
                        const Vector& v_x0, bool training, Rng* rng,
                        TptfForwardCache* cache) {
    check_indices(head, rel, params.n_entities(), params.n_relations(), "tptf_score_batch");
    if (v_x0.size() != params.n_entities())
        fail(ErrorCode::shape, "tptf_score_batch: time-coordinate count mismatch");
    if (training && rng == nullptr)
        fail(ErrorCode::invalid_argument, "tptf_score_batch: training mode needs an RNG");

    Vector a = params.entities.row(head);
    Vector c = params.relations.row(rel);
    Vector mask_e, mask_r;
    if (training) {
        mask_e = dropout_mask(a.size(), params.dropout_e, *rng);
        mask_r = dropout_mask(c.size(), params.dropout_r, *rng);
        a.array() *= mask_e.array();
        c.array() *= mask_r.array();
    }

    if (cache) {
        cache->head = head;
        cache->rel = rel;
        cache->a = a;
        cache->c = c;
        cache->u0 = std::sqrt(params.beta + a.squaredNorm());
        cache->t0 = std::sqrt(params.beta + c.squaredNorm());
        cache->mask_e = mask_e;
        cache->mask_r = mask_r;
        cache->training = training;
    }
    return sh_scores(params.entities, v_x0, a, c, params.beta);
}

Vector tptf_score_batch(const TptfParams& params, Index head, Index rel,
                        bool training, Rng* rng, TptfForwardCache* cache) {
    Vector v_x0 = lorentz::lift_x0(params.entities, params.curvature());
    return tptf_score_batch(params, head, rel, v_x0, training, rng, cache);
}

namespace {

// Gradient of sum_i ds_i * S_H(a, w_i, c) w.r.t. a, c and the entity rows.
// Per entity, with N/D the numerator/denominator of the closed form:
//   dN/du0 = -sqrt(b) + v0 - t0     dD/du0 = b*(v0 + t0)
//   dN/dt0 =  sqrt(b) - u0 - v0     dD/dt0 = b*(u0 + v0)
//   dN/dv0 = -sqrt(b) + u0 - t0     dD/dv0 = b*(u0 + t0)
//   dN/da = c - w_i,  dN/dc = a + w_i,  dN/dw_i = c - a
// and the lift chain dx0/dx = x/x0 closes u0/t0/v0 back onto coordinates.
struct ShBackward {
    Vector da, dc;       // gradient w.r.t. the used head/relation coordinates
    // entity-row gradients are accumulated directly into the caller's matrix
};

ShBackward sh_backward(const Matrix& entities, const Vector& v_x0, const Vector& a,
                       const Vector& c, double beta, const Vector& ds,
                       Matrix& entity_grads) {
    double rb = std::sqrt(beta);
    double u0 = std::sqrt(beta + a.squaredNorm());
    double t0 = std::sqrt(beta + c.squaredNorm());
    double ut = -u0 * t0 + a.dot(c);

    Vector au = entities * a;
    Vector at = entities * c;

    Index n = entities.rows();
    Index d = entities.cols();
    double du0 = 0.0, dt0 = 0.0, sum_dn = 0.0;
    Vector se = Vector::Zero(d);
    Vector c_minus_a = c - a;
    for (Index i = 0; i < n; ++i) {
        double v0 = v_x0[i];
        double num = 2.0 * beta + rb * (t0 - u0 - v0) -
                     ((-u0 * v0 + au[i]) - ut - (-t0 * v0 + at[i]));
        double den = beta * (u0 * v0 + u0 * t0 + t0 * v0);
        double dn = ds[i] / den;
        double dd = -ds[i] * num / (den * den);
        du0 += dn * (-rb + v0 - t0) + dd * beta * (v0 + t0);
        dt0 += dn * (rb - u0 - v0) + dd * beta * (u0 + v0);
        double dv0 = dn * (-rb + u0 - t0) + dd * beta * (u0 + t0);
        sum_dn += dn;
        se += dn * entities.row(i).transpose();
        entity_grads.row(i) += dn * c_minus_a.transpose() +
                               (dv0 / v0) * entities.row(i);
    }

    ShBackward out;
    out.da = sum_dn * c - se + (du0 / u0) * a;
    out.dc = sum_dn * a + se + (dt0 / t0) * c;
    return out;
}

}  // namespace

void tptf_score_backward(const TptfParams& params, const Vector& v_x0,
                         const TptfForwardCache& cache, const Vector& dscores,
                         TptfGrads& grads) {
    if (dscores.size() != params.n_entities())
        fail(ErrorCode::shape, "tptf_score_backward: gradient length mismatch");

    ShBackward b = sh_backward(params.entities, v_x0, cache.a, cache.c, params.beta,
                               dscores, grads.entities);
    Vector da = b.da, dc = b.dc;
    if (cache.training) {
        da.array() *= cache.mask_e.array();
        dc.array() *= cache.mask_r.array();
    }
    grads.entities.row(cache.head) += da.transpose();
    grads.relations.row(cache.rel) += dc.transpose();
}

QrResult qr_orthogonalize(const Matrix& relations) {
    Index n_r = relations.rows();
    Index d_h = relations.cols();
    if (n_r < 1) fail(ErrorCode::invalid_argument, "qr_orthogonalize: empty relation matrix");

    Index k = std::min(n_r, d_h);
    Eigen::MatrixXd a = relations.transpose();  // d_h x n_r, column-major for the solver
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(d_h, k);
    Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    // QR is unique only up to column signs; pin the diagonal non-negative.
    for (Index i = 0; i < k; ++i) {
        if (r(i, i) < 0.0) {
            r.row(i) = -r.row(i);
            thin_q.col(i) = -thin_q.col(i);
        }
    }

    QrResult out;
    out.q_rows = thin_q.transpose();
    out.r_tri = r;
    out.reduced = n_r > d_h;
    return out;
}

namespace {

// Relation coordinates used by a QR-enabled forward pass: orthonormalized row
// when one exists, the raw embedding beyond the basis in the reduced case.
Vector qr_relation_row(const QrResult& qr, const Matrix& relations, Index rel) {
    if (rel < qr.q_rows.rows()) return qr.q_rows.row(rel);
    return relations.row(rel);
}

}  // namespace

Vector migtf_score_batch(const MigTfModel& model, Index head, Index rel,
                         const Vector& v_x0, bool training, Rng* rng,
                         MigTfForwardCache* cache) {
    check_indices(head, rel, model.tptf.n_entities(), model.tptf.n_relations(),
                  "migtf_score_batch");
    if (!(model.mu >= 0.0 && model.mu <= 1.0))
        fail(ErrorCode::invalid_argument, "migtf_score_batch: mu must be in [0, 1]");

    tucker::DropoutSpec no_dropout;
    Vector se = tucker::score_se_batch(model.tucker, head, rel, no_dropout, nullptr, false);

    Vector sh;
    TptfForwardCache* tcache = cache ? &cache->tptf : nullptr;
    if (model.qr_enabled) {
        QrResult qr = qr_orthogonalize(model.tptf.relations);
        Vector a = model.tptf.entities.row(head);
        Vector c = qr_relation_row(qr, model.tptf.relations, rel);
        Vector mask_e, mask_r;
        if (training) {
            if (rng == nullptr)
                fail(ErrorCode::invalid_argument, "migtf_score_batch: training mode needs an RNG");
            mask_e = dropout_mask(a.size(), model.tptf.dropout_e, *rng);
            mask_r = dropout_mask(c.size(), model.tptf.dropout_r, *rng);
            a.array() *= mask_e.array();
            c.array() *= mask_r.array();
        }
        sh = sh_scores(model.tptf.entities, v_x0, a, c, model.tptf.beta);
        if (cache) {
            cache->tptf.head = head;
            cache->tptf.rel = rel;
            cache->tptf.a = a;
            cache->tptf.c = c;
            cache->tptf.u0 = std::sqrt(model.tptf.beta + a.squaredNorm());
            cache->tptf.t0 = std::sqrt(model.tptf.beta + c.squaredNorm());
            cache->tptf.mask_e = mask_e;
            cache->tptf.mask_r = mask_r;
            cache->tptf.training = training;
            cache->qr = std::move(qr);
            cache->used_qr = true;
        }
    } else {
        sh = tptf_score_batch(model.tptf, head, rel, v_x0, training, rng, tcache);
        if (cache) cache->used_qr = false;
    }

    return 2.0 * (model.mu * se + (1.0 - model.mu) * sh);
}

Vector migtf_score_batch(const MigTfModel& model, Index head, Index rel,
                         bool training, Rng* rng, MigTfForwardCache* cache) {
    Vector v_x0 = lorentz::lift_x0(model.tptf.entities, model.tptf.curvature());
    return migtf_score_batch(model, head, rel, v_x0, training, rng, cache);
}

void migtf_score_backward(const MigTfModel& model, const Vector& v_x0,
                          const MigTfForwardCache& cache, const Vector& dscores,
                          TptfGrads& grads) {
    Vector ds_h = 2.0 * (1.0 - model.mu) * dscores;

    if (!cache.used_qr) {
        tptf_score_backward(model.tptf, v_x0, cache.tptf, ds_h, grads);
        return;
    }

    ShBackward b = sh_backward(model.tptf.entities, v_x0, cache.tptf.a, cache.tptf.c,
                               model.tptf.beta, ds_h, grads.entities);
    Vector da = b.da, dc = b.dc;
    if (cache.tptf.training) {
        da.array() *= cache.tptf.mask_e.array();
        dc.array() *= cache.tptf.mask_r.array();
    }
    grads.entities.row(cache.tptf.head) += da.transpose();

    Index k = cache.qr.q_rows.rows();
    Index rel = cache.tptf.rel;
    if (rel >= k) {
        grads.relations.row(rel) += dc.transpose();
        return;
    }
    // Q_rows = R^{-T} T on the orthonormalized block (R held constant per
    // step), so dT = R^{-1} dQ_rows; with only row `rel` active this spreads
    // column rel of R^{-1} over the leading rows.
    auto r_block = cache.qr.r_tri.leftCols(k);
    for (Index i = 0; i < k; ++i)
        if (std::abs(r_block(i, i)) < 1e-12)
            fail(ErrorCode::numeric, "migtf_score_backward: rank-deficient relation matrix under QR");
    Eigen::MatrixXd r_small = r_block;
    Vector unit = Vector::Unit(k, rel);
    Vector spread = r_small.triangularView<Eigen::Upper>().solve(unit);
    for (Index i = 0; i < k; ++i)
        if (spread[i] != 0.0) grads.relations.row(i) += spread[i] * dc.transpose();
}

BceResult bce_loss(const Vector& scores, const Vector& labels) {
    if (scores.size() != labels.size())
        fail(ErrorCode::shape, "bce_loss: scores/labels length mismatch");
    Index n = scores.size();
    if (n == 0) fail(ErrorCode::invalid_argument, "bce_loss: empty input");

    double total = 0.0;
    Vector grad(n);
    for (Index i = 0; i < n; ++i) {
        double s = scores[i], y = labels[i];
        total += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
        double sig = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s))
                              : std::exp(s) / (1.0 + std::exp(s));
        grad[i] = (sig - y) / static_cast<double>(n);
    }
    return BceResult{total / static_cast<double>(n), std::move(grad)};
}

}  // namespace migtf::models
