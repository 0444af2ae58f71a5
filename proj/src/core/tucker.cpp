#include "tucker.hpp"

#include <cmath>

namespace migtf::tucker {

namespace {

using RowMap = Eigen::Map<const Matrix>;
using RowMapMut = Eigen::Map<Matrix>;

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p < 1.0))
        fail(ErrorCode::invalid_argument, std::string(name) + " must be in [0, 1)");
}

// scaled inverted-dropout mask: 0 with probability p, else 1/(1-p)
template <typename Dst>
void fill_mask(Dst& dst, double p, Rng& rng) {
    double keep = 1.0 - p;
    for (Index i = 0; i < dst.size(); ++i)
        dst.data()[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
}

}  // namespace

void DropoutSpec::validate() const {
    check_prob(p1, "dropout p1");
    check_prob(p2, "dropout p2");
    check_prob(p3, "dropout p3");
}

TuckerParams init_tucker(Index n_e, Index n_r, Index d_e, Index d_r, std::uint64_t seed) {
    if (n_e < 1 || n_r < 1 || d_e < 1 || d_r < 1)
        fail(ErrorCode::invalid_argument, "init_tucker: dimensions must be positive");

    Rng rng(seed);
    TuckerParams p;
    p.entities.resize(n_e, d_e);
    double std_e = std::sqrt(2.0 / static_cast<double>(n_e + d_e));
    for (Index i = 0; i < p.entities.size(); ++i) p.entities.data()[i] = rng.normal(0.0, std_e);

    p.relations.resize(n_r, d_r);
    double std_r = std::sqrt(2.0 / static_cast<double>(n_r + d_r));
    for (Index i = 0; i < p.relations.size(); ++i) p.relations.data()[i] = rng.normal(0.0, std_r);

    p.core = Tensor3(d_e, d_e, d_r);
    for (Index i = 0; i < p.core.size(); ++i) p.core.data()[i] = rng.uniform(-1.0, 1.0);
    return p;
}

Tensor3 mode_n_product(const Tensor3& g, const Matrix& m, int mode) {
    if (mode < 1 || mode > 3) fail(ErrorCode::shape, "mode_n_product: mode must be 1, 2 or 3");
    Index axis = mode - 1;
    if (m.rows() != g.dim(static_cast<int>(axis)))
        fail(ErrorCode::shape, "mode_n_product: matrix rows must match the contracted extent");

    Index d0 = g.dim(0), d1 = g.dim(1), d2 = g.dim(2);
    Index k = m.cols();
    switch (axis) {
        case 0: {
            Tensor3 out(k, d1, d2);
            RowMap gm(g.data(), d0, d1 * d2);
            RowMapMut om(out.data(), k, d1 * d2);
            om.noalias() = m.transpose() * gm;
            return out;
        }
        case 1: {
            Tensor3 out(d0, k, d2);
            for (Index i = 0; i < d0; ++i) {
                RowMap gi(g.data() + i * d1 * d2, d1, d2);
                RowMapMut oi(out.data() + i * k * d2, k, d2);
                oi.noalias() = m.transpose() * gi;
            }
            return out;
        }
        default: {
            Tensor3 out(d0, d1, k);
            RowMap gm(g.data(), d0 * d1, d2);
            RowMapMut om(out.data(), d0 * d1, k);
            om.noalias() = gm * m;
            return out;
        }
    }
}

Vector score_se_batch(const TuckerParams& params, Index head, Index rel,
                      const DropoutSpec& dropout, Rng* rng, bool training,
                      TuckerForwardCache* cache) {
    if (head < 0 || head >= params.n_entities())
        fail(ErrorCode::invalid_argument, "score_se_batch: head index out of range");
    if (rel < 0 || rel >= params.n_relations())
        fail(ErrorCode::invalid_argument, "score_se_batch: relation index out of range");
    dropout.validate();
    if (training && rng == nullptr)
        fail(ErrorCode::invalid_argument, "score_se_batch: training mode needs an RNG");

    Index d_e = params.d_e(), d_r = params.d_r();
    Vector u = params.entities.row(head);
    Vector mask1;
    if (training) {
        mask1.resize(d_e);
        fill_mask(mask1, dropout.p1, *rng);
        u.array() *= mask1.array();
    }

    // W(b, g) = sum_a G(a, b, g) * u(a)
    RowMap gm(params.core.data(), d_e, d_e * d_r);
    Vector w_flat = gm.transpose() * u;
    Matrix w = RowMap(w_flat.data(), d_e, d_r);
    Matrix mask2;
    if (training) {
        mask2.resize(d_e, d_r);
        fill_mask(mask2, dropout.p2, *rng);
        w.array() *= mask2.array();
    }

    Vector x = w * params.relations.row(rel).transpose();
    Vector mask3;
    if (training) {
        mask3.resize(d_e);
        fill_mask(mask3, dropout.p3, *rng);
        x.array() *= mask3.array();
    }

    if (cache) {
        cache->head = head;
        cache->rel = rel;
        cache->u = u;
        cache->w = w;
        cache->x = x;
        cache->mask1 = mask1;
        cache->mask2 = mask2;
        cache->mask3 = mask3;
        cache->training = training;
    }
    return params.entities * x;
}

void score_se_backward(const TuckerParams& params, const TuckerForwardCache& cache,
                       const Vector& dscores, TuckerGrads& grads) {
    if (dscores.size() != params.n_entities())
        fail(ErrorCode::shape, "score_se_backward: gradient length mismatch");

    Index d_e = params.d_e(), d_r = params.d_r();

    // scores = E * x
    grads.entities.noalias() += dscores * cache.x.transpose();
    Vector dx = params.entities.transpose() * dscores;
    if (cache.training) dx.array() *= cache.mask3.array();

    // x = W * t
    Vector t = params.relations.row(cache.rel);
    Matrix dw = dx * t.transpose();
    grads.relations.row(cache.rel).noalias() += (cache.w.transpose() * dx).transpose();
    if (cache.training) dw.array() *= cache.mask2.array();

    // W = G x_1 u
    RowMapMut dgm(grads.core.data(), d_e, d_e * d_r);
    RowMap dw_flat(dw.data(), 1, d_e * d_r);
    dgm.noalias() += cache.u * dw_flat;
    RowMap gm(params.core.data(), d_e, d_e * d_r);
    Vector du = gm * RowMap(dw.data(), d_e * d_r, 1);
    if (cache.training) du.array() *= cache.mask1.array();
    grads.entities.row(cache.head) += du.transpose();
}

}  // namespace migtf::tucker
