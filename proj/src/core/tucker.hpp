#pragma once
// Euclidean shared-factor Tucker scorer: core tensor, mode-n contraction,
// batched 1-N scoring with three dropout sites, and initialization.
//
// Scoring pipeline for a (head, rel) query against all entities:
//   u = E[head]            -> dropout site 1
//   W = G x_1 u            -> dropout site 2      (d_e x d_r)
//   x = W * R[rel]         -> dropout site 3      (d_e)
//   scores = E * x                                (n_e)
// Dropout is inverted (kept entries scaled by 1/keep) so evaluation mode is
// plain arithmetic with no rescaling.

#include <cstdint>

#include "dense.hpp"
#include "rng.hpp"

namespace migtf::tucker {

struct DropoutSpec {
    double p1 = 0.0;  // entity embedding
    double p2 = 0.0;  // after G x_1 u
    double p3 = 0.0;  // after contraction with the relation embedding

    void validate() const;
};

struct TuckerParams {
    Matrix entities;   // n_e x d_e, shared for subjects and objects
    Matrix relations;  // n_r x d_r
    Tensor3 core;      // d_e x d_e x d_r

    Index n_entities() const { return entities.rows(); }
    Index n_relations() const { return relations.rows(); }
    Index d_e() const { return entities.cols(); }
    Index d_r() const { return relations.cols(); }
};

// Entity/relation rows from a Xavier-style normal, core uniform on [-1, 1].
TuckerParams init_tucker(Index n_e, Index n_r, Index d_e, Index d_r, std::uint64_t seed);

// Contraction of the paper's G x_n M operator (mode is 1-based, matching the
// usual mathematical notation): the mode-n extent of G must equal M's row
// count and becomes M's column count in the result.
Tensor3 mode_n_product(const Tensor3& g, const Matrix& m, int mode);

// Intermediate values kept for the manual backward pass.
struct TuckerForwardCache {
    Index head = 0, rel = 0;
    Vector u;        // post-dropout entity embedding
    Matrix w;        // post-dropout G x_1 u
    Vector x;        // post-dropout W * t
    Vector mask1;    // scaled keep masks (empty in evaluation mode)
    Matrix mask2;
    Vector mask3;
    bool training = false;
};

Vector score_se_batch(const TuckerParams& params, Index head, Index rel,
                      const DropoutSpec& dropout, Rng* rng, bool training,
                      TuckerForwardCache* cache = nullptr);

struct TuckerGrads {
    Matrix entities;
    Matrix relations;
    Tensor3 core;

    explicit TuckerGrads(const TuckerParams& p)
        : entities(Matrix::Zero(p.entities.rows(), p.entities.cols())),
          relations(Matrix::Zero(p.relations.rows(), p.relations.cols())),
          core(p.core.dim(0), p.core.dim(1), p.core.dim(2)) {}
};

// Accumulates d(loss)/d(params) for one query given d(loss)/d(scores).
void score_se_backward(const TuckerParams& params, const TuckerForwardCache& cache,
                       const Vector& dscores, TuckerGrads& grads);

}  // namespace migtf::tucker
