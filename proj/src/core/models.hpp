#pragma once
// The TPTF hyperbolic scorer, the QR-orthogonalized relation variant, the
// MIG-TF mixture (frozen Euclidean + trainable hyperbolic), and the BCE loss.
//
// TPTF parameters live in Euclidean coordinates and are lifted onto the
// beta-hyperboloid at every use, so optimization stays plain Euclidean.

#include <cstdint>

#include "dense.hpp"
#include "lorentz.hpp"
#include "rng.hpp"
#include "tucker.hpp"

namespace migtf::models {

struct TptfParams {
    Matrix entities;   // n_e x d_h Euclidean coordinates
    Matrix relations;  // n_r x d_h
    double beta = 1.0;
    double init_std_e = 0.0, init_std_r = 0.0;
    double dropout_e = 0.0, dropout_r = 0.0;

    Index n_entities() const { return entities.rows(); }
    Index n_relations() const { return relations.rows(); }
    Index d_h() const { return entities.cols(); }

    lorentz::Curvature curvature() const { return lorentz::Curvature(beta); }
};

// Entity/relation rows from N(0, rho_e^2) / N(0, rho_r^2).
TptfParams init_tptf(Index n_e, Index n_r, Index d_h, double beta, double rho_e,
                     double rho_r, double dropout_e, double dropout_r, std::uint64_t seed);

struct TptfForwardCache {
    Index head = 0, rel = 0;
    Vector a;  // head coordinates actually scored (post-dropout in training)
    Vector c;  // relation coordinates actually scored
    double u0 = 0.0, t0 = 0.0;
    Vector mask_e, mask_r;  // empty in evaluation mode
    bool training = false;
};

// Scores (head, rel) against every entity row. v_x0 are the lifted time
// coordinates of params.entities (shared across the queries of one step).
// Candidate rows are never dropped; dropout touches only the head/relation
// coordinates before lifting.
Vector tptf_score_batch(const TptfParams& params, Index head, Index rel,
                        const Vector& v_x0, bool training, Rng* rng,
                        TptfForwardCache* cache = nullptr);

// Convenience overload computing v_x0 itself (evaluation paths).
Vector tptf_score_batch(const TptfParams& params, Index head, Index rel,
                        bool training, Rng* rng, TptfForwardCache* cache = nullptr);

struct TptfGrads {
    Matrix entities;
    Matrix relations;

    explicit TptfGrads(const TptfParams& p)
        : entities(Matrix::Zero(p.entities.rows(), p.entities.cols())),
          relations(Matrix::Zero(p.relations.rows(), p.relations.cols())) {}
};

// Exact analytic gradients of the scores w.r.t. the Euclidean parameters,
// chaining through the lift (d x0 / d v_i = v_i / x0).
void tptf_score_backward(const TptfParams& params, const Vector& v_x0,
                         const TptfForwardCache& cache, const Vector& dscores,
                         TptfGrads& grads);

// Thin Householder QR of relations^T: relations^T = Q~ * R with Q~ having
// orthonormal columns and R upper triangular with non-negative diagonal.
// q_rows = Q~^T gives k = min(n_r, d_h) orthonormal relation rows; `reduced`
// flags the n_r > d_h case where only the leading d_h rows have a basis.
struct QrResult {
    Matrix q_rows;  // k x d_h
    Matrix r_tri;   // k x n_r
    bool reduced = false;
};

QrResult qr_orthogonalize(const Matrix& relations);

struct MigTfModel {
    tucker::TuckerParams tucker;  // frozen during MIG-TF training
    TptfParams tptf;              // trainable
    double mu = 0.5;              // mixture weight; 0.5 reproduces the plain sum
    bool qr_enabled = false;
};

struct MigTfForwardCache {
    TptfForwardCache tptf;
    QrResult qr;         // populated when qr_enabled
    bool used_qr = false;
};

// 2 * (mu * S_E + (1 - mu) * S_H) elementwise; the Tucker term always runs in
// evaluation mode. With qr_enabled the hyperbolic relation row is taken from
// qr_orthogonalize(T_h), recomputed on each forward pass.
Vector migtf_score_batch(const MigTfModel& model, Index head, Index rel,
                         const Vector& v_x0, bool training, Rng* rng,
                         MigTfForwardCache* cache = nullptr);

Vector migtf_score_batch(const MigTfModel& model, Index head, Index rel,
                         bool training, Rng* rng, MigTfForwardCache* cache = nullptr);

// Propagates d(loss)/d(scores) to the TPTF parameters only (Tucker frozen).
// With QR, the relation gradient chains through the substitution treating
// R as a constant: dT = R^{-1} dQ on the orthonormalized block.
void migtf_score_backward(const MigTfModel& model, const Vector& v_x0,
                          const MigTfForwardCache& cache, const Vector& dscores,
                          TptfGrads& grads);

struct BceResult {
    double loss;
    Vector grad;  // d(mean loss)/d(scores)
};

// Mean of -y*log(sigmoid(s)) - (1-y)*log(1-sigmoid(s)), in the log-sum-exp
// stabilized form (no overflow for |s| up to ~1e4). grad = (sigmoid(s) - y)/n.
BceResult bce_loss(const Vector& scores, const Vector& labels);

}  // namespace migtf::models
