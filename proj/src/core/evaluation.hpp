#pragma once
// Filtered ranking, MRR/HR@k metrics, per-relation and degree-group
// breakdowns, and the sweep drivers (curvature / mu-mixture / robustness).

#include <map>
#include <memory>
#include <vector>

#include "dense.hpp"
#include "graph_data.hpp"
#include "models.hpp"
#include "training.hpp"

namespace migtf::eval {

enum class RankMode {
    optimistic,   // count strictly greater competitors (ties rank first)
    pessimistic,  // count greater-or-equal competitors
};

enum class Split { valid, test };

// Filtered rank of true_tail: competitors in filter_tails (other than the
// true tail itself) are removed before counting.
Index filtered_rank(const Vector& scores, Index true_tail,
                    const std::vector<Index>& filter_tails,
                    RankMode mode = RankMode::optimistic);

struct PerRelationRow {
    Index relation;
    Index count;      // evaluated queries with this relation
    Index kg_links;   // occurrences across train+valid+test
    double hr10;
};

struct DegreeGroupRow {
    Index group;        // 0 = highest-degree group
    Index count;        // qualifying triples bucketed here
    double hr10;
};

struct MetricsReport {
    double mrr = 0.0;
    std::map<int, double> hr;  // k -> hit rate, k in {1, 3, 10}
    std::vector<PerRelationRow> per_relation;   // ordered by count descending
    std::vector<DegreeGroupRow> per_degree_group;
    Index evaluated = 0;
};

// Read-only 1-N scoring view over a trained model; implementations are pure
// on immutable parameters, so score() is safe to call from many threads.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual Vector score(Index head, Index rel) const = 0;
    virtual Index n_entities() const = 0;
};

class TuckerScorer : public Scorer {
public:
    explicit TuckerScorer(const tucker::TuckerParams& params) : params_(params) {}
    Vector score(Index head, Index rel) const override;
    Index n_entities() const override { return params_.n_entities(); }

private:
    const tucker::TuckerParams& params_;
};

class TptfScorer : public Scorer {
public:
    explicit TptfScorer(const models::TptfParams& params);
    Vector score(Index head, Index rel) const override;
    Index n_entities() const override { return params_.n_entities(); }

private:
    const models::TptfParams& params_;
    Vector v_x0_;
};

class MigTfScorer : public Scorer {
public:
    // mu_override < 0 keeps the model's own mixture weight.
    explicit MigTfScorer(const models::MigTfModel& model, double mu_override = -1.0);
    Vector score(Index head, Index rel) const override;
    Index n_entities() const override { return model_.tptf.n_entities(); }

private:
    models::MigTfModel model_;  // copy with possibly overridden mu
    Vector v_x0_;
};

std::unique_ptr<Scorer> make_scorer(const train::Checkpoint& ckpt);

// Ranks every triple of the chosen split (both directions are present as
// separate triples in an augmented store). Fills mrr, hr and per_relation.
MetricsReport evaluate_split(const Scorer& scorer, const graph::TripleStore& store,
                             Split split, const graph::FilterIndex& filter,
                             RankMode mode = RankMode::optimistic, int threads = 1);

std::vector<PerRelationRow> per_relation_report(const Scorer& scorer,
                                                const graph::TripleStore& store,
                                                const graph::FilterIndex& filter,
                                                RankMode mode = RankMode::optimistic);

// Test triples whose head and tail both rank in the top_k entities by
// incoming-link count, bucketed into consecutive groups of group_size over
// that descending order; a triple lands in its tail entity's group.
std::vector<DegreeGroupRow> degree_group_report(const Scorer& scorer,
                                                const graph::TripleStore& store,
                                                const graph::FilterIndex& filter,
                                                Index top_k = 20, Index group_size = 5,
                                                RankMode mode = RankMode::optimistic);

enum class SweepKind { curvature, mu, robustness };

struct SweepRow {
    double value;
    double mrr;
    double hr10;
};

// Takes the un-augmented store; augmentation (and poisoning, for the
// robustness sweep) happen inside per swept value. curvature retrains the
// hyperbolic term per beta; mu re-scores one trained MIG-TF; robustness
// retrains on poisoned train data and evaluates on the clean test split.
std::vector<SweepRow> sweep(SweepKind kind, const std::vector<double>& values,
                            const train::TrainConfig& base,
                            const graph::TripleStore& store, int threads = 1);

}  // namespace migtf::eval
