#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace migtf::eval {

Index filtered_rank(const Vector& scores, Index true_tail,
                    const std::vector<Index>& filter_tails, RankMode mode) {
    Index n = scores.size();
    if (true_tail < 0 || true_tail >= n)
        fail(ErrorCode::invalid_argument, "filtered_rank: true_tail out of range");

    double st = scores[true_tail];
    Index greater = 0;
    std::size_t f = 0;  // cursor into the sorted filter list
    for (Index j = 0; j < n; ++j) {
        while (f < filter_tails.size() && filter_tails[f] < j) ++f;
        bool filtered = f < filter_tails.size() && filter_tails[f] == j;
        if (j == true_tail || filtered) continue;
        if (mode == RankMode::optimistic ? scores[j] > st : scores[j] >= st) ++greater;
    }
    return 1 + greater;
}

// ---------------------------------------------------------------------------
// Scorers

Vector TuckerScorer::score(Index head, Index rel) const {
    tucker::DropoutSpec none;
    return tucker::score_se_batch(params_, head, rel, none, nullptr, false);
}

TptfScorer::TptfScorer(const models::TptfParams& params)
    : params_(params), v_x0_(lorentz::lift_x0(params.entities, params.curvature())) {}

Vector TptfScorer::score(Index head, Index rel) const {
    return models::tptf_score_batch(params_, head, rel, v_x0_, false, nullptr);
}

MigTfScorer::MigTfScorer(const models::MigTfModel& model, double mu_override) : model_(model) {
    if (mu_override >= 0.0) model_.mu = mu_override;
    v_x0_ = lorentz::lift_x0(model_.tptf.entities, model_.tptf.curvature());
}

Vector MigTfScorer::score(Index head, Index rel) const {
    return models::migtf_score_batch(model_, head, rel, v_x0_, false, nullptr);
}

namespace {

struct OwningTuckerScorer : Scorer {
    tucker::TuckerParams params;
    explicit OwningTuckerScorer(tucker::TuckerParams p) : params(std::move(p)) {}
    Vector score(Index head, Index rel) const override {
        tucker::DropoutSpec none;
        return tucker::score_se_batch(params, head, rel, none, nullptr, false);
    }
    Index n_entities() const override { return params.n_entities(); }
};

struct OwningTptfScorer : Scorer {
    models::TptfParams params;
    Vector v_x0;
    explicit OwningTptfScorer(models::TptfParams p)
        : params(std::move(p)), v_x0(lorentz::lift_x0(params.entities, params.curvature())) {}
    Vector score(Index head, Index rel) const override {
        return models::tptf_score_batch(params, head, rel, v_x0, false, nullptr);
    }
    Index n_entities() const override { return params.n_entities(); }
};

}  // namespace

std::unique_ptr<Scorer> make_scorer(const train::Checkpoint& ckpt) {
    if (ckpt.model_kind == "tucker")
        return std::make_unique<OwningTuckerScorer>(train::tucker_from_checkpoint(ckpt));
    if (ckpt.model_kind == "tptf")
        return std::make_unique<OwningTptfScorer>(train::tptf_from_checkpoint(ckpt));
    if (ckpt.model_kind == "migtf")
        return std::make_unique<MigTfScorer>(train::migtf_from_checkpoint(ckpt));
    fail(ErrorCode::invalid_argument, "make_scorer: unknown model kind " + ckpt.model_kind);
}

// ---------------------------------------------------------------------------
// Split evaluation

namespace {

const std::vector<graph::Triple>& split_triples(const graph::TripleStore& store, Split split) {
    return split == Split::valid ? store.valid : store.test;
}

std::vector<Index> compute_ranks(const Scorer& scorer, const std::vector<graph::Triple>& triples,
                                 const graph::FilterIndex& filter, RankMode mode, int threads) {
    std::vector<Index> ranks(triples.size());
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& t = triples[i];
            Vector scores = scorer.score(t.head, t.relation);
            ranks[i] = filtered_rank(scores, t.tail, filter.tails(t.head, t.relation), mode);
        }
    };
    if (threads <= 1 || triples.size() < 2) {
        work(0, triples.size());
    } else {
        std::size_t n = triples.size();
        std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
        std::vector<std::thread> pool;
        std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t lo = w * chunk;
            std::size_t hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return ranks;
}

}  // namespace

MetricsReport evaluate_split(const Scorer& scorer, const graph::TripleStore& store, Split split,
                             const graph::FilterIndex& filter, RankMode mode, int threads) {
    if (!store.augmented)
        fail(ErrorCode::state, "evaluate_split expects an inverse-augmented store");
    if (scorer.n_entities() != store.n_entities())
        fail(ErrorCode::shape, "evaluate_split: scorer/store entity count mismatch");

    const auto& triples = split_triples(store, split);
    MetricsReport report;
    report.hr = {{1, 0.0}, {3, 0.0}, {10, 0.0}};
    if (triples.empty()) return report;

    std::vector<Index> ranks = compute_ranks(scorer, triples, filter, mode, threads);

    double rr_sum = 0.0;
    std::map<int, Index> hits = {{1, 0}, {3, 0}, {10, 0}};
    std::unordered_map<Index, std::pair<Index, Index>> by_rel;  // rel -> (count, hits10)
    for (std::size_t i = 0; i < triples.size(); ++i) {
        Index rank = ranks[i];
        rr_sum += 1.0 / static_cast<double>(rank);
        for (auto& [k, h] : hits)
            if (rank <= k) ++h;
        auto& slot = by_rel[triples[i].relation];
        ++slot.first;
        if (rank <= 10) ++slot.second;
    }

    auto n = static_cast<double>(triples.size());
    report.evaluated = static_cast<Index>(triples.size());
    report.mrr = rr_sum / n;
    for (auto& [k, h] : hits) report.hr[k] = static_cast<double>(h) / n;

    std::unordered_map<Index, Index> kg_links;
    const std::vector<graph::Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (const auto* sp : splits)
        for (const auto& t : *sp) ++kg_links[t.relation];

    for (const auto& [rel, cnt_hits] : by_rel)
        report.per_relation.push_back({rel, cnt_hits.first, kg_links[rel],
                                       static_cast<double>(cnt_hits.second) /
                                           static_cast<double>(cnt_hits.first)});
    std::sort(report.per_relation.begin(), report.per_relation.end(),
              [](const PerRelationRow& a, const PerRelationRow& b) {
                  return a.count != b.count ? a.count > b.count : a.relation < b.relation;
              });
    return report;
}

std::vector<PerRelationRow> per_relation_report(const Scorer& scorer,
                                                const graph::TripleStore& store,
                                                const graph::FilterIndex& filter, RankMode mode) {
    return evaluate_split(scorer, store, Split::test, filter, mode).per_relation;
}

std::vector<DegreeGroupRow> degree_group_report(const Scorer& scorer,
                                                const graph::TripleStore& store,
                                                const graph::FilterIndex& filter, Index top_k,
                                                Index group_size, RankMode mode) {
    if (top_k < 1) fail(ErrorCode::invalid_argument, "degree_group_report: top_k must be >= 1");
    if (group_size < 1)
        fail(ErrorCode::invalid_argument, "degree_group_report: group_size must be >= 1");
    if (!store.augmented)
        fail(ErrorCode::state, "degree_group_report expects an inverse-augmented store");

    // incoming-link counts on the original-direction graph
    Index cutoff = store.augmented ? store.original_relation_count : store.n_relations();
    std::vector<Index> incoming(static_cast<std::size_t>(store.n_entities()), 0);
    const std::vector<graph::Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (const auto* sp : splits)
        for (const auto& t : *sp)
            if (t.relation < cutoff) ++incoming[static_cast<std::size_t>(t.tail)];

    std::vector<Index> order(incoming.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        auto ia = incoming[static_cast<std::size_t>(a)], ib = incoming[static_cast<std::size_t>(b)];
        return ia != ib ? ia > ib : a < b;
    });

    top_k = std::min(top_k, static_cast<Index>(order.size()));
    std::unordered_map<Index, Index> group_of;  // entity -> group index
    for (Index pos = 0; pos < top_k; ++pos)
        group_of[order[static_cast<std::size_t>(pos)]] = pos / group_size;

    std::vector<graph::Triple> qualifying;
    for (const auto& t : store.test)
        if (group_of.count(t.head) && group_of.count(t.tail)) qualifying.push_back(t);
    if (qualifying.empty()) return {};

    std::vector<Index> ranks = compute_ranks(scorer, qualifying, filter, mode, 1);

    Index n_groups = (top_k + group_size - 1) / group_size;
    std::vector<Index> count(static_cast<std::size_t>(n_groups), 0);
    std::vector<Index> hits(static_cast<std::size_t>(n_groups), 0);
    for (std::size_t i = 0; i < qualifying.size(); ++i) {
        auto g = static_cast<std::size_t>(group_of[qualifying[i].tail]);
        ++count[g];
        if (ranks[i] <= 10) ++hits[g];
    }

    std::vector<DegreeGroupRow> rows;
    for (Index g = 0; g < n_groups; ++g) {
        auto gi = static_cast<std::size_t>(g);
        double hr = count[gi] > 0 ? static_cast<double>(hits[gi]) / static_cast<double>(count[gi])
                                  : 0.0;
        rows.push_back({g, count[gi], hr});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<SweepRow> sweep(SweepKind kind, const std::vector<double>& values,
                            const train::TrainConfig& base, const graph::TripleStore& store,
                            int threads) {
    if (values.empty()) fail(ErrorCode::invalid_argument, "sweep: empty value list");
    if (store.augmented)
        fail(ErrorCode::state, "sweep takes the un-augmented store; augmentation happens inside");

    for (double v : values) {
        switch (kind) {
            case SweepKind::curvature:
                if (!(v > 0.0)) fail(ErrorCode::invalid_argument, "curvature values must be positive");
                break;
            case SweepKind::mu:
                if (!(v >= 0.0 && v <= 1.0))
                    fail(ErrorCode::invalid_argument, "mu values must lie in [0, 1]");
                break;
            case SweepKind::robustness:
                if (!(v >= 0.0 && v <= 1.0))
                    fail(ErrorCode::invalid_argument, "poison fractions must lie in [0, 1]");
                break;
        }
    }

    std::vector<SweepRow> rows;
    switch (kind) {
        case SweepKind::curvature: {
            if (base.kind == train::ModelKind::tucker)
                fail(ErrorCode::invalid_argument,
                     "curvature sweep needs a hyperbolic model kind (tptf or migtf)");
            graph::TripleStore aug = graph::augment_inverse(store);
            graph::FilterIndex filter(aug);
            for (double beta : values) {
                train::TrainConfig cfg = base;
                cfg.beta = beta;
                train::TrainResult r = train::train(cfg, aug);
                auto scorer = make_scorer(r.final);
                MetricsReport m = evaluate_split(*scorer, aug, Split::test, filter,
                                                 RankMode::optimistic, threads);
                rows.push_back({beta, m.mrr, m.hr.at(10)});
            }
            break;
        }
        case SweepKind::mu: {
            if (base.kind != train::ModelKind::migtf)
                fail(ErrorCode::invalid_argument, "mu sweep requires the migtf model kind");
            graph::TripleStore aug = graph::augment_inverse(store);
            graph::FilterIndex filter(aug);
            train::TrainResult r = train::train(base, aug);
            models::MigTfModel model = train::migtf_from_checkpoint(r.final);
            for (double mu : values) {
                MigTfScorer scorer(model, mu);
                MetricsReport m =
                    evaluate_split(scorer, aug, Split::test, filter, RankMode::optimistic, threads);
                rows.push_back({mu, m.mrr, m.hr.at(10)});
            }
            break;
        }
        case SweepKind::robustness: {
            for (double alpha : values) {
                graph::TripleStore poisoned = graph::poison(store, alpha, base.seed);
                graph::TripleStore aug = graph::augment_inverse(poisoned);
                graph::FilterIndex filter(aug);
                train::TrainResult r = train::train(base, aug);
                auto scorer = make_scorer(r.final);
                MetricsReport m = evaluate_split(*scorer, aug, Split::test, filter,
                                                 RankMode::optimistic, threads);
                rows.push_back({alpha, m.mrr, m.hr.at(10)});
            }
            break;
        }
    }
    return rows;
}

}  // namespace migtf::eval
