#pragma once
// Dataset ingestion and graph-side machinery: vocabulary construction,
// inverse-relation augmentation, filtered-candidate indexing, 1-N query
// batching, train-split poisoning, and structural statistics.

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dense.hpp"

namespace migtf::graph {

struct Triple {
    Index head;
    Index relation;
    Index tail;

    bool operator==(const Triple&) const = default;
};

struct Vocabulary {
    std::vector<std::string> entity_names;
    std::vector<std::string> relation_names;

    Index n_entities() const { return static_cast<Index>(entity_names.size()); }
    Index n_relations() const { return static_cast<Index>(relation_names.size()); }
};

struct TripleStore {
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
    Vocabulary vocab;
    bool augmented = false;
    Index original_relation_count = 0;  // relation count before augmentation

    Index n_entities() const { return vocab.n_entities(); }
    Index n_relations() const { return vocab.n_relations(); }
    Index total_triples() const {
        return static_cast<Index>(train.size() + valid.size() + test.size());
    }
};

// (head, relation) -> all true tails over train + valid + test.
class FilterIndex {
public:
    explicit FilterIndex(const TripleStore& store);

    // Sorted unique tails; empty when the pair never occurs.
    const std::vector<Index>& tails(Index head, Index relation) const;

private:
    std::unordered_map<std::uint64_t, std::vector<Index>> map_;
    std::vector<Index> empty_;
};

// One training batch of distinct (head, relation) queries with their true
// train tails. Dense label vectors are materialized on demand.
struct QueryBatch {
    std::vector<std::pair<Index, Index>> queries;
    std::vector<std::vector<Index>> true_tails;  // sorted, per query
    double label_smoothing = 0.0;
    Index n_entities = 0;

    Index size() const { return static_cast<Index>(queries.size()); }

    // (1 - smoothing) at true tails, smoothing / n_entities elsewhere.
    Vector labels_for(Index query_idx) const;
};

TripleStore load_dataset(const std::filesystem::path& directory);
void save_dataset(const TripleStore& store, const std::filesystem::path& directory);

// Adds (t, r + n_r, h) for every (h, r, t), per split; relation count doubles.
// Calling twice is a state error.
TripleStore augment_inverse(const TripleStore& store);

std::vector<QueryBatch> make_batches(const TripleStore& store, Index batch_size,
                                     double label_smoothing, std::uint64_t seed);

// Adds floor(alpha * |train|) uniformly random triples to the train split,
// re-drawing collisions with existing train triples. valid/test untouched.
TripleStore poison(const TripleStore& store, double alpha, std::uint64_t seed);

// Undirected degree per entity over all splits, descending. Counts only the
// original-direction relations when the store was augmented, so values match
// the pre-augmentation graph either way.
std::vector<std::pair<Index, Index>> degree_stats(const TripleStore& store);

// Pearson correlation between per-relation entity-incidence count vectors.
// Diagonal is 1; zero-variance incidence rows correlate 0 off-diagonal.
Matrix relation_correlation(const TripleStore& store);

// FNV-1a over entity then relation names; ties checkpoints to a vocabulary.
std::uint64_t vocab_hash(const Vocabulary& vocab);

}  // namespace migtf::graph
