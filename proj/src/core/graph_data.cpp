#include "graph_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "rng.hpp"

namespace migtf::graph {

namespace {

constexpr const char* kSplitFiles[3] = {"train.txt", "valid.txt", "test.txt"};

std::uint64_t pair_key(Index head, Index relation) {
    return (static_cast<std::uint64_t>(head) << 32) | static_cast<std::uint64_t>(relation);
}

struct VocabBuilder {
    std::unordered_map<std::string, Index> entity_ids;
    std::unordered_map<std::string, Index> relation_ids;
    Vocabulary vocab;

    Index entity(const std::string& name) {
        auto [it, inserted] = entity_ids.try_emplace(name, vocab.n_entities());
        if (inserted) vocab.entity_names.push_back(name);
        return it->second;
    }
    Index relation(const std::string& name) {
        auto [it, inserted] = relation_ids.try_emplace(name, vocab.n_relations());
        if (inserted) vocab.relation_names.push_back(name);
        return it->second;
    }
};

struct RawTriple {
    std::string head, relation, tail;
};

std::vector<RawTriple> read_split(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorCode::io, "dataset file missing or unreadable: " + file.string());

    std::vector<RawTriple> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        auto tab3 = tab2 == std::string::npos ? std::string::npos : line.find('\t', tab2 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos || tab3 != std::string::npos)
            fail(ErrorCode::parse, file.string() + ":" + std::to_string(line_no) +
                                       ": expected 3 tab-separated fields");
        out.push_back({line.substr(0, tab1), line.substr(tab1 + 1, tab2 - tab1 - 1),
                       line.substr(tab2 + 1)});
    }
    return out;
}

}  // namespace

TripleStore load_dataset(const std::filesystem::path& directory) {
    std::vector<RawTriple> raw[3];
    for (int s = 0; s < 3; ++s) raw[s] = read_split(directory / kSplitFiles[s]);

    VocabBuilder builder;
    TripleStore store;
    std::vector<Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (int s = 0; s < 3; ++s) {
        splits[s]->reserve(raw[s].size());
        for (const auto& r : raw[s])
            splits[s]->push_back(
                {builder.entity(r.head), builder.relation(r.relation), builder.entity(r.tail)});
    }
    store.vocab = std::move(builder.vocab);
    store.original_relation_count = store.n_relations();
    return store;
}

void save_dataset(const TripleStore& store, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    const std::vector<Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (int s = 0; s < 3; ++s) {
        std::ofstream out(directory / kSplitFiles[s]);
        if (!out) fail(ErrorCode::io, "cannot write " + (directory / kSplitFiles[s]).string());
        for (const auto& t : *splits[s])
            out << store.vocab.entity_names[t.head] << '\t' << store.vocab.relation_names[t.relation]
                << '\t' << store.vocab.entity_names[t.tail] << '\n';
    }
}

TripleStore augment_inverse(const TripleStore& store) {
    if (store.augmented) fail(ErrorCode::state, "store already augmented with inverse relations");

    TripleStore out = store;
    Index n_r = store.n_relations();
    out.vocab.relation_names.reserve(2 * n_r);
    for (Index r = 0; r < n_r; ++r)
        out.vocab.relation_names.push_back(store.vocab.relation_names[r] + "_reverse");

    const std::vector<Triple>* src[3] = {&store.train, &store.valid, &store.test};
    std::vector<Triple>* dst[3] = {&out.train, &out.valid, &out.test};
    for (int s = 0; s < 3; ++s) {
        dst[s]->reserve(2 * src[s]->size());
        for (const auto& t : *src[s]) dst[s]->push_back({t.tail, t.relation + n_r, t.head});
    }
    out.augmented = true;
    out.original_relation_count = n_r;
    return out;
}

FilterIndex::FilterIndex(const TripleStore& store) {
    const std::vector<Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (const auto* split : splits)
        for (const auto& t : *split) map_[pair_key(t.head, t.relation)].push_back(t.tail);
    for (auto& [key, tails] : map_) {
        std::sort(tails.begin(), tails.end());
        tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
    }
}

const std::vector<Index>& FilterIndex::tails(Index head, Index relation) const {
    auto it = map_.find(pair_key(head, relation));
    return it == map_.end() ? empty_ : it->second;
}

Vector QueryBatch::labels_for(Index query_idx) const {
    Vector y = Vector::Constant(n_entities, label_smoothing / static_cast<double>(n_entities));
    for (Index t : true_tails[static_cast<std::size_t>(query_idx)]) y[t] = 1.0 - label_smoothing;
    return y;
}

std::vector<QueryBatch> make_batches(const TripleStore& store, Index batch_size,
                                     double label_smoothing, std::uint64_t seed) {
    if (batch_size < 1) fail(ErrorCode::invalid_argument, "batch_size must be >= 1");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
        fail(ErrorCode::invalid_argument, "label_smoothing must be in [0, 1)");
    if (store.train.empty()) fail(ErrorCode::invalid_argument, "train split is empty");

    // distinct (head, relation) in first-appearance order, with train tails
    std::unordered_map<std::uint64_t, std::size_t> slot;
    std::vector<std::pair<Index, Index>> queries;
    std::vector<std::vector<Index>> tails;
    for (const auto& t : store.train) {
        auto [it, inserted] = slot.try_emplace(pair_key(t.head, t.relation), queries.size());
        if (inserted) {
            queries.emplace_back(t.head, t.relation);
            tails.emplace_back();
        }
        tails[it->second].push_back(t.tail);
    }
    for (auto& ts : tails) {
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }

    std::vector<std::size_t> order(queries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<QueryBatch> batches;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        QueryBatch b;
        b.label_smoothing = label_smoothing;
        b.n_entities = store.n_entities();
        std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        for (std::size_t i = start; i < end; ++i) {
            b.queries.push_back(queries[order[i]]);
            b.true_tails.push_back(tails[order[i]]);
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

TripleStore poison(const TripleStore& store, double alpha, std::uint64_t seed) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        fail(ErrorCode::invalid_argument, "poison fraction alpha must be in [0, 1]");

    TripleStore out = store;
    auto n_add = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(store.train.size())));
    if (n_add == 0) return out;

    Index n_e = store.n_entities();
    Index n_r = store.n_relations();
    auto key = [&](const Triple& t) {
        return (static_cast<std::uint64_t>(t.head) * static_cast<std::uint64_t>(n_r) +
                static_cast<std::uint64_t>(t.relation)) *
                   static_cast<std::uint64_t>(n_e) +
               static_cast<std::uint64_t>(t.tail);
    };
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(store.train.size() + n_add);
    for (const auto& t : store.train) seen.insert(key(t));

    Rng rng(seed);
    for (std::size_t added = 0; added < n_add;) {
        Triple t{static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_e))),
                 static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_r))),
                 static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_e)))};
        if (seen.insert(key(t)).second) {
            out.train.push_back(t);
            ++added;
        }
    }
    return out;
}

std::vector<std::pair<Index, Index>> degree_stats(const TripleStore& store) {
    Index cutoff = store.augmented ? store.original_relation_count : store.n_relations();
    std::vector<Index> count(static_cast<std::size_t>(store.n_entities()), 0);
    const std::vector<Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (const auto* split : splits)
        for (const auto& t : *split) {
            if (t.relation >= cutoff) continue;
            ++count[static_cast<std::size_t>(t.head)];
            ++count[static_cast<std::size_t>(t.tail)];
        }

    std::vector<std::pair<Index, Index>> out;
    out.reserve(count.size());
    for (std::size_t e = 0; e < count.size(); ++e) out.emplace_back(static_cast<Index>(e), count[e]);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

Matrix relation_correlation(const TripleStore& store) {
    Index n_r = store.n_relations();
    Index n_e = store.n_entities();
    Matrix incidence = Matrix::Zero(n_r, n_e);
    const std::vector<Triple>* splits[3] = {&store.train, &store.valid, &store.test};
    for (const auto* split : splits)
        for (const auto& t : *split) {
            incidence(t.relation, t.head) += 1.0;
            incidence(t.relation, t.tail) += 1.0;
        }

    Vector mean = incidence.rowwise().mean();
    Matrix centered = incidence.colwise() - mean;
    Vector norm = centered.rowwise().norm();

    Matrix corr = Matrix::Identity(n_r, n_r);
    for (Index i = 0; i < n_r; ++i) {
        for (Index j = i + 1; j < n_r; ++j) {
            double c = 0.0;
            if (norm[i] > 0.0 && norm[j] > 0.0)
                c = centered.row(i).dot(centered.row(j)) / (norm[i] * norm[j]);
            corr(i, j) = c;
            corr(j, i) = c;
        }
    }
    return corr;
}

std::uint64_t vocab_hash(const Vocabulary& vocab) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0x1f;  // separator
        h *= 1099511628211ull;
    };
    for (const auto& s : vocab.entity_names) mix(s);
    h ^= 0x2f;
    h *= 1099511628211ull;
    for (const auto& s : vocab.relation_names) mix(s);
    return h;
}

}  // namespace migtf::graph
