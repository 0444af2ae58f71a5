#pragma once
// Shared helpers for the test suites: scratch directories, toy datasets and
// tiny stores built directly from integer triples.

#include <unistd.h>

#include <array>
#include <atomic>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "graph_data.hpp"

namespace testutil {

inline bool same_bits(const migtf::Matrix& a, const migtf::Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

inline bool same_bits(const migtf::Vector& a, const migtf::Vector& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

namespace fs = std::filesystem;

inline fs::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    fs::path dir = fs::temp_directory_path() /
                   ("migtf_test_" + tag + "_" + std::to_string(counter++) + "_" +
                    std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Writes the three split files from (head, relation, tail) name rows.
using NameTriple = std::array<std::string, 3>;

inline void write_split(const fs::path& file, const std::vector<NameTriple>& rows) {
    std::ofstream out(file);
    for (const auto& r : rows) out << r[0] << '\t' << r[1] << '\t' << r[2] << '\n';
}

inline fs::path write_dataset(const std::string& tag, const std::vector<NameTriple>& train,
                              const std::vector<NameTriple>& valid = {},
                              const std::vector<NameTriple>& test = {}) {
    fs::path dir = scratch_dir(tag);
    write_split(dir / "train.txt", train);
    write_split(dir / "valid.txt", valid);
    write_split(dir / "test.txt", test);
    return dir;
}

// Builds a store straight from integer triples (entities/relations named by
// index), sidestepping file I/O.
inline migtf::graph::TripleStore make_store(migtf::Index n_e, migtf::Index n_r,
                                            const std::vector<migtf::graph::Triple>& train,
                                            const std::vector<migtf::graph::Triple>& valid = {},
                                            const std::vector<migtf::graph::Triple>& test = {}) {
    migtf::graph::TripleStore s;
    for (migtf::Index e = 0; e < n_e; ++e) s.vocab.entity_names.push_back("e" + std::to_string(e));
    for (migtf::Index r = 0; r < n_r; ++r)
        s.vocab.relation_names.push_back("r" + std::to_string(r));
    s.train = train;
    s.valid = valid;
    s.test = test;
    s.original_relation_count = n_r;
    return s;
}

// Symmetric 5-cycle, 10 triples: the memorization task of the test suite.
inline migtf::graph::TripleStore symmetric_cycle_store() {
    std::vector<migtf::graph::Triple> train;
    for (migtf::Index i = 0; i < 5; ++i) {
        migtf::Index j = (i + 1) % 5;
        train.push_back({i, 0, j});
        train.push_back({j, 0, i});
    }
    return make_store(5, 1, train);
}

}  // namespace testutil
