// extern-C surface of the engine. Exceptions from the core are caught here
// and mapped to status codes; messages land in a thread-local buffer.

#include "migtf.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "../core/config.hpp"
#include "../core/evaluation.hpp"
#include "../core/graph_data.hpp"
#include "../core/lorentz.hpp"
#include "../core/reports.hpp"
#include "../core/training.hpp"

using nlohmann::json;

struct migtf_dataset {
    migtf::graph::TripleStore store;
};

struct migtf_model {
    migtf::train::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

migtf_status map_code(migtf::ErrorCode code) {
    switch (code) {
        case migtf::ErrorCode::ok: return MIGTF_OK;
        case migtf::ErrorCode::invalid_argument: return MIGTF_ERR_INVALID_ARGUMENT;
        case migtf::ErrorCode::io: return MIGTF_ERR_IO;
        case migtf::ErrorCode::parse: return MIGTF_ERR_PARSE;
        case migtf::ErrorCode::state: return MIGTF_ERR_STATE;
        case migtf::ErrorCode::shape: return MIGTF_ERR_SHAPE;
        case migtf::ErrorCode::not_found: return MIGTF_ERR_NOT_FOUND;
        case migtf::ErrorCode::numeric: return MIGTF_ERR_NUMERIC;
        case migtf::ErrorCode::internal: return MIGTF_ERR_INTERNAL;
    }
    return MIGTF_ERR_INTERNAL;
}

template <typename F>
migtf_status guarded(F&& body) {
    try {
        g_last_error.clear();
        body();
        return MIGTF_OK;
    } catch (const migtf::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MIGTF_ERR_INTERNAL;
    }
}

void require(bool ok, const char* message) {
    if (!ok) migtf::fail(migtf::ErrorCode::invalid_argument, message);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_json_arg(const char* text, const char* what) {
    if (text == nullptr || *text == '\0') return json::object();
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        migtf::fail(migtf::ErrorCode::parse, std::string(what) + " is not valid JSON");
    return j;
}

migtf::eval::RankMode rank_mode_arg(const char* mode) {
    if (mode == nullptr || std::strcmp(mode, "optimistic") == 0)
        return migtf::eval::RankMode::optimistic;
    if (std::strcmp(mode, "pessimistic") == 0) return migtf::eval::RankMode::pessimistic;
    migtf::fail(migtf::ErrorCode::invalid_argument,
                "rank_mode must be 'optimistic' or 'pessimistic'");
}

std::ofstream open_csv(const char* path) {
    require(path != nullptr, "csv_path must not be NULL");
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) migtf::fail(migtf::ErrorCode::io, "cannot write " + std::string(path));
    return out;
}

migtf::eval::Split split_arg(const char* split) {
    require(split != nullptr, "split must not be NULL");
    if (std::strcmp(split, "valid") == 0) return migtf::eval::Split::valid;
    if (std::strcmp(split, "test") == 0) return migtf::eval::Split::test;
    migtf::fail(migtf::ErrorCode::invalid_argument, "split must be 'valid' or 'test'");
}

void check_vocab(const migtf_model* model, const migtf_dataset* dataset) {
    if (model->ckpt.vocab_hash != migtf::graph::vocab_hash(dataset->store.vocab))
        migtf::fail(migtf::ErrorCode::state,
                    "model/dataset vocabulary mismatch (checkpoint was trained on different files "
                    "or a different augmentation state)");
}

}  // namespace

extern "C" {

const char* migtf_status_name(migtf_status status) {
    switch (status) {
        case MIGTF_OK: return "ok";
        case MIGTF_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case MIGTF_ERR_IO: return "io";
        case MIGTF_ERR_PARSE: return "parse";
        case MIGTF_ERR_STATE: return "state";
        case MIGTF_ERR_SHAPE: return "shape";
        case MIGTF_ERR_NOT_FOUND: return "not_found";
        case MIGTF_ERR_NUMERIC: return "numeric";
        case MIGTF_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* migtf_last_error(void) { return g_last_error.c_str(); }

void migtf_string_free(char* str) { std::free(str); }

migtf_status migtf_dataset_load(const char* directory, migtf_dataset** out) {
    return guarded([&] {
        require(directory != nullptr && out != nullptr, "directory/out must not be NULL");
        auto* handle = new migtf_dataset{migtf::graph::load_dataset(directory)};
        *out = handle;
    });
}

migtf_status migtf_dataset_augment(migtf_dataset* dataset) {
    return guarded([&] {
        require(dataset != nullptr, "dataset must not be NULL");
        dataset->store = migtf::graph::augment_inverse(dataset->store);
    });
}

migtf_status migtf_dataset_poison(migtf_dataset* dataset, double alpha, uint64_t seed) {
    return guarded([&] {
        require(dataset != nullptr, "dataset must not be NULL");
        dataset->store = migtf::graph::poison(dataset->store, alpha, seed);
    });
}

migtf_status migtf_dataset_info(const migtf_dataset* dataset, char** json_out) {
    return guarded([&] {
        require(dataset != nullptr && json_out != nullptr, "dataset/json_out must not be NULL");
        const auto& s = dataset->store;
        json info{{"n_entities", s.n_entities()},
                  {"n_relations", s.n_relations()},
                  {"n_train", s.train.size()},
                  {"n_valid", s.valid.size()},
                  {"n_test", s.test.size()},
                  {"total_triples", s.total_triples()},
                  {"augmented", s.augmented},
                  {"original_relation_count", s.original_relation_count}};
        *json_out = dup_string(info.dump());
    });
}

migtf_status migtf_dataset_save(const migtf_dataset* dataset, const char* directory) {
    return guarded([&] {
        require(dataset != nullptr && directory != nullptr, "dataset/directory must not be NULL");
        migtf::graph::save_dataset(dataset->store, directory);
    });
}

void migtf_dataset_free(migtf_dataset* dataset) { delete dataset; }

migtf_status migtf_resolve_config(const char* config_json, const char* overrides_json,
                                  char** resolved_json_out) {
    return guarded([&] {
        require(resolved_json_out != nullptr, "resolved_json_out must not be NULL");
        auto cfg = migtf::config::resolve_config(parse_json_arg(config_json, "config"),
                                                 parse_json_arg(overrides_json, "overrides"));
        *resolved_json_out = dup_string(cfg.to_json().dump(2));
    });
}

migtf_status migtf_train(const migtf_dataset* dataset, const char* config_json,
                         const char* out_dir, migtf_model** out) {
    return guarded([&] {
        require(dataset != nullptr && out != nullptr, "dataset/out must not be NULL");
        auto cfg = migtf::config::resolve_config(parse_json_arg(config_json, "config"),
                                                 json::object());
        migtf::train::TrainResult result = migtf::train::train(cfg.to_train_config(),
                                                               dataset->store);
        if (out_dir != nullptr && *out_dir != '\0') {
            std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            migtf::train::save_checkpoint(result.final, dir / "checkpoint_final.migtf");
            migtf::train::save_checkpoint(result.best, dir / "checkpoint_best.migtf");
            std::ofstream log(dir / "training_log.csv");
            migtf::train::write_training_log_csv(log, result.log);
            std::ofstream echo(dir / "resolved_config.json");
            echo << cfg.to_json().dump(2) << '\n';
        }
        *out = new migtf_model{std::move(result.final)};
    });
}

migtf_status migtf_model_load(const char* path, migtf_model** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "path/out must not be NULL");
        *out = new migtf_model{migtf::train::load_checkpoint(path)};
    });
}

migtf_status migtf_model_save(const migtf_model* model, const char* path) {
    return guarded([&] {
        require(model != nullptr && path != nullptr, "model/path must not be NULL");
        migtf::train::save_checkpoint(model->ckpt, path);
    });
}

migtf_status migtf_model_info(const migtf_model* model, char** json_out) {
    return guarded([&] {
        require(model != nullptr && json_out != nullptr, "model/json_out must not be NULL");
        const auto& c = model->ckpt;
        json names = json::array();
        for (const auto& t : c.tensors) names.push_back(t.name);
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.vocab_hash));
        json info{{"model", c.model_kind}, {"n_e", c.n_e},     {"n_r", c.n_r},
                  {"d_e", c.d_e},          {"d_r", c.d_r},     {"d_h", c.d_h},
                  {"beta", c.beta},        {"mu", c.mu},       {"qr", c.qr},
                  {"vocab_hash", hash},    {"seed", c.seed},   {"epoch", c.epoch},
                  {"tensors", names}};
        *json_out = dup_string(info.dump());
    });
}

void migtf_model_free(migtf_model* model) { delete model; }

migtf_status migtf_score_query(const migtf_model* model, int64_t head, int64_t relation,
                               double mu_override, double* scores, int64_t n_scores) {
    return guarded([&] {
        require(model != nullptr && scores != nullptr, "model/scores must not be NULL");
        if (mu_override >= 0.0 && model->ckpt.model_kind != "migtf")
            migtf::fail(migtf::ErrorCode::invalid_argument,
                        "mu_override applies only to migtf models");
        if (n_scores != model->ckpt.n_e)
            migtf::fail(migtf::ErrorCode::shape, "scores buffer must hold n_entities doubles");

        std::unique_ptr<migtf::eval::Scorer> scorer;
        if (model->ckpt.model_kind == "migtf" && mu_override >= 0.0)
            scorer = std::make_unique<migtf::eval::MigTfScorer>(
                migtf::train::migtf_from_checkpoint(model->ckpt), mu_override);
        else
            scorer = migtf::eval::make_scorer(model->ckpt);
        migtf::Vector s = scorer->score(head, relation);
        std::memcpy(scores, s.data(), sizeof(double) * static_cast<std::size_t>(n_scores));
    });
}

migtf_status migtf_evaluate(const migtf_model* model, const migtf_dataset* dataset,
                            const char* split, const char* rank_mode, int threads,
                            char** metrics_json_out) {
    return guarded([&] {
        require(model != nullptr && dataset != nullptr && metrics_json_out != nullptr,
                "model/dataset/metrics_json_out must not be NULL");
        check_vocab(model, dataset);
        auto scorer = migtf::eval::make_scorer(model->ckpt);
        migtf::graph::FilterIndex filter(dataset->store);
        auto report = migtf::eval::evaluate_split(*scorer, dataset->store, split_arg(split),
                                                  filter, rank_mode_arg(rank_mode), threads);
        json hr = json::object();
        for (const auto& [k, rate] : report.hr) hr["hr@" + std::to_string(k)] = rate;
        json per_rel = json::array();
        for (const auto& r : report.per_relation)
            per_rel.push_back({{"relation", r.relation},
                               {"count", r.count},
                               {"kg_links", r.kg_links},
                               {"hr@10", r.hr10}});
        json out{{"split", split},
                 {"evaluated", report.evaluated},
                 {"mrr", report.mrr},
                 {"hr", hr},
                 {"per_relation", per_rel}};
        *metrics_json_out = dup_string(out.dump());
    });
}

migtf_status migtf_report_degree_stats(const migtf_dataset* dataset, const char* csv_path) {
    return guarded([&] {
        require(dataset != nullptr, "dataset must not be NULL");
        auto out = open_csv(csv_path);
        migtf::reports::write_degree_stats_csv(out, dataset->store);
    });
}

migtf_status migtf_report_relation_correlation(const migtf_dataset* dataset,
                                               const char* csv_path) {
    return guarded([&] {
        require(dataset != nullptr, "dataset must not be NULL");
        auto out = open_csv(csv_path);
        migtf::reports::write_relation_correlation_csv(out, dataset->store);
    });
}

migtf_status migtf_report_per_relation(const migtf_model* model, const migtf_dataset* dataset,
                                       const char* rank_mode, const char* csv_path) {
    return guarded([&] {
        require(model != nullptr && dataset != nullptr, "model/dataset must not be NULL");
        check_vocab(model, dataset);
        auto scorer = migtf::eval::make_scorer(model->ckpt);
        migtf::graph::FilterIndex filter(dataset->store);
        auto rows = migtf::eval::per_relation_report(*scorer, dataset->store, filter,
                                                     rank_mode_arg(rank_mode));
        auto out = open_csv(csv_path);
        migtf::reports::write_per_relation_csv(out, rows, dataset->store.vocab);
    });
}

migtf_status migtf_report_degree_groups(const migtf_model* model, const migtf_dataset* dataset,
                                        int64_t top_k, int64_t group_size, const char* rank_mode,
                                        const char* csv_path) {
    return guarded([&] {
        require(model != nullptr && dataset != nullptr, "model/dataset must not be NULL");
        check_vocab(model, dataset);
        auto scorer = migtf::eval::make_scorer(model->ckpt);
        migtf::graph::FilterIndex filter(dataset->store);
        auto rows = migtf::eval::degree_group_report(*scorer, dataset->store, filter, top_k,
                                                     group_size, rank_mode_arg(rank_mode));
        auto out = open_csv(csv_path);
        migtf::reports::write_degree_groups_csv(out, rows);
    });
}

migtf_status migtf_landscape_grid(double t_x, double t_y, double grid_min, double grid_max,
                                  int64_t steps, double beta, const char* mode,
                                  const char* csv_path) {
    return guarded([&] {
        require(mode != nullptr, "mode must not be NULL");
        migtf::lorentz::LandscapeMode m;
        if (std::strcmp(mode, "lorentz") == 0)
            m = migtf::lorentz::LandscapeMode::lorentz;
        else if (std::strcmp(mode, "geodesic") == 0)
            m = migtf::lorentz::LandscapeMode::geodesic;
        else
            migtf::fail(migtf::ErrorCode::invalid_argument,
                        "mode must be 'lorentz' or 'geodesic'");
        migtf::Vector t(2);
        t << t_x, t_y;
        auto grid = migtf::lorentz::landscape_grid(t, grid_min, grid_max, steps,
                                                   migtf::lorentz::Curvature(beta), m);
        auto out = open_csv(csv_path);
        migtf::lorentz::write_landscape_csv(out, grid);
    });
}

migtf_status migtf_sweep(const migtf_dataset* dataset, const char* kind, const double* values,
                         int64_t n_values, const char* config_json, int threads,
                         const char* csv_path) {
    return guarded([&] {
        require(dataset != nullptr && kind != nullptr && values != nullptr,
                "dataset/kind/values must not be NULL");
        require(n_values > 0, "n_values must be positive");

        migtf::eval::SweepKind k;
        std::string value_name;
        if (std::strcmp(kind, "curvature") == 0) {
            k = migtf::eval::SweepKind::curvature;
            value_name = "beta";
        } else if (std::strcmp(kind, "mu") == 0) {
            k = migtf::eval::SweepKind::mu;
            value_name = "mu";
        } else if (std::strcmp(kind, "robustness") == 0) {
            k = migtf::eval::SweepKind::robustness;
            value_name = "alpha";
        } else {
            migtf::fail(migtf::ErrorCode::invalid_argument,
                        "kind must be 'curvature', 'mu' or 'robustness'");
        }

        auto cfg = migtf::config::resolve_config(parse_json_arg(config_json, "config"),
                                                 json::object());
        std::vector<double> vals(values, values + n_values);
        auto rows = migtf::eval::sweep(k, vals, cfg.to_train_config(), dataset->store, threads);
        auto out = open_csv(csv_path);
        migtf::reports::write_sweep_csv(out, rows, value_name);
    });
}

migtf_status migtf_gradcheck(const char* model_kind, double beta, uint64_t seed,
                             double* max_rel_error_out) {
    return guarded([&] {
        require(model_kind != nullptr && max_rel_error_out != nullptr,
                "model_kind/max_rel_error_out must not be NULL");
        auto kind = migtf::train::model_kind_from_name(model_kind);
        *max_rel_error_out = migtf::train::gradient_check(kind, beta, seed);
    });
}

}  // extern "C"
