#pragma once
// Run configuration: a flat JSON key namespace with per-(dataset, model)
// defaults baked in, file values overriding defaults and command-line pairs
// overriding the file. Unknown keys and type mismatches are hard errors that
// name the offending key.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "training.hpp"

namespace migtf::config {

struct RunConfig {
    std::string dataset;       // dataset directory
    std::string dataset_name;  // normalized benchmark name, derived when empty
    std::string model = "tucker";
    std::string out_dir;
    std::uint64_t seed = 42;
    int threads = 1;

    Index d_e = 200, d_r = 30, d_h = 50;
    double beta = 1.0, mu = 0.5;
    bool qr = false;
    double lr = 0.001, weight_decay = 0.0, lr_decay = 1.0;
    Index epochs = 100, batch_size = 128, valid_every = 10;
    double dropout1 = 0.0, dropout2 = 0.0, dropout3 = 0.0;
    double dropout_e = 0.0, dropout_r = 0.0;
    double rho_e = 0.001, rho_r = 0.001;
    double label_smoothing = 0.0;
    std::string tucker_checkpoint;
    std::string model_path;  // checkpoint to evaluate/analyze
    std::string eval_split = "test";
    std::string rank_mode = "optimistic";

    Index top_k = 20, group_size = 5;
    double grid_min = -2.5, grid_max = 2.5;
    Index grid_steps = 101;
    std::string landscape_mode = "lorentz";
    std::vector<double> landscape_t = {0.0, 0.0};
    std::vector<double> values;  // sweep values

    nlohmann::json to_json() const;  // fully resolved echo
    train::TrainConfig to_train_config() const;
    eval::RankMode rank_mode_enum() const;
};

// Defaults for the recognized benchmarks (appendix hyperparameter tables),
// keyed by lowercased dataset name and model kind; empty object otherwise.
nlohmann::json dataset_defaults(const std::string& dataset_name, const std::string& model);

// Merge order: struct defaults < dataset defaults < file values < overrides.
RunConfig resolve_config(const nlohmann::json& file_values, const nlohmann::json& overrides);

RunConfig parse_config_file(const std::filesystem::path& path, const nlohmann::json& overrides);

// "key=value" pair for --set; the value is parsed as JSON when possible and
// falls back to a plain string.
nlohmann::json parse_override_pair(const std::string& pair);

}  // namespace migtf::config
