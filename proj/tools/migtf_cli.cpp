// Command-line front end. Talks to the engine exclusively through the C API
// of the migtf shared library; config files and --set pairs are merged by
// the library itself.

#include <migtf.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void die(migtf_status status, const std::string& context) {
    std::cerr << "error (" << migtf_status_name(status) << "): " << context << ": "
              << migtf_last_error() << "\n";
    std::exit(static_cast<int>(status));
}

void check(migtf_status status, const std::string& context) {
    if (status != MIGTF_OK) die(status, context);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error (io): cannot read config file " << path << "\n";
        std::exit(MIGTF_ERR_IO);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json build_overrides(const std::vector<std::string>& sets, const std::string& out_dir,
                     long long seed, int threads) {
    json overrides = json::object();
    for (const auto& pair : sets) {
        auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "error (invalid_argument): --set expects key=value, got '" << pair
                      << "'\n";
            std::exit(MIGTF_ERR_INVALID_ARGUMENT);
        }
        std::string key = pair.substr(0, eq);
        std::string raw = pair.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        overrides[key] = value;
    }
    if (!out_dir.empty()) overrides["out_dir"] = out_dir;
    if (seed >= 0) overrides["seed"] = seed;
    if (threads > 0) overrides["threads"] = threads;
    return overrides;
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { migtf_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

json resolve(const std::string& config_path, const json& overrides) {
    std::string file_text = config_path.empty() ? "{}" : read_file(config_path);
    OwnedString resolved;
    check(migtf_resolve_config(file_text.c_str(), overrides.dump().c_str(), &resolved.ptr),
          "resolving configuration");
    return json::parse(resolved.str());
}

std::string out_dir_of(const json& cfg) {
    std::string dir = cfg.value("out_dir", std::string());
    if (dir.empty()) dir = "migtf-out";
    fs::create_directories(dir);
    return dir;
}

void echo_config(const json& cfg, const std::string& dir) {
    std::ofstream out(fs::path(dir) / "resolved_config.json");
    out << cfg.dump(2) << '\n';
}

using DatasetPtr = std::unique_ptr<migtf_dataset, decltype(&migtf_dataset_free)>;
using ModelPtr = std::unique_ptr<migtf_model, decltype(&migtf_model_free)>;

DatasetPtr load_dataset(const json& cfg, bool augment) {
    std::string dir = cfg.value("dataset", std::string());
    if (dir.empty()) {
        std::cerr << "error (invalid_argument): this command needs a 'dataset' path in the "
                     "config (or --set dataset=DIR)\n";
        std::exit(MIGTF_ERR_INVALID_ARGUMENT);
    }
    migtf_dataset* ds = nullptr;
    check(migtf_dataset_load(dir.c_str(), &ds), "loading dataset " + dir);
    DatasetPtr handle(ds, &migtf_dataset_free);
    if (augment) check(migtf_dataset_augment(ds), "adding inverse relations");
    return handle;
}

ModelPtr load_model(const json& cfg) {
    std::string path = cfg.value("model_path", std::string());
    if (path.empty()) {
        std::cerr << "error (invalid_argument): this command needs 'model_path' pointing at a "
                     "checkpoint (--set model_path=FILE)\n";
        std::exit(MIGTF_ERR_INVALID_ARGUMENT);
    }
    migtf_model* m = nullptr;
    check(migtf_model_load(path.c_str(), &m), "loading checkpoint " + path);
    return ModelPtr(m, &migtf_model_free);
}

int cmd_train(const json& cfg) {
    std::string dir = out_dir_of(cfg);
    echo_config(cfg, dir);
    DatasetPtr ds = load_dataset(cfg, true);
    migtf_model* model = nullptr;
    check(migtf_train(ds.get(), cfg.dump().c_str(), dir.c_str(), &model),
          "training " + cfg.value("model", std::string()));
    ModelPtr handle(model, &migtf_model_free);
    std::cout << "training done; checkpoints and training_log.csv in " << dir << "\n";
    return 0;
}

int cmd_eval(const json& cfg) {
    std::string dir = out_dir_of(cfg);
    echo_config(cfg, dir);
    DatasetPtr ds = load_dataset(cfg, true);
    ModelPtr model = load_model(cfg);
    std::string split = cfg.value("eval_split", std::string("test"));
    std::string mode = cfg.value("rank_mode", std::string("optimistic"));
    OwnedString metrics;
    check(migtf_evaluate(model.get(), ds.get(), split.c_str(), mode.c_str(),
                         cfg.value("threads", 1), &metrics.ptr),
          "evaluating " + split + " split");
    json m = json::parse(metrics.str());

    std::ofstream csv(fs::path(dir) / "metrics.csv");
    csv << "metric,value\n";
    csv << "rank_mode," << mode << "\n";
    csv << "split," << split << "\n";
    csv << "evaluated," << m["evaluated"] << "\n";
    csv << "mrr," << m["mrr"] << "\n";
    for (const auto& [k, v] : m["hr"].items()) csv << k << ',' << v << "\n";

    std::cout << "split=" << split << " evaluated=" << m["evaluated"] << " mrr=" << m["mrr"];
    for (const auto& [k, v] : m["hr"].items()) std::cout << ' ' << k << '=' << v;
    std::cout << "\nmetrics.csv written to " << dir << "\n";
    return 0;
}

int cmd_analyze(const std::string& kind, const json& cfg) {
    std::string dir = out_dir_of(cfg);
    echo_config(cfg, dir);

    if (kind == "powerlaw") {
        DatasetPtr ds = load_dataset(cfg, false);
        std::string path = (fs::path(dir) / "degree_stats.csv").string();
        check(migtf_report_degree_stats(ds.get(), path.c_str()), "degree statistics");
        std::cout << path << "\n";
    } else if (kind == "correlation") {
        DatasetPtr ds = load_dataset(cfg, false);
        std::string path = (fs::path(dir) / "relation_correlation.csv").string();
        check(migtf_report_relation_correlation(ds.get(), path.c_str()), "relation correlation");
        std::cout << path << "\n";
    } else if (kind == "per-relation") {
        DatasetPtr ds = load_dataset(cfg, true);
        ModelPtr model = load_model(cfg);
        std::string path = (fs::path(dir) / "per_relation.csv").string();
        check(migtf_report_per_relation(model.get(), ds.get(),
                                        cfg.value("rank_mode", std::string("optimistic")).c_str(),
                                        path.c_str()),
              "per-relation report");
        std::cout << path << "\n";
    } else if (kind == "degree-groups") {
        DatasetPtr ds = load_dataset(cfg, true);
        ModelPtr model = load_model(cfg);
        std::string path = (fs::path(dir) / "degree_groups.csv").string();
        check(migtf_report_degree_groups(model.get(), ds.get(), cfg.value("top_k", 20),
                                         cfg.value("group_size", 5),
                                         cfg.value("rank_mode", std::string("optimistic")).c_str(),
                                         path.c_str()),
              "degree-group report");
        std::cout << path << "\n";
    } else if (kind == "landscape") {
        auto t = cfg.value("landscape_t", std::vector<double>{0.0, 0.0});
        std::string mode = cfg.value("landscape_mode", std::string("lorentz"));
        std::string path = (fs::path(dir) / ("landscape_" + mode + ".csv")).string();
        check(migtf_landscape_grid(t.at(0), t.at(1), cfg.value("grid_min", -2.5),
                                   cfg.value("grid_max", 2.5), cfg.value("grid_steps", 101),
                                   cfg.value("beta", 1.0), mode.c_str(), path.c_str()),
              "landscape grid");
        std::cout << path << "\n";
    } else {
        std::cerr << "error (invalid_argument): unknown analyze kind '" << kind << "'\n";
        return MIGTF_ERR_INVALID_ARGUMENT;
    }
    return 0;
}

int cmd_sweep(const std::string& kind, const json& cfg) {
    std::string dir = out_dir_of(cfg);
    echo_config(cfg, dir);
    DatasetPtr ds = load_dataset(cfg, false);  // sweeps augment internally
    auto values = cfg.value("values", std::vector<double>{});
    if (values.empty()) {
        std::cerr << "error (invalid_argument): sweep needs non-empty 'values' "
                     "(--set values=[1.0,1.3,1.5])\n";
        return MIGTF_ERR_INVALID_ARGUMENT;
    }
    std::string path = (fs::path(dir) / ("sweep_" + kind + ".csv")).string();
    check(migtf_sweep(ds.get(), kind.c_str(), values.data(),
                      static_cast<int64_t>(values.size()), cfg.dump().c_str(),
                      cfg.value("threads", 1), path.c_str()),
          kind + " sweep");
    std::cout << path << "\n";
    return 0;
}

int cmd_gradcheck(const json& cfg) {
    const double tolerance = 1e-4;
    uint64_t seed = cfg.value("seed", 42);
    struct Case {
        const char* kind;
        double beta;
    };
    std::vector<Case> cases = {{"tucker", 1.0}, {"tptf", 1.0},  {"tptf", 1.3},
                               {"tptf", 1.5},   {"migtf", 1.0}, {"migtf", 1.3},
                               {"migtf", 1.5}};
    bool all_ok = true;
    for (const auto& c : cases) {
        double err = 0.0;
        check(migtf_gradcheck(c.kind, c.beta, seed, &err), std::string("gradcheck ") + c.kind);
        bool ok = err <= tolerance;
        all_ok = all_ok && ok;
        std::printf("%-6s beta=%.1f  max_rel_err=%.3e  %s\n", c.kind, c.beta, err,
                    ok ? "PASS" : "FAIL");
    }
    return all_ok ? 0 : MIGTF_ERR_NUMERIC;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-geometry tensor factorization for knowledge-graph link prediction"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    long long seed = -1;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file")->expected(1);
    app.add_option("--set", sets, "override as key=value (repeatable)")->take_all();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads for evaluation");

    auto* train_cmd = app.add_subcommand("train", "train tucker/tptf/migtf on a dataset");
    auto* eval_cmd = app.add_subcommand("eval", "filtered MRR/HR@k of a checkpoint");
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "powerlaw | degree-groups | per-relation | landscape | correlation");
    std::string analyze_kind;
    analyze_cmd->add_option("kind", analyze_kind, "analysis kind")->required();
    auto* sweep_cmd = app.add_subcommand("sweep", "curvature | mu | robustness");
    std::string sweep_kind;
    sweep_cmd->add_option("kind", sweep_kind, "sweep kind")->required();
    auto* gradcheck_cmd =
        app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");

    CLI11_PARSE(app, argc, argv);

    json cfg = resolve(config_path, build_overrides(sets, out_dir, seed, threads));

    if (train_cmd->parsed()) return cmd_train(cfg);
    if (eval_cmd->parsed()) return cmd_eval(cfg);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_kind, cfg);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_kind, cfg);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(cfg);
    return 0;
}
