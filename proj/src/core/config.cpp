#include "config.hpp"

#include <algorithm>
#include <fstream>

namespace migtf::config {

using nlohmann::json;

namespace {

enum class KeyType { string, number, integer, boolean, number_or_array };

// The complete flat key namespace; anything else is rejected by name.
const std::vector<std::pair<std::string, KeyType>> kKeys = {
    {"dataset", KeyType::string},
    {"dataset_name", KeyType::string},
    {"model", KeyType::string},
    {"out_dir", KeyType::string},
    {"seed", KeyType::integer},
    {"threads", KeyType::integer},
    {"d_e", KeyType::integer},
    {"d_r", KeyType::integer},
    {"d_h", KeyType::integer},
    {"beta", KeyType::number},
    {"mu", KeyType::number},
    {"qr", KeyType::boolean},
    {"lr", KeyType::number},
    {"weight_decay", KeyType::number},
    {"lr_decay", KeyType::number},
    {"epochs", KeyType::integer},
    {"batch_size", KeyType::integer},
    {"valid_every", KeyType::integer},
    {"dropout1", KeyType::number},
    {"dropout2", KeyType::number},
    {"dropout3", KeyType::number},
    {"dropout_e", KeyType::number},
    {"dropout_r", KeyType::number},
    {"rho_e", KeyType::number},
    {"rho_r", KeyType::number},
    {"label_smoothing", KeyType::number},
    {"tucker_checkpoint", KeyType::string},
    {"model_path", KeyType::string},
    {"eval_split", KeyType::string},
    {"rank_mode", KeyType::string},
    {"top_k", KeyType::integer},
    {"group_size", KeyType::integer},
    {"grid_min", KeyType::number},
    {"grid_max", KeyType::number},
    {"grid_steps", KeyType::integer},
    {"landscape_mode", KeyType::string},
    {"landscape_t", KeyType::number_or_array},
    {"values", KeyType::number_or_array},
};

const KeyType* key_type(const std::string& key) {
    for (const auto& [name, type] : kKeys)
        if (name == key) return &type;
    return nullptr;
}

void check_value(const std::string& key, KeyType type, const json& v) {
    bool ok = false;
    switch (type) {
        case KeyType::string: ok = v.is_string(); break;
        case KeyType::number: ok = v.is_number(); break;
        case KeyType::integer: ok = v.is_number_integer(); break;
        case KeyType::boolean: ok = v.is_boolean(); break;
        case KeyType::number_or_array:
            ok = v.is_number() ||
                 (v.is_array() && std::all_of(v.begin(), v.end(),
                                              [](const json& x) { return x.is_number(); }));
            break;
    }
    if (!ok)
        fail(ErrorCode::invalid_argument,
             "config key '" + key + "': value " + v.dump() + " has the wrong type");
}

json validate_flat(const json& obj, const char* what) {
    if (!obj.is_object())
        fail(ErrorCode::invalid_argument, std::string(what) + " must be a flat JSON object");
    for (const auto& [key, value] : obj.items()) {
        const KeyType* type = key_type(key);
        if (type == nullptr)
            fail(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
        check_value(key, *type, value);
    }
    return obj;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<double> as_values(const json& v) {
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
}

}  // namespace

json dataset_defaults(const std::string& dataset_name, const std::string& model) {
    std::string name = lower(dataset_name);
    json d = json::object();

    if (model == "tucker" || model == "migtf") {
        if (name == "wn18rr") {
            d.update({{"d_e", 200}, {"d_r", 30}});
        } else if (name == "fb15k-237") {
            d.update({{"d_e", 200}, {"d_r", 200}});
        } else if (name == "yago3-10") {
            d.update({{"d_e", 200}, {"d_r", 30}});
        }
    }
    if (model == "tucker") {
        if (name == "wn18rr") {
            d.update({{"lr", 0.01},
                      {"epochs", 500},
                      {"dropout1", 0.2},
                      {"dropout2", 0.2},
                      {"dropout3", 0.3}});
        } else if (name == "fb15k-237") {
            d.update({{"lr", 0.001},
                      {"epochs", 500},
                      {"dropout1", 0.3},
                      {"dropout2", 0.4},
                      {"dropout3", 0.5}});
        } else if (name == "yago3-10") {
            d.update({{"lr", 0.003},
                      {"epochs", 500},
                      {"dropout1", 0.2},
                      {"dropout2", 0.2},
                      {"dropout3", 0.2}});
        }
    } else if (model == "tptf") {
        if (name == "wn18rr") {
            d.update({{"d_h", 50}, {"lr", 0.003}, {"beta", 1.3}, {"epochs", 250},
                      {"rho_e", 0.005}, {"rho_r", 0.005}, {"dropout_e", 0.2}, {"dropout_r", 0.2}});
        } else if (name == "fb15k-237") {
            d.update({{"d_h", 50}, {"lr", 0.002}, {"beta", 1.0}, {"epochs", 150},
                      {"rho_e", 0.001}, {"rho_r", 0.001}, {"dropout_e", 0.3}, {"dropout_r", 0.3}});
        } else if (name == "yago3-10") {
            d.update({{"d_h", 50}, {"lr", 0.005}, {"beta", 1.1}, {"epochs", 250},
                      {"rho_e", 0.001}, {"rho_r", 0.001}, {"dropout_e", 0.2}, {"dropout_r", 0.2}});
        }
    } else if (model == "migtf") {
        if (name == "wn18rr") {
            d.update({{"d_h", 50}, {"lr", 0.003}, {"beta", 1.5}, {"epochs", 250},
                      {"rho_e", 0.005}, {"rho_r", 0.005}, {"dropout_e", 0.2}, {"dropout_r", 0.2}});
        } else if (name == "fb15k-237") {
            d.update({{"d_h", 50}, {"lr", 0.001}, {"beta", 1.0}, {"epochs", 100},
                      {"rho_e", 0.001}, {"rho_r", 0.001}, {"dropout_e", 0.3}, {"dropout_r", 0.3}});
        } else if (name == "yago3-10") {
            d.update({{"d_h", 50}, {"lr", 0.005}, {"beta", 1.1}, {"epochs", 150},
                      {"rho_e", 0.001}, {"rho_r", 0.001}, {"dropout_e", 0.2}, {"dropout_r", 0.2}});
        }
    }
    return d;
}

RunConfig resolve_config(const json& file_values, const json& overrides) {
    json file = validate_flat(file_values, "config file");
    json over = validate_flat(overrides.is_null() ? json::object() : overrides, "overrides");

    json merged = file;
    merged.update(over);

    std::string model = merged.value("model", std::string("tucker"));
    std::string name = merged.value("dataset_name", std::string());
    if (name.empty() && merged.contains("dataset"))
        name = std::filesystem::path(merged["dataset"].get<std::string>()).filename().string();
    name = lower(name);

    json final_values = dataset_defaults(name, model);
    final_values.update(merged);

    RunConfig c;
    c.dataset_name = name;
    auto get = [&](const char* key, auto& field) {
        if (final_values.contains(key)) field = final_values[key].template get<std::decay_t<decltype(field)>>();
    };
    get("dataset", c.dataset);
    get("model", c.model);
    get("out_dir", c.out_dir);
    get("seed", c.seed);
    get("threads", c.threads);
    get("d_e", c.d_e);
    get("d_r", c.d_r);
    get("d_h", c.d_h);
    get("beta", c.beta);
    get("mu", c.mu);
    get("qr", c.qr);
    get("lr", c.lr);
    get("weight_decay", c.weight_decay);
    get("lr_decay", c.lr_decay);
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("valid_every", c.valid_every);
    get("dropout1", c.dropout1);
    get("dropout2", c.dropout2);
    get("dropout3", c.dropout3);
    get("dropout_e", c.dropout_e);
    get("dropout_r", c.dropout_r);
    get("rho_e", c.rho_e);
    get("rho_r", c.rho_r);
    get("label_smoothing", c.label_smoothing);
    get("tucker_checkpoint", c.tucker_checkpoint);
    get("model_path", c.model_path);
    get("eval_split", c.eval_split);
    get("rank_mode", c.rank_mode);
    get("top_k", c.top_k);
    get("group_size", c.group_size);
    get("grid_min", c.grid_min);
    get("grid_max", c.grid_max);
    get("grid_steps", c.grid_steps);
    get("landscape_mode", c.landscape_mode);
    if (final_values.contains("landscape_t")) {
        auto t = as_values(final_values["landscape_t"]);
        if (t.size() == 1) t = {t[0], t[0]};
        if (t.size() != 2)
            fail(ErrorCode::invalid_argument, "config key 'landscape_t': expected 1 or 2 numbers");
        c.landscape_t = t;
    }
    if (final_values.contains("values")) c.values = as_values(final_values["values"]);

    if (c.model != "tucker" && c.model != "tptf" && c.model != "migtf")
        fail(ErrorCode::invalid_argument, "config key 'model': must be tucker, tptf or migtf");
    if (c.eval_split != "valid" && c.eval_split != "test")
        fail(ErrorCode::invalid_argument, "config key 'eval_split': must be valid or test");
    if (c.rank_mode != "optimistic" && c.rank_mode != "pessimistic")
        fail(ErrorCode::invalid_argument, "config key 'rank_mode': must be optimistic or pessimistic");
    if (c.landscape_mode != "lorentz" && c.landscape_mode != "geodesic")
        fail(ErrorCode::invalid_argument,
             "config key 'landscape_mode': must be lorentz or geodesic");
    if (c.threads < 1) fail(ErrorCode::invalid_argument, "config key 'threads': must be >= 1");
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& path, const json& overrides) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "config file missing or unreadable: " + path.string());
    json file;
    try {
        in >> file;
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, "config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return resolve_config(file, overrides);
}

json parse_override_pair(const std::string& pair) {
    auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
        fail(ErrorCode::invalid_argument, "override must look like key=value, got '" + pair + "'");
    std::string key = pair.substr(0, eq);
    std::string raw = pair.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // plain string
    json out = json::object();
    out[key] = value;
    return out;
}

nlohmann::json RunConfig::to_json() const {
    return json{{"dataset", dataset},
                {"dataset_name", dataset_name},
                {"model", model},
                {"out_dir", out_dir},
                {"seed", seed},
                {"threads", threads},
                {"d_e", d_e},
                {"d_r", d_r},
                {"d_h", d_h},
                {"beta", beta},
                {"mu", mu},
                {"qr", qr},
                {"lr", lr},
                {"weight_decay", weight_decay},
                {"lr_decay", lr_decay},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"valid_every", valid_every},
                {"dropout1", dropout1},
                {"dropout2", dropout2},
                {"dropout3", dropout3},
                {"dropout_e", dropout_e},
                {"dropout_r", dropout_r},
                {"rho_e", rho_e},
                {"rho_r", rho_r},
                {"label_smoothing", label_smoothing},
                {"tucker_checkpoint", tucker_checkpoint},
                {"model_path", model_path},
                {"eval_split", eval_split},
                {"rank_mode", rank_mode},
                {"top_k", top_k},
                {"group_size", group_size},
                {"grid_min", grid_min},
                {"grid_max", grid_max},
                {"grid_steps", grid_steps},
                {"landscape_mode", landscape_mode},
                {"landscape_t", landscape_t},
                {"values", values}};
}

train::TrainConfig RunConfig::to_train_config() const {
    train::TrainConfig t;
    t.kind = train::model_kind_from_name(model);
    t.d_e = d_e;
    t.d_r = d_r;
    t.d_h = d_h;
    t.beta = beta;
    t.mu = mu;
    t.qr = qr;
    t.lr = lr;
    t.weight_decay = weight_decay;
    t.lr_decay = lr_decay;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.valid_every = valid_every;
    t.dropout = {dropout1, dropout2, dropout3};
    t.dropout_e = dropout_e;
    t.dropout_r = dropout_r;
    t.rho_e = rho_e;
    t.rho_r = rho_r;
    t.label_smoothing = label_smoothing;
    t.seed = seed;
    t.tucker_checkpoint = tucker_checkpoint;
    return t;
}

eval::RankMode RunConfig::rank_mode_enum() const {
    return rank_mode == "pessimistic" ? eval::RankMode::pessimistic : eval::RankMode::optimistic;
}

}  // namespace migtf::config
