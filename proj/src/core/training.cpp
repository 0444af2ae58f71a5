#include "training.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

#include "evaluation.hpp"
#include "lorentz.hpp"

namespace migtf::train {

using nlohmann::json;

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::tucker: return "tucker";
        case ModelKind::tptf: return "tptf";
        case ModelKind::migtf: return "migtf";
    }
    return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "tucker") return ModelKind::tucker;
    if (name == "tptf") return ModelKind::tptf;
    if (name == "migtf") return ModelKind::migtf;
    fail(ErrorCode::invalid_argument, "unknown model kind: " + name);
}

// ---------------------------------------------------------------------------
// AdamW

AdamWState::AdamWState(const std::vector<Index>& sizes, AdamWConfig config)
    : config_(config) {
    for (Index s : sizes) {
        m_.emplace_back(static_cast<std::size_t>(s), 0.0);
        v_.emplace_back(static_cast<std::size_t>(s), 0.0);
    }
}

void AdamWState::step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
                      double lr_scale) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        fail(ErrorCode::shape, "adamw_step: tensor count mismatch");
    ++step_;
    double b1 = config_.beta1, b2 = config_.beta2;
    double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    double lr = config_.lr * lr_scale;
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size != static_cast<Index>(m_[t].size()) || grads[t].size != params[t].size)
            fail(ErrorCode::shape, "adamw_step: tensor size mismatch");
        double* p = params[t].data;
        const double* g = grads[t].data;
        double* m = m_[t].data();
        double* v = v_[t].data();
        for (Index i = 0; i < params[t].size; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            double m_hat = m[i] / bc1;
            double v_hat = v[i] / bc2;
            p[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.eps) + config_.weight_decay * p[i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
    if (epochs < 1) fail(ErrorCode::invalid_argument, "epochs must be positive");
    if (batch_size < 1) fail(ErrorCode::invalid_argument, "batch_size must be positive");
    if (valid_every < 1) fail(ErrorCode::invalid_argument, "valid_every must be positive");
    if (!(lr > 0.0)) fail(ErrorCode::invalid_argument, "lr must be positive");
    if (!(beta > 0.0)) fail(ErrorCode::invalid_argument, "beta must be positive");
    if (!(mu >= 0.0 && mu <= 1.0)) fail(ErrorCode::invalid_argument, "mu must be in [0, 1]");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
        fail(ErrorCode::invalid_argument, "label_smoothing must be in [0, 1)");
    dropout.validate();
    if (kind == ModelKind::tucker || kind == ModelKind::migtf) {
        if (d_e < 1 || d_r < 1) fail(ErrorCode::invalid_argument, "d_e/d_r must be positive");
    }
    if (kind == ModelKind::tptf || kind == ModelKind::migtf) {
        if (d_h < 1) fail(ErrorCode::invalid_argument, "d_h must be positive");
    }
    if (kind == ModelKind::migtf && tucker_checkpoint.empty())
        fail(ErrorCode::invalid_argument,
             "migtf training requires a pretrained (frozen) tucker_checkpoint");
}

// ---------------------------------------------------------------------------
// Checkpoint format: "MIGTF1\n", u32 LE header length, JSON header, then raw
// little-endian f32 tensor payloads in header order.

namespace {

constexpr char kMagic[7] = {'M', 'I', 'G', 'T', 'F', '1', '\n'};

std::string hash_to_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hash_from_hex(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

Index tensor_elems(const TensorRecord& t) {
    Index n = 1;
    for (Index d : t.shape) n *= d;
    return n;
}

// Known tensor names must agree with the header dims.
void validate_consistency(const Checkpoint& c) {
    auto expect = [&](const std::string& name, Index r, Index cols) {
        for (const auto& t : c.tensors) {
            if (t.name != name) continue;
            bool ok = (t.shape.size() == 2 && t.shape[0] == r && t.shape[1] == cols);
            if (!ok)
                fail(ErrorCode::state, "checkpoint integrity: tensor '" + name +
                                           "' shape disagrees with header dims");
        }
    };
    expect("entities", c.n_e, c.model_kind == "tptf" ? c.d_h : c.d_e);
    expect("relations", c.n_r, c.model_kind == "tptf" ? c.d_h : c.d_r);
    expect("tucker_entities", c.n_e, c.d_e);
    expect("tucker_relations", c.n_r, c.d_r);
    expect("tptf_entities", c.n_e, c.d_h);
    expect("tptf_relations", c.n_r, c.d_h);
    for (const auto& t : c.tensors) {
        if (t.name == "core" || t.name == "tucker_core") {
            bool ok = (t.shape.size() == 3 && t.shape[0] == c.d_e && t.shape[1] == c.d_e &&
                       t.shape[2] == c.d_r);
            if (!ok)
                fail(ErrorCode::state,
                     "checkpoint integrity: core tensor shape disagrees with header dims");
        }
        if (tensor_elems(t) != static_cast<Index>(t.data.size()))
            fail(ErrorCode::state, "checkpoint integrity: tensor '" + t.name +
                                       "' payload size disagrees with its shape");
    }
}

}  // namespace

const TensorRecord& Checkpoint::tensor(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t;
    fail(ErrorCode::not_found, "checkpoint has no tensor named '" + name + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    validate_consistency(ckpt);

    json header;
    header["model"] = ckpt.model_kind;
    header["n_e"] = ckpt.n_e;
    header["n_r"] = ckpt.n_r;
    header["d_e"] = ckpt.d_e;
    header["d_r"] = ckpt.d_r;
    header["d_h"] = ckpt.d_h;
    header["beta"] = ckpt.beta;
    header["mu"] = ckpt.mu;
    header["qr"] = ckpt.qr;
    header["vocab_hash"] = hash_to_hex(ckpt.vocab_hash);
    header["seed"] = ckpt.seed;
    header["epoch"] = ckpt.epoch;
    json tensors = json::array();
    std::uint64_t offset = 0;
    for (const auto& t : ckpt.tensors) {
        tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
        offset += t.data.size() * sizeof(float);
    }
    header["tensors"] = std::move(tensors);
    std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof kMagic);
    auto len = static_cast<std::uint32_t>(header_str.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& t : ckpt.tensors)
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!out) fail(ErrorCode::io, "checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open checkpoint: " + path.string());

    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        fail(ErrorCode::parse, "not a MIGTF checkpoint (bad magic): " + path.string());

    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in) fail(ErrorCode::parse, "truncated checkpoint header: " + path.string());
    std::string header_str(len, '\0');
    in.read(header_str.data(), len);
    if (!in) fail(ErrorCode::parse, "truncated checkpoint header: " + path.string());

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("checkpoint header is not valid JSON: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.model_kind = header.at("model").get<std::string>();
        ckpt.n_e = header.at("n_e").get<Index>();
        ckpt.n_r = header.at("n_r").get<Index>();
        ckpt.d_e = header.at("d_e").get<Index>();
        ckpt.d_r = header.at("d_r").get<Index>();
        ckpt.d_h = header.at("d_h").get<Index>();
        ckpt.beta = header.at("beta").get<double>();
        ckpt.mu = header.at("mu").get<double>();
        ckpt.qr = header.at("qr").get<bool>();
        ckpt.vocab_hash = hash_from_hex(header.at("vocab_hash").get<std::string>());
        ckpt.seed = header.at("seed").get<std::uint64_t>();
        ckpt.epoch = header.at("epoch").get<Index>();
        std::uint64_t expected_offset = 0;
        for (const auto& jt : header.at("tensors")) {
            TensorRecord t;
            t.name = jt.at("name").get<std::string>();
            t.shape = jt.at("shape").get<std::vector<Index>>();
            if (jt.at("offset").get<std::uint64_t>() != expected_offset)
                fail(ErrorCode::state, "checkpoint integrity: non-contiguous tensor offsets");
            t.data.resize(static_cast<std::size_t>(tensor_elems(t)));
            in.read(reinterpret_cast<char*>(t.data.data()),
                    static_cast<std::streamsize>(t.data.size() * sizeof(float)));
            if (!in)
                fail(ErrorCode::state,
                     "checkpoint integrity: truncated payload for tensor '" + t.name + "'");
            expected_offset += t.data.size() * sizeof(float);
            ckpt.tensors.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("malformed checkpoint header: ") + e.what());
    }
    if (in.peek() != std::ifstream::traits_type::eof())
        fail(ErrorCode::state, "checkpoint integrity: trailing bytes after payload");

    validate_consistency(ckpt);
    return ckpt;
}

// ---------------------------------------------------------------------------
// Model <-> checkpoint conversion (f32 on disk, f64 in memory)

namespace {

std::vector<float> to_f32(const double* data, Index n) {
    std::vector<float> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(data[i]);
    return out;
}

Matrix matrix_from_record(const TensorRecord& t) {
    if (t.shape.size() != 2)
        fail(ErrorCode::shape, "tensor '" + t.name + "' is not a matrix");
    Matrix m(t.shape[0], t.shape[1]);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(t.data[static_cast<std::size_t>(i)]);
    return m;
}

Tensor3 tensor3_from_record(const TensorRecord& t) {
    if (t.shape.size() != 3)
        fail(ErrorCode::shape, "tensor '" + t.name + "' is not an order-3 tensor");
    Tensor3 g(t.shape[0], t.shape[1], t.shape[2]);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = static_cast<double>(t.data[static_cast<std::size_t>(i)]);
    return g;
}

TensorRecord record(const std::string& name, const Matrix& m) {
    return TensorRecord{name, {m.rows(), m.cols()}, to_f32(m.data(), m.size())};
}

TensorRecord record(const std::string& name, const Tensor3& g) {
    return TensorRecord{name, {g.dim(0), g.dim(1), g.dim(2)}, to_f32(g.data(), g.size())};
}

}  // namespace

Checkpoint tucker_to_checkpoint(const tucker::TuckerParams& params, std::uint64_t vocab_hash,
                                std::uint64_t seed, Index epoch) {
    Checkpoint c;
    c.model_kind = "tucker";
    c.n_e = params.n_entities();
    c.n_r = params.n_relations();
    c.d_e = params.d_e();
    c.d_r = params.d_r();
    c.vocab_hash = vocab_hash;
    c.seed = seed;
    c.epoch = epoch;
    c.tensors.push_back(record("entities", params.entities));
    c.tensors.push_back(record("relations", params.relations));
    c.tensors.push_back(record("core", params.core));
    return c;
}

Checkpoint tptf_to_checkpoint(const models::TptfParams& params, std::uint64_t vocab_hash,
                              std::uint64_t seed, Index epoch) {
    Checkpoint c;
    c.model_kind = "tptf";
    c.n_e = params.n_entities();
    c.n_r = params.n_relations();
    c.d_h = params.d_h();
    c.beta = params.beta;
    c.vocab_hash = vocab_hash;
    c.seed = seed;
    c.epoch = epoch;
    c.tensors.push_back(record("entities", params.entities));
    c.tensors.push_back(record("relations", params.relations));
    return c;
}

Checkpoint migtf_to_checkpoint(const models::MigTfModel& model, std::uint64_t vocab_hash,
                               std::uint64_t seed, Index epoch) {
    Checkpoint c;
    c.model_kind = "migtf";
    c.n_e = model.tucker.n_entities();
    c.n_r = model.tucker.n_relations();
    c.d_e = model.tucker.d_e();
    c.d_r = model.tucker.d_r();
    c.d_h = model.tptf.d_h();
    c.beta = model.tptf.beta;
    c.mu = model.mu;
    c.qr = model.qr_enabled;
    c.vocab_hash = vocab_hash;
    c.seed = seed;
    c.epoch = epoch;
    c.tensors.push_back(record("tucker_entities", model.tucker.entities));
    c.tensors.push_back(record("tucker_relations", model.tucker.relations));
    c.tensors.push_back(record("tucker_core", model.tucker.core));
    c.tensors.push_back(record("tptf_entities", model.tptf.entities));
    c.tensors.push_back(record("tptf_relations", model.tptf.relations));
    return c;
}

tucker::TuckerParams tucker_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "tucker")
        fail(ErrorCode::state, "expected a tucker checkpoint, found " + ckpt.model_kind);
    tucker::TuckerParams p;
    p.entities = matrix_from_record(ckpt.tensor("entities"));
    p.relations = matrix_from_record(ckpt.tensor("relations"));
    p.core = tensor3_from_record(ckpt.tensor("core"));
    return p;
}

models::TptfParams tptf_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "tptf")
        fail(ErrorCode::state, "expected a tptf checkpoint, found " + ckpt.model_kind);
    models::TptfParams p;
    p.entities = matrix_from_record(ckpt.tensor("entities"));
    p.relations = matrix_from_record(ckpt.tensor("relations"));
    p.beta = ckpt.beta;
    return p;
}

models::MigTfModel migtf_from_checkpoint(const Checkpoint& ckpt) {
    if (ckpt.model_kind != "migtf")
        fail(ErrorCode::state, "expected a migtf checkpoint, found " + ckpt.model_kind);
    models::MigTfModel m;
    m.tucker.entities = matrix_from_record(ckpt.tensor("tucker_entities"));
    m.tucker.relations = matrix_from_record(ckpt.tensor("tucker_relations"));
    m.tucker.core = tensor3_from_record(ckpt.tensor("tucker_core"));
    m.tptf.entities = matrix_from_record(ckpt.tensor("tptf_entities"));
    m.tptf.relations = matrix_from_record(ckpt.tensor("tptf_relations"));
    m.tptf.beta = ckpt.beta;
    m.mu = ckpt.mu;
    m.qr_enabled = ckpt.qr;
    return m;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

// Live parameter state for one training run; exactly one member is active.
struct TrainableModel {
    ModelKind kind;
    tucker::TuckerParams tucker;
    models::TptfParams tptf;
    models::MigTfModel migtf;
    tucker::DropoutSpec tucker_dropout;

    bool uses_hyperbolic() const { return kind != ModelKind::tucker; }

    const Matrix& hyperbolic_entities() const {
        return kind == ModelKind::migtf ? migtf.tptf.entities : tptf.entities;
    }
    double hyperbolic_beta() const {
        return kind == ModelKind::migtf ? migtf.tptf.beta : tptf.beta;
    }

    std::vector<ParamRef> trainable() {
        switch (kind) {
            case ModelKind::tucker:
                return {{tucker.entities.data(), tucker.entities.size()},
                        {tucker.relations.data(), tucker.relations.size()},
                        {tucker.core.data(), tucker.core.size()}};
            case ModelKind::tptf:
                return {{tptf.entities.data(), tptf.entities.size()},
                        {tptf.relations.data(), tptf.relations.size()}};
            case ModelKind::migtf:
                return {{migtf.tptf.entities.data(), migtf.tptf.entities.size()},
                        {migtf.tptf.relations.data(), migtf.tptf.relations.size()}};
        }
        fail(ErrorCode::internal, "unreachable");
    }

    Vector forward(Index head, Index rel, const Vector* v_x0, bool training, Rng* rng,
                   tucker::TuckerForwardCache* tc, models::TptfForwardCache* pc,
                   models::MigTfForwardCache* mc) const {
        switch (kind) {
            case ModelKind::tucker:
                return tucker::score_se_batch(tucker, head, rel, tucker_dropout, rng, training, tc);
            case ModelKind::tptf:
                return models::tptf_score_batch(tptf, head, rel, *v_x0, training, rng, pc);
            case ModelKind::migtf:
                return models::migtf_score_batch(migtf, head, rel, *v_x0, training, rng, mc);
        }
        fail(ErrorCode::internal, "unreachable");
    }
};

struct GradBuffers {
    std::unique_ptr<tucker::TuckerGrads> tucker;
    std::unique_ptr<models::TptfGrads> tptf;

    explicit GradBuffers(const TrainableModel& m) {
        if (m.kind == ModelKind::tucker)
            tucker = std::make_unique<tucker::TuckerGrads>(m.tucker);
        else if (m.kind == ModelKind::tptf)
            tptf = std::make_unique<models::TptfGrads>(m.tptf);
        else
            tptf = std::make_unique<models::TptfGrads>(m.migtf.tptf);
    }

    void zero() {
        if (tucker) {
            tucker->entities.setZero();
            tucker->relations.setZero();
            tucker->core.set_zero();
        }
        if (tptf) {
            tptf->entities.setZero();
            tptf->relations.setZero();
        }
    }

    std::vector<ParamRef> refs() {
        if (tucker)
            return {{tucker->entities.data(), tucker->entities.size()},
                    {tucker->relations.data(), tucker->relations.size()},
                    {tucker->core.data(), tucker->core.size()}};
        return {{tptf->entities.data(), tptf->entities.size()},
                {tptf->relations.data(), tptf->relations.size()}};
    }
};

// Forward + loss + backward for one batch; returns the mean query loss.
double run_batch(TrainableModel& model, const graph::QueryBatch& batch, Rng& rng,
                 GradBuffers& grads) {
    grads.zero();
    Vector v_x0;
    const Vector* v_x0_ptr = nullptr;
    if (model.uses_hyperbolic()) {
        v_x0 = lorentz::lift_x0(model.hyperbolic_entities(),
                                lorentz::Curvature(model.hyperbolic_beta()));
        v_x0_ptr = &v_x0;
    }

    double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (Index q = 0; q < batch.size(); ++q) {
        auto [head, rel] = batch.queries[static_cast<std::size_t>(q)];
        Vector labels = batch.labels_for(q);

        tucker::TuckerForwardCache tc;
        models::TptfForwardCache pc;
        models::MigTfForwardCache mc;
        Vector scores = model.forward(head, rel, v_x0_ptr, true, &rng, &tc, &pc, &mc);
        auto [loss, ds] = models::bce_loss(scores, labels);
        total += loss;
        ds *= inv_b;

        switch (model.kind) {
            case ModelKind::tucker:
                tucker::score_se_backward(model.tucker, tc, ds, *grads.tucker);
                break;
            case ModelKind::tptf:
                models::tptf_score_backward(model.tptf, v_x0, pc, ds, *grads.tptf);
                break;
            case ModelKind::migtf:
                models::migtf_score_backward(model.migtf, v_x0, mc, ds, *grads.tptf);
                break;
        }
    }
    return total * inv_b;
}

double validation_mrr(const TrainableModel& model, const graph::TripleStore& store,
                      const graph::FilterIndex& filter) {
    std::unique_ptr<eval::Scorer> scorer;
    switch (model.kind) {
        case ModelKind::tucker:
            scorer = std::make_unique<eval::TuckerScorer>(model.tucker);
            break;
        case ModelKind::tptf:
            scorer = std::make_unique<eval::TptfScorer>(model.tptf);
            break;
        case ModelKind::migtf:
            scorer = std::make_unique<eval::MigTfScorer>(model.migtf);
            break;
    }
    return eval::evaluate_split(*scorer, store, eval::Split::valid, filter).mrr;
}

Checkpoint snapshot(const TrainableModel& model, std::uint64_t vocab_hash, std::uint64_t seed,
                    Index epoch, double mu, bool qr) {
    switch (model.kind) {
        case ModelKind::tucker: return tucker_to_checkpoint(model.tucker, vocab_hash, seed, epoch);
        case ModelKind::tptf: return tptf_to_checkpoint(model.tptf, vocab_hash, seed, epoch);
        case ModelKind::migtf: {
            Checkpoint c = migtf_to_checkpoint(model.migtf, vocab_hash, seed, epoch);
            c.mu = mu;
            c.qr = qr;
            return c;
        }
    }
    fail(ErrorCode::internal, "unreachable");
}

}  // namespace

TrainResult train(const TrainConfig& config, const graph::TripleStore& store) {
    config.validate();
    if (!store.augmented)
        fail(ErrorCode::state, "train expects an inverse-augmented store (call augment_inverse)");

    Index n_e = store.n_entities();
    Index n_r = store.n_relations();
    std::uint64_t vhash = graph::vocab_hash(store.vocab);

    TrainableModel model;
    model.kind = config.kind;
    model.tucker_dropout = config.dropout;
    switch (config.kind) {
        case ModelKind::tucker:
            model.tucker = tucker::init_tucker(n_e, n_r, config.d_e, config.d_r, config.seed);
            break;
        case ModelKind::tptf:
            model.tptf = models::init_tptf(n_e, n_r, config.d_h, config.beta, config.rho_e,
                                           config.rho_r, config.dropout_e, config.dropout_r,
                                           config.seed);
            break;
        case ModelKind::migtf: {
            Checkpoint frozen = load_checkpoint(config.tucker_checkpoint);
            if (frozen.vocab_hash != vhash)
                fail(ErrorCode::state,
                     "vocab hash mismatch between frozen tucker checkpoint and dataset");
            if (frozen.n_e != n_e || frozen.n_r != n_r)
                fail(ErrorCode::shape, "frozen tucker checkpoint dims disagree with dataset");
            model.migtf.tucker = tucker_from_checkpoint(frozen);
            model.migtf.tptf = models::init_tptf(n_e, n_r, config.d_h, config.beta, config.rho_e,
                                                 config.rho_r, config.dropout_e, config.dropout_r,
                                                 config.seed);
            model.migtf.mu = config.mu;
            model.migtf.qr_enabled = config.qr;
            break;
        }
    }

    std::vector<Index> sizes;
    for (const auto& ref : model.trainable()) sizes.push_back(ref.size);
    AdamWConfig adamw{config.lr, 0.9, 0.999, 1e-8, config.weight_decay};
    AdamWState opt(sizes, adamw);

    Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    graph::FilterIndex filter(store);
    GradBuffers grads(model);

    TrainResult result;
    result.best_valid_mrr = -1.0;
    bool have_best = false;

    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        auto batches = graph::make_batches(store, config.batch_size, config.label_smoothing,
                                           config.seed + 1000003ull * static_cast<std::uint64_t>(epoch));
        double lr_scale = std::pow(config.lr_decay, static_cast<double>(epoch));
        double loss_sum = 0.0;
        Index n_queries = 0;
        for (const auto& batch : batches) {
            double batch_loss = run_batch(model, batch, dropout_rng, grads);
            opt.step(model.trainable(), grads.refs(), lr_scale);
            loss_sum += batch_loss * static_cast<double>(batch.size());
            n_queries += batch.size();
        }
        double epoch_loss = loss_sum / static_cast<double>(n_queries);

        bool do_valid = ((epoch + 1) % config.valid_every == 0) || (epoch + 1 == config.epochs);
        double mrr = std::numeric_limits<double>::quiet_NaN();
        if (do_valid && !store.valid.empty()) {
            mrr = validation_mrr(model, store, filter);
            if (mrr > result.best_valid_mrr) {
                result.best_valid_mrr = mrr;
                result.best = snapshot(model, vhash, config.seed, epoch + 1, config.mu, config.qr);
                have_best = true;
            }
        }
        result.log.push_back({epoch + 1, epoch_loss, mrr, do_valid && !store.valid.empty()});
    }

    result.final = snapshot(model, vhash, config.seed, config.epochs, config.mu, config.qr);
    if (!have_best) {
        result.best = result.final;
        result.best_valid_mrr = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

void write_training_log_csv(std::ostream& out, const std::vector<EpochLog>& log) {
    out << "epoch,train_loss,valid_mrr\n";
    for (const auto& row : log) {
        out << row.epoch << ',' << row.train_loss << ',';
        if (row.has_valid) out << row.valid_mrr;
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Gradient verification

namespace {

struct ToyCase {
    TrainableModel model;
    std::vector<std::pair<Index, Index>> queries;
    std::vector<Vector> labels;
    std::uint64_t dropout_seed = 0;
    bool training = false;
};

double toy_loss(const ToyCase& toy) {
    Rng rng(toy.dropout_seed);  // identical mask stream on every evaluation
    Vector v_x0;
    const Vector* v_x0_ptr = nullptr;
    if (toy.model.uses_hyperbolic()) {
        v_x0 = lorentz::lift_x0(toy.model.hyperbolic_entities(),
                                lorentz::Curvature(toy.model.hyperbolic_beta()));
        v_x0_ptr = &v_x0;
    }
    double total = 0.0;
    for (std::size_t q = 0; q < toy.queries.size(); ++q) {
        Vector scores = toy.model.forward(toy.queries[q].first, toy.queries[q].second, v_x0_ptr,
                                          toy.training, &rng, nullptr, nullptr, nullptr);
        total += models::bce_loss(scores, toy.labels[q]).loss;
    }
    return total / static_cast<double>(toy.queries.size());
}

void toy_backward(ToyCase& toy, GradBuffers& grads) {
    Rng rng(toy.dropout_seed);
    grads.zero();
    Vector v_x0;
    const Vector* v_x0_ptr = nullptr;
    if (toy.model.uses_hyperbolic()) {
        v_x0 = lorentz::lift_x0(toy.model.hyperbolic_entities(),
                                lorentz::Curvature(toy.model.hyperbolic_beta()));
        v_x0_ptr = &v_x0;
    }
    double inv_b = 1.0 / static_cast<double>(toy.queries.size());
    for (std::size_t q = 0; q < toy.queries.size(); ++q) {
        tucker::TuckerForwardCache tc;
        models::TptfForwardCache pc;
        models::MigTfForwardCache mc;
        Vector scores = toy.model.forward(toy.queries[q].first, toy.queries[q].second, v_x0_ptr,
                                          toy.training, &rng, &tc, &pc, &mc);
        Vector ds = models::bce_loss(scores, toy.labels[q]).grad * inv_b;
        switch (toy.model.kind) {
            case ModelKind::tucker:
                tucker::score_se_backward(toy.model.tucker, tc, ds, *grads.tucker);
                break;
            case ModelKind::tptf:
                models::tptf_score_backward(toy.model.tptf, v_x0, pc, ds, *grads.tptf);
                break;
            case ModelKind::migtf:
                models::migtf_score_backward(toy.model.migtf, v_x0, mc, ds, *grads.tptf);
                break;
        }
    }
}

}  // namespace

double gradient_check(ModelKind kind, double beta, std::uint64_t seed, bool with_dropout) {
    const Index n_e = 5, n_r = 2, d_e = 3, d_r = 2, d_h = 3;
    Rng rng(seed);

    ToyCase toy;
    toy.model.kind = kind;
    toy.training = with_dropout;
    toy.dropout_seed = seed ^ 0xfeedface12345678ull;
    double drop = with_dropout ? 0.25 : 0.0;
    switch (kind) {
        case ModelKind::tucker:
            toy.model.tucker = tucker::init_tucker(n_e, n_r, d_e, d_r, seed);
            toy.model.tucker_dropout = {drop, drop, drop};
            break;
        case ModelKind::tptf:
            toy.model.tptf = models::init_tptf(n_e, n_r, d_h, beta, 0.5, 0.5, drop, drop, seed);
            break;
        case ModelKind::migtf:
            toy.model.migtf.tucker = tucker::init_tucker(n_e, n_r, d_e, d_r, seed + 7);
            toy.model.migtf.tptf =
                models::init_tptf(n_e, n_r, d_h, beta, 0.5, 0.5, drop, drop, seed);
            toy.model.migtf.mu = 0.5;
            toy.model.migtf.qr_enabled = false;
            break;
    }

    toy.queries = {{0, 0}, {3, 1}};
    for (std::size_t q = 0; q < toy.queries.size(); ++q) {
        Vector y(n_e);
        for (Index i = 0; i < n_e; ++i) y[i] = rng.uniform();
        toy.labels.push_back(std::move(y));
    }

    GradBuffers grads(toy.model);
    toy_backward(toy, grads);

    const double h = 1e-5;
    double worst = 0.0;
    auto params = toy.model.trainable();
    auto grefs = grads.refs();
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (Index i = 0; i < params[t].size; ++i) {
            double saved = params[t].data[i];
            params[t].data[i] = saved + h;
            double lp = toy_loss(toy);
            params[t].data[i] = saved - h;
            double lm = toy_loss(toy);
            params[t].data[i] = saved;
            double fd = (lp - lm) / (2.0 * h);
            double g = grefs[t].data[i];
            double denom = std::max({std::abs(fd), std::abs(g), 1e-8});
            worst = std::max(worst, std::abs(fd - g) / denom);
        }
    }
    return worst;
}

}  // namespace migtf::train
