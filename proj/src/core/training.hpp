#pragma once
// AdamW optimization, manual backpropagation over the three model kinds,
// finite-difference gradient verification, the training loops (with the
// frozen-Euclidean contract for MIG-TF), and the checkpoint format.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dense.hpp"
#include "graph_data.hpp"
#include "models.hpp"
#include "tucker.hpp"

namespace migtf::train {

enum class ModelKind { tucker, tptf, migtf };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct AdamWConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

struct ParamRef {
    double* data;
    Index size;
};

// Decoupled-weight-decay Adam with bias correction:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   theta <- theta - lr*(m_hat/(sqrt(v_hat)+eps) + wd*theta)
class AdamWState {
public:
    AdamWState(const std::vector<Index>& sizes, AdamWConfig config);

    void step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
              double lr_scale = 1.0);

    Index step_count() const { return step_; }
    const AdamWConfig& config() const { return config_; }

private:
    std::vector<std::vector<double>> m_, v_;
    AdamWConfig config_;
    Index step_ = 0;
};

struct TrainConfig {
    ModelKind kind = ModelKind::tucker;
    Index d_e = 200, d_r = 30, d_h = 50;
    double beta = 1.0;
    double mu = 0.5;
    bool qr = false;
    double lr = 0.001;
    double weight_decay = 0.0;
    double lr_decay = 1.0;  // per-epoch multiplicative factor
    Index epochs = 100;
    Index batch_size = 128;
    Index valid_every = 10;
    tucker::DropoutSpec dropout;          // Tucker sites 1..3
    double dropout_e = 0.0, dropout_r = 0.0;  // TPTF sites
    double rho_e = 0.001, rho_r = 0.001;      // TPTF init stddevs
    double label_smoothing = 0.0;
    std::uint64_t seed = 42;
    std::string tucker_checkpoint;  // required for migtf

    void validate() const;
};

struct TensorRecord {
    std::string name;
    std::vector<Index> shape;
    std::vector<float> data;  // little-endian f32 on disk
};

struct Checkpoint {
    std::string model_kind;
    Index n_e = 0, n_r = 0, d_e = 0, d_r = 0, d_h = 0;
    double beta = 1.0;
    double mu = 0.5;
    bool qr = false;
    std::uint64_t vocab_hash = 0;
    std::uint64_t seed = 0;
    Index epoch = 0;
    std::vector<TensorRecord> tensors;

    const TensorRecord& tensor(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint tucker_to_checkpoint(const tucker::TuckerParams& params, std::uint64_t vocab_hash,
                                std::uint64_t seed, Index epoch);
Checkpoint tptf_to_checkpoint(const models::TptfParams& params, std::uint64_t vocab_hash,
                              std::uint64_t seed, Index epoch);
Checkpoint migtf_to_checkpoint(const models::MigTfModel& model, std::uint64_t vocab_hash,
                               std::uint64_t seed, Index epoch);
tucker::TuckerParams tucker_from_checkpoint(const Checkpoint& ckpt);
models::TptfParams tptf_from_checkpoint(const Checkpoint& ckpt);
models::MigTfModel migtf_from_checkpoint(const Checkpoint& ckpt);

// One training step's gradients for the trainable tensors of a model kind.
struct Gradients {
    tucker::TuckerGrads* tucker = nullptr;  // null when frozen/absent
    models::TptfGrads* tptf = nullptr;
};

struct EpochLog {
    Index epoch;
    double train_loss;
    double valid_mrr;  // NaN when not validated this epoch
    bool has_valid;
};

struct TrainResult {
    Checkpoint final;
    Checkpoint best;  // highest validation MRR seen (== final when never validated)
    double best_valid_mrr;
    std::vector<EpochLog> log;
};

// Requires an inverse-augmented store. Deterministic per seed (single thread).
TrainResult train(const TrainConfig& config, const graph::TripleStore& store);

void write_training_log_csv(std::ostream& out, const std::vector<EpochLog>& log);

// Builds a toy model + batch for the given kind and compares the analytic
// backward against central finite differences (h = 1e-5) on every trainable
// entry; returns the worst relative error. with_dropout exercises the mask
// chain by replaying the identical RNG stream around each probe.
double gradient_check(ModelKind kind, double beta, std::uint64_t seed,
                      bool with_dropout = false);

}  // namespace migtf::train
