#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wordbound/nn/model.hpp"
#include "wordbound/train/data.hpp"
#include "wordbound/vocabulary.hpp"

namespace wordbound::train {

struct TrainConfig {
    int batch_size = 16;
    long long total_steps = 300;
    long long warmup_steps = -1;  // negative → round(warmup_fraction · total_steps)
    double warmup_fraction = 0.06;
    double peak_lr = 1e-4;
    int seq_len = 256;
    double mask_rate = 0.15;
    uint64_t seed = 0;
    long long eval_every = 50;
    long long checkpoint_every = 100;
    double weight_decay = 0.01;
    bool grad_clip = false;     // global-norm 1.0 when on
    bool wb_maskable = true;    // [WB] participates in masking (wb-tokens scheme)
    int eval_split_k = 10;      // every k-th sequence held out for eval

    long long effective_warmup() const;
    void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& tc);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EvalMetrics {
    double loss = 0.0;       // combined loss over all eval masked positions
    double token_loss = 0.0;
    double token_acc = 0.0;
    double boundary_acc = -1.0;  // -1 when the implicit head is off
};

struct PretrainResult {
    double initial_train_loss = 0.0;       // combined loss at the first step run
    double final_train_loss = 0.0;         // mean combined over the last 10% of steps
    double mean_token_loss_last100 = 0.0;  // train token loss, last ≤100 steps
    std::optional<EvalMetrics> final_eval;
    std::string metrics_path;
    std::string final_checkpoint_path;
    long long steps_run = 0;
};

// Full training run: writes metrics.tsv and checkpoint-<step>.ckpt files into
// out_dir. Deterministic for fixed (corpus, vocab, configs): batch order,
// masking, and all written bytes depend only on the seed and step indices.
PretrainResult pretrain(const std::vector<std::string>& corpus, const Vocabulary& vocab,
                        const nn::ModelConfig& model_config, const TrainConfig& train_config,
                        const std::string& out_dir);

// Continues a run from a checkpoint (parameters, optimizer moments, and step
// all restored); appends to out_dir/metrics.tsv. Identical bytes to an
// uninterrupted run over the same steps.
PretrainResult resume_pretrain(const std::string& checkpoint_path,
                               const std::vector<std::string>& corpus, const Vocabulary& vocab,
                               const std::string& out_dir);

// Recomputes the eval metrics a checkpoint's step would have logged.
std::optional<EvalMetrics> replay_eval(const std::string& checkpoint_path,
                                       const std::vector<std::string>& corpus,
                                       const Vocabulary& vocab);

}  // namespace wordbound::train
