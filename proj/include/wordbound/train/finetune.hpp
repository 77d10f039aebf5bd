#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordbound/vocabulary.hpp"

namespace wordbound::train {

enum class FinetuneTask { SequenceClassification, TokenClassification };

// Boundary information added at finetune time only, on a schema-free
// (schema None) pretrained model.
enum class WbInjection { None, FtBinary, FtWBTokens };

struct FinetuneConfig {
    int batch_size = 32;
    int seq_len = 128;
    double lr = 2e-5;
    double warmup_fraction = 0.05;
    int epochs = 5;
    FinetuneTask task = FinetuneTask::SequenceClassification;
    WbInjection wb_injection = WbInjection::None;
    bool cls_pooling = false;  // mean pooling over real positions by default
    std::vector<uint64_t> seeds = {1, 2, 3};
    bool remove_outliers = false;  // drop runs > 2 SD from the seed mean
    double weight_decay = 0.01;
};

struct SeedRun {
    uint64_t seed = 0;
    int best_epoch = 0;          // 1-based
    double best_metric = 0.0;    // dev accuracy (sequence) or micro-F1 (token)
    std::vector<double> per_epoch;
};

struct FinetuneReport {
    std::string metric_name;  // "accuracy" or "f1"
    std::vector<SeedRun> runs;
    std::vector<uint64_t> removed_seeds;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over kept runs
};

std::string finetune_report_tsv(const FinetuneReport& report);

// Full-parameter finetuning of a pretrained checkpoint with a fresh
// zero-initialized classification head, one run per seed, best dev epoch per
// run. Sequence data: label<TAB>text per line. Token data: token<TAB>tag per
// line, blank line between sentences.
FinetuneReport finetune(const std::string& checkpoint_path, const Vocabulary& vocab,
                        const std::string& train_path, const std::string& dev_path,
                        const FinetuneConfig& config);

}  // namespace wordbound::train
