#pragma once

#include <string>
#include <vector>

#include "wordbound/boundary.hpp"
#include "wordbound/nn/model.hpp"
#include "wordbound/tokenizer.hpp"

namespace wordbound::train {

// One tokenised corpus line, [CLS]/[SEP]-wrapped, truncated to seq_len, with
// schema indices and 3-class boundary labels per position.
struct PreparedSequence {
    std::vector<int> ids;
    std::vector<int> wb_index;        // table row per position (0 for specials)
    std::vector<int> boundary_label;  // 0 special, 1 word-initial, 2 internal
};

PreparedSequence prepare_line(const std::string& line, const Vocabulary& vocab,
                              boundary::BoundarySchema schema, int seq_len,
                              boundary::WbPlacement placement = boundary::WbPlacement::Between);

// Empty lines and lines with no pre-tokens are dropped.
std::vector<PreparedSequence> prepare_lines(const std::vector<std::string>& lines,
                                            const Vocabulary& vocab,
                                            boundary::BoundarySchema schema, int seq_len);

// Pads to the longest sequence among the chosen indices (not to seq_len) and
// fills a clean, uncorrupted batch.
nn::Batch assemble_batch(const std::vector<PreparedSequence>& seqs, const std::vector<int>& pick,
                         const nn::ModelConfig& config);

// Deterministic held-out split: every k-th sequence (i % k == k-1) goes to
// eval, the rest to train. Returns index lists.
void split_train_eval(size_t n, int k, std::vector<int>& train, std::vector<int>& eval);

}  // namespace wordbound::train
