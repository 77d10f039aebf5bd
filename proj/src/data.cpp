#include "wordbound/train/data.hpp"

#include "wordbound/errors.hpp"

namespace wordbound::train {

PreparedSequence prepare_line(const std::string& line, const Vocabulary& vocab,
                              boundary::BoundarySchema schema, int seq_len,
                              boundary::WbPlacement placement) {
    Encoding enc = encode(line, vocab);
    if (schema == boundary::BoundarySchema::WBTokens) {
        enc = boundary::insert_wb_tokens(enc, vocab, placement);
    }
    Encoding wrapped;
    wrapped.push(kClsId, std::string(kSpecialTokens[kClsId]), kNoWord);
    for (size_t i = 0; i < enc.size(); ++i) {
        wrapped.push(enc.token_ids[i], enc.token_strings[i], enc.word_ids[i]);
    }
    wrapped.push(kSepId, std::string(kSpecialTokens[kSepId]), kNoWord);

    auto ann = boundary::annotate(wrapped);
    PreparedSequence seq;
    size_t n = std::min(wrapped.size(), static_cast<size_t>(seq_len));
    seq.ids.reserve(n);
    seq.wb_index.reserve(n);
    seq.boundary_label.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        seq.ids.push_back(wrapped.token_ids[i]);
        seq.boundary_label.push_back(ann.binary[i]);
        switch (schema) {
            case boundary::BoundarySchema::Binary:
                seq.wb_index.push_back(ann.binary[i]);
                break;
            case boundary::BoundarySchema::WordIndex:
                seq.wb_index.push_back(ann.word_index[i]);
                break;
            case boundary::BoundarySchema::SubwordIndex:
                seq.wb_index.push_back(ann.subword_index[i]);
                break;
            case boundary::BoundarySchema::None:
            case boundary::BoundarySchema::WBTokens:
                seq.wb_index.push_back(0);
                break;
        }
    }
    return seq;
}

std::vector<PreparedSequence> prepare_lines(const std::vector<std::string>& lines,
                                            const Vocabulary& vocab,
                                            boundary::BoundarySchema schema, int seq_len) {
    std::vector<PreparedSequence> out;
    for (const auto& line : lines) {
        PreparedSequence seq = prepare_line(line, vocab, schema, seq_len);
        if (seq.ids.size() > 2) {  // more than bare [CLS][SEP]
            out.push_back(std::move(seq));
        }
    }
    return out;
}

nn::Batch assemble_batch(const std::vector<PreparedSequence>& seqs, const std::vector<int>& pick,
                         const nn::ModelConfig& config) {
    if (pick.empty()) {
        throw EmptyInput("batch needs at least one sequence");
    }
    size_t max_len = 0;
    for (int idx : pick) {
        max_len = std::max(max_len, seqs[static_cast<size_t>(idx)].ids.size());
    }
    nn::Batch b;
    b.batch = static_cast<int>(pick.size());
    b.seq = static_cast<int>(max_len);
    size_t n = b.flat();
    b.token_ids.assign(n, kPadId);
    b.pad_mask.assign(n, 0);
    b.target_ids.assign(n, kPadId);
    b.mask_positions.assign(n, 0);
    b.boundary_targets.assign(n, 0);
    if (config.wb_rows() > 0) {
        b.wb_indices.assign(n, 0);
    }
    for (size_t bi = 0; bi < pick.size(); ++bi) {
        const auto& seq = seqs[static_cast<size_t>(pick[bi])];
        for (size_t s = 0; s < seq.ids.size(); ++s) {
            size_t i = bi * max_len + s;
            b.token_ids[i] = seq.ids[s];
            b.target_ids[i] = seq.ids[s];
            b.pad_mask[i] = 1;
            b.boundary_targets[i] = seq.boundary_label[s];
            if (!b.wb_indices.empty()) {
                b.wb_indices[i] = seq.wb_index[s];
            }
        }
    }
    return b;
}

void split_train_eval(size_t n, int k, std::vector<int>& train, std::vector<int>& eval) {
    train.clear();
    eval.clear();
    for (size_t i = 0; i < n; ++i) {
        if (k > 0 && (i % static_cast<size_t>(k)) == static_cast<size_t>(k - 1)) {
            eval.push_back(static_cast<int>(i));
        } else {
            train.push_back(static_cast<int>(i));
        }
    }
}

}  // namespace wordbound::train
