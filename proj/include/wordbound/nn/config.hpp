#pragma once

#include "wordbound/boundary.hpp"
#include "wordbound/errors.hpp"

namespace wordbound::nn {

using boundary::BoundarySchema;

struct ModelConfig {
    int n_layers = 2;
    int n_heads = 4;
    int d_model = 256;
    int d_ff = 0;  // 0 → 4 * d_model
    int vocab_size = 0;
    int max_seq_len = 256;
    BoundarySchema wb_schema = BoundarySchema::None;
    bool implicit_head = false;
    // Boundary-head targets: masked positions only by default, every
    // non-padding position when set.
    bool boundary_head_all_positions = false;
    // WBTokens already carries boundary information in-band, so pairing it
    // with the implicit head is rejected unless explicitly requested.
    bool allow_wb_tokens_with_implicit = false;

    int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }

    // Rows of the boundary embedding table: index 0 is reserved for special
    // tokens in every schema.
    int wb_rows() const {
        switch (wb_schema) {
            case BoundarySchema::Binary: return 3;
            case BoundarySchema::WordIndex: return boundary::kMaxWordIndex + 1;
            case BoundarySchema::SubwordIndex: return boundary::kMaxSubwordIndex + 1;
            case BoundarySchema::None:
            case BoundarySchema::WBTokens: return 0;
        }
        return 0;
    }

    void validate() const {
        if (n_layers < 1 || n_heads < 1 || d_model < 1 || vocab_size < 1 || max_seq_len < 1) {
            throw InvalidConfig("layer/head/dim/vocab/seq sizes must be positive");
        }
        if (d_model % n_heads != 0) {
            throw InvalidConfig("d_model (" + std::to_string(d_model) +
                                ") must be divisible by n_heads (" + std::to_string(n_heads) +
                                ")");
        }
        if (d_ff < 0) {
            throw InvalidConfig("d_ff must be non-negative (0 selects 4*d_model)");
        }
        if (wb_schema == BoundarySchema::WBTokens && implicit_head &&
            !allow_wb_tokens_with_implicit) {
            throw InvalidConfig(
                "wb-tokens schema with the implicit head must be explicitly allowed");
        }
    }

    long long param_count() const {
        long long d = d_model;
        long long ff = ff_dim();
        long long v = vocab_size;
        long long per_layer = 4 * (d * d + d)       // q, k, v, o projections
                              + d * ff + ff          // ff in
                              + ff * d + d           // ff out
                              + 4 * d;               // two layer norms
        long long total = v * d                      // token embeddings
                          + static_cast<long long>(max_seq_len) * d  // positions
                          + static_cast<long long>(wb_rows()) * d    // boundary table
                          + n_layers * per_layer + 2 * d             // final layer norm
                          + d * v + v;                               // token head
        if (implicit_head) {
            total += d * 3 + 3;  // boundary head
        }
        return total;
    }
};

}  // namespace wordbound::nn
