#pragma once

#include <cmath>

#include "wordbound/nn/model.hpp"
#include "wordbound/rng.hpp"
#include "wordbound/vocabulary.hpp"

namespace wordbound::train {

// Dynamic MLM corruption. Input: a clean batch (token_ids are the originals).
// Per sequence, round(rate · usable) positions (minimum 1) are selected among
// non-special, non-padding tokens; selected positions become 80% [MASK],
// 10% a random non-special token, 10% unchanged. With wb_maskable, [WB]
// counts as usable — it is trivially predictable from context, which is the
// mechanism behind the lower MLM loss of the wb-tokens scheme.
inline nn::Batch dynamic_mask(const nn::Batch& clean, double rate, uint64_t step_seed,
                              int vocab_size, bool wb_maskable = false) {
    if (!(rate > 0.0 && rate < 1.0)) {
        throw InvalidConfig("mask rate must lie in (0, 1)");
    }
    if (vocab_size <= kNumSpecials) {
        throw InvalidConfig("vocabulary holds no maskable tokens");
    }
    nn::Batch out = clean;
    out.target_ids = clean.token_ids;
    out.mask_positions.assign(clean.flat(), 0);
    DetRng rng(step_seed);
    std::vector<int> usable;
    bool any = false;
    for (int b = 0; b < clean.batch; ++b) {
        usable.clear();
        for (int s = 0; s < clean.seq; ++s) {
            size_t i = static_cast<size_t>(b) * clean.seq + s;
            if (!clean.pad_mask[i]) {
                continue;
            }
            int id = clean.token_ids[i];
            bool special = id < kNumSpecials && !(wb_maskable && id == kWbId);
            if (!special) {
                usable.push_back(s);
            }
        }
        if (usable.empty()) {
            continue;
        }
        any = true;
        auto n = static_cast<size_t>(
            std::max<long long>(1, std::llround(rate * static_cast<double>(usable.size()))));
        n = std::min(n, usable.size());
        rng.shuffle(usable);
        for (size_t pick = 0; pick < n; ++pick) {
            size_t i = static_cast<size_t>(b) * clean.seq + usable[pick];
            out.mask_positions[i] = 1;
            double u = rng.uniform();
            if (u < 0.8) {
                out.token_ids[i] = kMaskId;
            } else if (u < 0.9) {
                out.token_ids[i] =
                    kNumSpecials +
                    static_cast<int>(rng.below(static_cast<uint64_t>(vocab_size - kNumSpecials)));
            }  // else unchanged
        }
    }
    if (!any) {
        throw NothingToMask("batch has no maskable positions");
    }
    return out;
}

}  // namespace wordbound::train
