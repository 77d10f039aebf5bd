#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "wordbound/nn/model.hpp"
#include "wordbound/rng.hpp"

namespace wordbound::nn {

struct GradCheckResult {
    double max_rel_err = 0.0;
    int checked = 0;
    std::string worst_tensor;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// A small batch exercising every input pathway of the configured model:
// random ids, a padded tail, ≥1 masked position per sequence, boundary
// indices/labels in range.
inline Batch make_gradcheck_batch(const ModelConfig& config, uint64_t seed, int batch_size = 2,
                                  int seq_len = 6) {
    DetRng rng(mix_seed(seed, 0x67636865636Bull));  // "gcheck"
    Batch b;
    b.batch = batch_size;
    b.seq = std::min(seq_len, config.max_seq_len);
    size_t n = b.flat();
    b.token_ids.resize(n);
    b.pad_mask.assign(n, 1);
    b.target_ids.resize(n);
    b.mask_positions.assign(n, 0);
    b.boundary_targets.assign(n, 0);
    if (config.wb_rows() > 0) {
        b.wb_indices.resize(n);
    }
    for (int s = 0; s < b.seq; ++s) {
        // last sequence gets a padded tail to exercise key masking
        if (batch_size > 1 && s >= b.seq - 2) {
            b.pad_mask[static_cast<size_t>(batch_size - 1) * b.seq + s] = 0;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        b.token_ids[i] = static_cast<int>(rng.below(static_cast<uint64_t>(config.vocab_size)));
        b.target_ids[i] = static_cast<int>(rng.below(static_cast<uint64_t>(config.vocab_size)));
        b.boundary_targets[i] = static_cast<int>(rng.below(3));
        if (!b.wb_indices.empty()) {
            b.wb_indices[i] = static_cast<int>(rng.below(static_cast<uint64_t>(config.wb_rows())));
        }
    }
    for (int bi = 0; bi < batch_size; ++bi) {
        int real = 0;
        for (int s = 0; s < b.seq; ++s) {
            real += b.pad_mask[static_cast<size_t>(bi) * b.seq + s];
        }
        // mask two real positions per sequence
        int m1 = static_cast<int>(rng.below(static_cast<uint64_t>(real)));
        int m2 = static_cast<int>(rng.below(static_cast<uint64_t>(real)));
        b.mask_positions[static_cast<size_t>(bi) * b.seq + m1] = 1;
        b.mask_positions[static_cast<size_t>(bi) * b.seq + m2] = 1;
    }
    return b;
}

// Central finite differences against the analytic backward at double
// precision. Samples ≥ 2 coordinates from every tensor plus a uniform draw up
// to n_coords total.
inline GradCheckResult finite_difference_check(const Batch& batch, const ModelConfig& config,
                                               uint64_t seed, int n_coords = 200,
                                               double eps = 1e-4) {
    Parameters<double> params = init_params<double>(config, seed);
    Parameters<double> grads = make_zero_params<double>(config);
    ForwardCache<double> cache;
    ForwardOutput<double> out = forward(batch, params, config, &cache);
    backward(batch, params, config, out, cache, grads);

    auto prefs = tensor_registry(params);
    auto grefs = tensor_registry(grads);

    struct Coord {
        size_t tensor;
        size_t index;
    };
    std::vector<Coord> coords;
    DetRng rng(mix_seed(seed, 0x636F6F7264ull));  // "coord"
    for (size_t t = 0; t < prefs.size(); ++t) {
        size_t sz = prefs[t].tensor->size();
        for (int pick = 0; pick < 2 && static_cast<size_t>(pick) < sz; ++pick) {
            coords.push_back({t, static_cast<size_t>(rng.below(sz))});
        }
    }
    size_t total = 0;
    for (auto& r : prefs) {
        total += r.tensor->size();
    }
    while (coords.size() < static_cast<size_t>(n_coords)) {
        size_t flat = static_cast<size_t>(rng.below(total));
        for (size_t t = 0; t < prefs.size(); ++t) {
            size_t sz = prefs[t].tensor->size();
            if (flat < sz) {
                coords.push_back({t, flat});
                break;
            }
            flat -= sz;
        }
    }

    GradCheckResult res;
    for (const auto& c : coords) {
        double& slot = prefs[c.tensor].tensor->data[c.index];
        double saved = slot;
        slot = saved + eps;
        ForwardOutput<double> plus = forward(batch, params, config);
        double lp = compute_loss(batch, plus, config).combined;
        slot = saved - eps;
        ForwardOutput<double> minus = forward(batch, params, config);
        double lm = compute_loss(batch, minus, config).combined;
        slot = saved;
        double numeric = (lp - lm) / (2.0 * eps);
        double analytic = grefs[c.tensor].tensor->data[c.index];
        double scale = std::max(std::abs(numeric) + std::abs(analytic), 1e-8);
        double rel = std::abs(numeric - analytic) / scale;
        ++res.checked;
        if (rel > res.max_rel_err) {
            res.max_rel_err = rel;
            res.worst_tensor = prefs[c.tensor].name;
            res.worst_analytic = analytic;
            res.worst_numeric = numeric;
        }
    }
    return res;
}

}  // namespace wordbound::nn
