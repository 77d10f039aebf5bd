#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wordbound/nn/config.hpp"
#include "wordbound/nn/tensor.hpp"
#include "wordbound/rng.hpp"

namespace wordbound::nn {

inline constexpr double kLnEps = 1e-5;
inline constexpr double kInitStd = 0.02;

template <typename T>
struct LayerParams {
    Matrix<T> ln1_g, ln1_b;      // 1×d
    Matrix<T> wq, wk, wv, wo;    // d×d
    Matrix<T> bq, bk, bv, bo;    // 1×d
    Matrix<T> ln2_g, ln2_b;      // 1×d
    Matrix<T> w1, b1;            // d×ff, 1×ff
    Matrix<T> w2, b2;            // ff×d, 1×d
};

template <typename T>
struct Parameters {
    ModelConfig config;
    Matrix<T> tok_emb;           // V×d
    Matrix<T> pos_emb;           // max_seq_len×d
    Matrix<T> wb_emb;            // wb_rows×d (empty when schema has no table)
    std::vector<LayerParams<T>> layers;
    Matrix<T> lnf_g, lnf_b;      // 1×d
    Matrix<T> head_w, head_b;    // d×V, 1×V
    Matrix<T> bhead_w, bhead_b;  // d×3, 1×3 (implicit head only)
};

enum class InitKind { Normal, Zero, One };

template <typename T>
struct TensorRef {
    std::string name;
    Matrix<T>* tensor;
    bool decay;  // weight decay applies (false for biases and layer norms)
    InitKind init;
};

template <typename T>
std::vector<TensorRef<T>> tensor_registry(Parameters<T>& p) {
    std::vector<TensorRef<T>> refs;
    auto add = [&](std::string name, Matrix<T>& m, bool decay, InitKind init) {
        refs.push_back({std::move(name), &m, decay, init});
    };
    add("tok_emb", p.tok_emb, true, InitKind::Normal);
    add("pos_emb", p.pos_emb, true, InitKind::Normal);
    if (p.config.wb_rows() > 0) {
        add("wb_emb", p.wb_emb, true, InitKind::Normal);
    }
    for (size_t i = 0; i < p.layers.size(); ++i) {
        auto& l = p.layers[i];
        std::string pre = "layers." + std::to_string(i) + ".";
        add(pre + "ln1_g", l.ln1_g, false, InitKind::One);
        add(pre + "ln1_b", l.ln1_b, false, InitKind::Zero);
        add(pre + "wq", l.wq, true, InitKind::Normal);
        add(pre + "bq", l.bq, false, InitKind::Zero);
        add(pre + "wk", l.wk, true, InitKind::Normal);
        add(pre + "bk", l.bk, false, InitKind::Zero);
        add(pre + "wv", l.wv, true, InitKind::Normal);
        add(pre + "bv", l.bv, false, InitKind::Zero);
        add(pre + "wo", l.wo, true, InitKind::Normal);
        add(pre + "bo", l.bo, false, InitKind::Zero);
        add(pre + "ln2_g", l.ln2_g, false, InitKind::One);
        add(pre + "ln2_b", l.ln2_b, false, InitKind::Zero);
        add(pre + "w1", l.w1, true, InitKind::Normal);
        add(pre + "b1", l.b1, false, InitKind::Zero);
        add(pre + "w2", l.w2, true, InitKind::Normal);
        add(pre + "b2", l.b2, false, InitKind::Zero);
    }
    add("lnf_g", p.lnf_g, false, InitKind::One);
    add("lnf_b", p.lnf_b, false, InitKind::Zero);
    add("head_w", p.head_w, true, InitKind::Normal);
    add("head_b", p.head_b, false, InitKind::Zero);
    if (p.config.implicit_head) {
        add("bhead_w", p.bhead_w, true, InitKind::Normal);
        add("bhead_b", p.bhead_b, false, InitKind::Zero);
    }
    return refs;
}

// Shapes allocated, every value zero. Also the gradient buffer.
template <typename T>
Parameters<T> make_zero_params(const ModelConfig& config) {
    config.validate();
    Parameters<T> p;
    p.config = config;
    int d = config.d_model;
    int ff = config.ff_dim();
    p.tok_emb = Matrix<T>(config.vocab_size, d);
    p.pos_emb = Matrix<T>(config.max_seq_len, d);
    if (config.wb_rows() > 0) {
        p.wb_emb = Matrix<T>(config.wb_rows(), d);
    }
    p.layers.resize(static_cast<size_t>(config.n_layers));
    for (auto& l : p.layers) {
        l.ln1_g = Matrix<T>(1, d);
        l.ln1_b = Matrix<T>(1, d);
        l.wq = Matrix<T>(d, d);
        l.wk = Matrix<T>(d, d);
        l.wv = Matrix<T>(d, d);
        l.wo = Matrix<T>(d, d);
        l.bq = Matrix<T>(1, d);
        l.bk = Matrix<T>(1, d);
        l.bv = Matrix<T>(1, d);
        l.bo = Matrix<T>(1, d);
        l.ln2_g = Matrix<T>(1, d);
        l.ln2_b = Matrix<T>(1, d);
        l.w1 = Matrix<T>(d, ff);
        l.b1 = Matrix<T>(1, ff);
        l.w2 = Matrix<T>(ff, d);
        l.b2 = Matrix<T>(1, d);
    }
    p.lnf_g = Matrix<T>(1, d);
    p.lnf_b = Matrix<T>(1, d);
    p.head_w = Matrix<T>(d, config.vocab_size);
    p.head_b = Matrix<T>(1, config.vocab_size);
    if (config.implicit_head) {
        p.bhead_w = Matrix<T>(d, 3);
        p.bhead_b = Matrix<T>(1, 3);
    }
    return p;
}

// Deterministic for a given seed: weights and embeddings N(0, 0.02²) drawn in
// registry order, layer-norm gains 1, all biases 0.
template <typename T>
Parameters<T> init_params(const ModelConfig& config, uint64_t seed) {
    Parameters<T> p = make_zero_params<T>(config);
    DetRng rng(mix_seed(seed, 0x706172616D73ull));  // "params"
    for (auto& ref : tensor_registry(p)) {
        switch (ref.init) {
            case InitKind::Normal:
                for (auto& v : ref.tensor->data) {
                    v = static_cast<T>(rng.normal(0.0, kInitStd));
                }
                break;
            case InitKind::One:
                for (auto& v : ref.tensor->data) {
                    v = T(1);
                }
                break;
            case InitKind::Zero:
                break;
        }
    }
    return p;
}

// One model input: row-major [batch, seq] flattened. wb_indices may be empty
// when the schema has no boundary table. boundary_targets may be empty when
// the implicit head is off.
struct Batch {
    int batch = 0;
    int seq = 0;
    std::vector<int> token_ids;
    std::vector<int> wb_indices;
    std::vector<uint8_t> pad_mask;  // 1 = real token, 0 = padding
    std::vector<int> target_ids;    // pre-corruption ids, read at masked positions
    std::vector<uint8_t> mask_positions;
    std::vector<int> boundary_targets;  // 0 special, 1 word-initial, 2 internal

    size_t flat() const { return static_cast<size_t>(batch) * static_cast<size_t>(seq); }
};

template <typename T>
struct ForwardOutput {
    Matrix<T> hidden;           // (B*S)×d, after the final layer norm
    Matrix<T> token_logits;     // (B*S)×V
    Matrix<T> boundary_logits;  // (B*S)×3, allocated only with the implicit head
};

template <typename T>
struct LayerCache {
    Matrix<T> x_in;
    Matrix<T> xhat1;
    std::vector<T> rstd1;
    Matrix<T> h1;
    Matrix<T> q, k, v;
    Matrix<T> probs;  // (B·H·S)×S, zero at padded keys
    Matrix<T> ctx;
    Matrix<T> x_mid;
    Matrix<T> xhat2;
    std::vector<T> rstd2;
    Matrix<T> h2;
    Matrix<T> u;  // pre-GELU
    Matrix<T> a;  // post-GELU
};

template <typename T>
struct ForwardCache {
    std::vector<LayerCache<T>> layers;
    Matrix<T> x_final;  // before the final layer norm
    Matrix<T> xhatf;
    std::vector<T> rstdf;
};

template <typename T>
void layer_norm(const Matrix<T>& x, const Matrix<T>& g, const Matrix<T>& b, Matrix<T>& xhat,
                std::vector<T>& rstd, Matrix<T>& y) {
    int n = x.cols;
    xhat = Matrix<T>(x.rows, n);
    y = Matrix<T>(x.rows, n);
    rstd.assign(static_cast<size_t>(x.rows), T(0));
    for (int i = 0; i < x.rows; ++i) {
        const T* xr = x.row(i);
        T mean = T(0);
        for (int j = 0; j < n; ++j) {
            mean += xr[j];
        }
        mean /= T(n);
        T var = T(0);
        for (int j = 0; j < n; ++j) {
            T c = xr[j] - mean;
            var += c * c;
        }
        var /= T(n);
        T r = T(1) / std::sqrt(var + T(kLnEps));
        rstd[static_cast<size_t>(i)] = r;
        T* xh = xhat.row(i);
        T* yr = y.row(i);
        const T* gr = g.row(0);
        const T* br = b.row(0);
        for (int j = 0; j < n; ++j) {
            xh[j] = (xr[j] - mean) * r;
            yr[j] = gr[j] * xh[j] + br[j];
        }
    }
}

// Accumulates input gradients into dx and parameter gradients into dg/db.
template <typename T>
void layer_norm_backward(const Matrix<T>& dy, const Matrix<T>& xhat, const std::vector<T>& rstd,
                         const Matrix<T>& g, Matrix<T>& dx, Matrix<T>& dg, Matrix<T>& db) {
    int n = dy.cols;
    const T* gr = g.row(0);
    T* dgr = dg.row(0);
    T* dbr = db.row(0);
    for (int i = 0; i < dy.rows; ++i) {
        const T* dyr = dy.row(i);
        const T* xh = xhat.row(i);
        T* dxr = dx.row(i);
        T m1 = T(0);  // mean of dxhat
        T m2 = T(0);  // mean of dxhat ∘ xhat
        for (int j = 0; j < n; ++j) {
            T dxh = dyr[j] * gr[j];
            m1 += dxh;
            m2 += dxh * xh[j];
        }
        m1 /= T(n);
        m2 /= T(n);
        T r = rstd[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) {
            T dxh = dyr[j] * gr[j];
            dxr[j] += r * (dxh - m1 - xh[j] * m2);
            dgr[j] += dyr[j] * xh[j];
            dbr[j] += dyr[j];
        }
    }
}

template <typename T>
T gelu(T x) {
    return T(0.5) * x * (T(1) + std::erf(x * T(0.70710678118654752440)));
}

template <typename T>
T gelu_grad(T x) {
    return T(0.5) * (T(1) + std::erf(x * T(0.70710678118654752440))) +
           x * std::exp(T(-0.5) * x * x) * T(0.39894228040143267794);
}

// output[i] = tok_emb[id] + pos_emb[pos] (+ wb_emb[idx] for table schemas)
template <typename T>
Matrix<T> embed(const Batch& batch, const Parameters<T>& params, const ModelConfig& config) {
    const bool use_wb = config.wb_rows() > 0;
    if (use_wb && batch.wb_indices.size() != batch.flat()) {
        throw ShapeMismatch("wb_indices missing for a boundary-table schema");
    }
    Matrix<T> x(batch.batch * batch.seq, config.d_model);
    for (int b = 0; b < batch.batch; ++b) {
        for (int s = 0; s < batch.seq; ++s) {
            size_t i = static_cast<size_t>(b) * batch.seq + s;
            int id = batch.token_ids[i];
            if (id < 0 || id >= config.vocab_size) {
                throw IndexOutOfRange("token id " + std::to_string(id) + " outside vocab");
            }
            T* xr = x.row(static_cast<int>(i));
            const T* te = params.tok_emb.row(id);
            const T* pe = params.pos_emb.row(s);
            for (int j = 0; j < config.d_model; ++j) {
                xr[j] = te[j] + pe[j];
            }
            if (use_wb) {
                int w = batch.wb_indices[i];
                if (w < 0 || w >= config.wb_rows()) {
                    throw IndexOutOfRange("wb index " + std::to_string(w) +
                                          " outside boundary table");
                }
                const T* we = params.wb_emb.row(w);
                for (int j = 0; j < config.d_model; ++j) {
                    xr[j] += we[j];
                }
            }
        }
    }
    return x;
}

// Runs the trunk only: embeddings through the final layer norm. The heads on
// top live in forward().
template <typename T>
Matrix<T> forward_hidden(const Batch& batch, const Parameters<T>& params,
                         const ModelConfig& config, ForwardCache<T>* cache = nullptr) {
    config.validate();
    const int B = batch.batch;
    const int S = batch.seq;
    const int d = config.d_model;
    const int H = config.n_heads;
    const int dh = d / H;
    const int ff = config.ff_dim();
    if (B < 1 || S < 1 || S > config.max_seq_len) {
        throw ShapeMismatch("batch " + std::to_string(B) + "×" + std::to_string(S) +
                            " outside [1, max_seq_len=" + std::to_string(config.max_seq_len) +
                            "]");
    }
    if (batch.token_ids.size() != batch.flat() || batch.pad_mask.size() != batch.flat()) {
        throw ShapeMismatch("batch field lengths disagree with batch×seq");
    }
    for (int b = 0; b < B; ++b) {
        bool any = false;
        for (int s = 0; s < S; ++s) {
            any = any || batch.pad_mask[static_cast<size_t>(b) * S + s] != 0;
        }
        if (!any) {
            throw ShapeMismatch("sequence " + std::to_string(b) + " is entirely padding");
        }
    }

    const T inv_sqrt_dh = T(1) / std::sqrt(T(dh));
    ForwardCache<T> local;
    ForwardCache<T>& c = cache ? *cache : local;
    c.layers.resize(static_cast<size_t>(config.n_layers));

    Matrix<T> x = embed(batch, params, config);
    for (int li = 0; li < config.n_layers; ++li) {
        auto& lc = c.layers[static_cast<size_t>(li)];
        const auto& lp = params.layers[static_cast<size_t>(li)];
        lc.x_in = x;
        layer_norm(lc.x_in, lp.ln1_g, lp.ln1_b, lc.xhat1, lc.rstd1, lc.h1);
        lc.q = Matrix<T>(B * S, d);
        lc.k = Matrix<T>(B * S, d);
        lc.v = Matrix<T>(B * S, d);
        linear(lc.h1, lp.wq, lp.bq, lc.q);
        linear(lc.h1, lp.wk, lp.bk, lc.k);
        linear(lc.h1, lp.wv, lp.bv, lc.v);

        lc.probs = Matrix<T>(B * H * S, S);
        lc.ctx = Matrix<T>(B * S, d);
        std::vector<T> scores(static_cast<size_t>(S));
        for (int b = 0; b < B; ++b) {
            for (int h = 0; h < H; ++h) {
                for (int s = 0; s < S; ++s) {
                    const T* qr = lc.q.row(b * S + s) + h * dh;
                    T maxv = T(0);
                    bool first = true;
                    for (int t = 0; t < S; ++t) {
                        if (!batch.pad_mask[static_cast<size_t>(b) * S + t]) {
                            continue;
                        }
                        const T* kr = lc.k.row(b * S + t) + h * dh;
                        T dot = T(0);
                        for (int e = 0; e < dh; ++e) {
                            dot += qr[e] * kr[e];
                        }
                        dot *= inv_sqrt_dh;
                        scores[static_cast<size_t>(t)] = dot;
                        if (first || dot > maxv) {
                            maxv = dot;
                            first = false;
                        }
                    }
                    T denom = T(0);
                    T* pr = lc.probs.row((b * H + h) * S + s);
                    for (int t = 0; t < S; ++t) {
                        if (!batch.pad_mask[static_cast<size_t>(b) * S + t]) {
                            pr[t] = T(0);
                            continue;
                        }
                        T e = std::exp(scores[static_cast<size_t>(t)] - maxv);
                        pr[t] = e;
                        denom += e;
                    }
                    T* cr = lc.ctx.row(b * S + s) + h * dh;
                    for (int e = 0; e < dh; ++e) {
                        cr[e] = T(0);
                    }
                    for (int t = 0; t < S; ++t) {
                        if (pr[t] == T(0)) {
                            continue;
                        }
                        pr[t] /= denom;
                        const T* vr = lc.v.row(b * S + t) + h * dh;
                        for (int e = 0; e < dh; ++e) {
                            cr[e] += pr[t] * vr[e];
                        }
                    }
                }
            }
        }

        lc.x_mid = Matrix<T>(B * S, d);
        linear(lc.ctx, lp.wo, lp.bo, lc.x_mid);
        for (size_t i = 0; i < lc.x_mid.data.size(); ++i) {
            lc.x_mid.data[i] += lc.x_in.data[i];
        }

        layer_norm(lc.x_mid, lp.ln2_g, lp.ln2_b, lc.xhat2, lc.rstd2, lc.h2);
        lc.u = Matrix<T>(B * S, ff);
        linear(lc.h2, lp.w1, lp.b1, lc.u);
        lc.a = Matrix<T>(B * S, ff);
        for (size_t i = 0; i < lc.u.data.size(); ++i) {
            lc.a.data[i] = gelu(lc.u.data[i]);
        }
        x = Matrix<T>(B * S, d);
        linear(lc.a, lp.w2, lp.b2, x);
        for (size_t i = 0; i < x.data.size(); ++i) {
            x.data[i] += lc.x_mid.data[i];
        }
    }

    c.x_final = std::move(x);
    Matrix<T> hidden;
    layer_norm(c.x_final, params.lnf_g, params.lnf_b, c.xhatf, c.rstdf, hidden);
    return hidden;
}

template <typename T>
ForwardOutput<T> forward(const Batch& batch, const Parameters<T>& params,
                         const ModelConfig& config, ForwardCache<T>* cache = nullptr) {
    ForwardOutput<T> out;
    out.hidden = forward_hidden(batch, params, config, cache);
    out.token_logits = Matrix<T>(batch.batch * batch.seq, config.vocab_size);
    linear(out.hidden, params.head_w, params.head_b, out.token_logits);
    if (config.implicit_head) {
        out.boundary_logits = Matrix<T>(batch.batch * batch.seq, 3);
        linear(out.hidden, params.bhead_w, params.bhead_b, out.boundary_logits);
    }
    return out;
}

// Mean cross-entropy over rows where positions[i] == 1.
template <typename T>
T mlm_loss(const Matrix<T>& logits, const std::vector<int>& targets,
           const std::vector<uint8_t>& positions) {
    if (targets.size() != static_cast<size_t>(logits.rows) || positions.size() != targets.size()) {
        throw ShapeMismatch("mlm_loss inputs disagree in length");
    }
    long long count = 0;
    T total = T(0);
    for (int i = 0; i < logits.rows; ++i) {
        if (!positions[static_cast<size_t>(i)]) {
            continue;
        }
        int target = targets[static_cast<size_t>(i)];
        if (target < 0 || target >= logits.cols) {
            throw IndexOutOfRange("loss target " + std::to_string(target) + " outside logits");
        }
        const T* lr = logits.row(i);
        T maxv = lr[0];
        for (int j = 1; j < logits.cols; ++j) {
            maxv = std::max(maxv, lr[j]);
        }
        T sum = T(0);
        for (int j = 0; j < logits.cols; ++j) {
            sum += std::exp(lr[j] - maxv);
        }
        total += maxv + std::log(sum) - lr[target];
        ++count;
    }
    if (count == 0) {
        throw NoMaskedPositions("no scored positions");
    }
    return total / T(count);
}

// Top-1 accuracy over rows where positions[i] == 1 (ties go to the lower id).
template <typename T>
double masked_accuracy(const Matrix<T>& logits, const std::vector<int>& targets,
                       const std::vector<uint8_t>& positions) {
    long long count = 0;
    long long hits = 0;
    for (int i = 0; i < logits.rows; ++i) {
        if (!positions[static_cast<size_t>(i)]) {
            continue;
        }
        const T* lr = logits.row(i);
        int best = 0;
        for (int j = 1; j < logits.cols; ++j) {
            if (lr[j] > lr[best]) {
                best = j;
            }
        }
        hits += best == targets[static_cast<size_t>(i)] ? 1 : 0;
        ++count;
    }
    if (count == 0) {
        throw NoMaskedPositions("no scored positions");
    }
    return static_cast<double>(hits) / static_cast<double>(count);
}

// Unweighted sum of the two head losses; identity when the boundary head is
// absent.
template <typename T>
T combined_loss(T token_loss, const std::optional<T>& boundary_loss) {
    return boundary_loss ? token_loss + *boundary_loss : token_loss;
}

template <typename T>
struct LossResult {
    T token_loss = T(0);
    std::optional<T> boundary_loss;
    T combined = T(0);
};

// Positions the boundary head is scored on.
inline std::vector<uint8_t> boundary_positions(const Batch& batch, const ModelConfig& config) {
    return config.boundary_head_all_positions ? batch.pad_mask : batch.mask_positions;
}

template <typename T>
LossResult<T> compute_loss(const Batch& batch, const ForwardOutput<T>& out,
                           const ModelConfig& config) {
    LossResult<T> r;
    r.token_loss = mlm_loss(out.token_logits, batch.target_ids, batch.mask_positions);
    if (config.implicit_head) {
        r.boundary_loss =
            mlm_loss(out.boundary_logits, batch.boundary_targets, boundary_positions(batch, config));
    }
    r.combined = combined_loss(r.token_loss, r.boundary_loss);
    return r;
}

namespace detail {

// Cross-entropy backward for one head over a row subset: returns d(hidden)
// contribution and accumulates head weight gradients.
template <typename T>
void head_backward(const Matrix<T>& hidden, const Matrix<T>& logits,
                   const std::vector<int>& targets, const std::vector<uint8_t>& positions,
                   const Matrix<T>& w, Matrix<T>& dw, Matrix<T>& db, Matrix<T>& dhidden) {
    std::vector<int> rows;
    for (int i = 0; i < logits.rows; ++i) {
        if (positions[static_cast<size_t>(i)]) {
            rows.push_back(i);
        }
    }
    if (rows.empty()) {
        throw NoMaskedPositions("no scored positions");
    }
    const T inv_m = T(1) / T(rows.size());
    Matrix<T> dlog(static_cast<int>(rows.size()), logits.cols);
    Matrix<T> hsub(static_cast<int>(rows.size()), hidden.cols);
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        int i = rows[ri];
        const T* lr = logits.row(i);
        T maxv = lr[0];
        for (int j = 1; j < logits.cols; ++j) {
            maxv = std::max(maxv, lr[j]);
        }
        T sum = T(0);
        for (int j = 0; j < logits.cols; ++j) {
            sum += std::exp(lr[j] - maxv);
        }
        T* dl = dlog.row(static_cast<int>(ri));
        for (int j = 0; j < logits.cols; ++j) {
            dl[j] = std::exp(lr[j] - maxv) / sum * inv_m;
        }
        dl[targets[static_cast<size_t>(i)]] -= inv_m;
        const T* hr = hidden.row(i);
        T* hs = hsub.row(static_cast<int>(ri));
        for (int j = 0; j < hidden.cols; ++j) {
            hs[j] = hr[j];
        }
    }
    gemm_tn(hsub, dlog, dw, true);
    add_colsum(dlog, db);
    Matrix<T> dh(static_cast<int>(rows.size()), hidden.cols);
    gemm_nt(dlog, w, dh, false);
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        const T* src = dh.row(static_cast<int>(ri));
        T* dst = dhidden.row(rows[ri]);
        for (int j = 0; j < hidden.cols; ++j) {
            dst[j] += src[j];
        }
    }
}

}  // namespace detail

// Backpropagates dhidden (gradient at the post-final-layer-norm hidden
// states) through the trunk into `grads`, which must be zero-initialized
// (make_zero_params) or hold gradients to accumulate onto.
template <typename T>
void backward_from_hidden(const Batch& batch, const Parameters<T>& params,
                          const ModelConfig& config, const ForwardCache<T>& cache,
                          const Matrix<T>& dhidden, Parameters<T>& grads) {
    const int B = batch.batch;
    const int S = batch.seq;
    const int d = config.d_model;
    const int H = config.n_heads;
    const int dh = d / H;
    const T inv_sqrt_dh = T(1) / std::sqrt(T(dh));

    Matrix<T> dx(B * S, d);
    layer_norm_backward(dhidden, cache.xhatf, cache.rstdf, params.lnf_g, dx, grads.lnf_g,
                        grads.lnf_b);

    for (int li = config.n_layers - 1; li >= 0; --li) {
        const auto& lc = cache.layers[static_cast<size_t>(li)];
        const auto& lp = params.layers[static_cast<size_t>(li)];
        auto& lg = grads.layers[static_cast<size_t>(li)];
        const int ffd = config.ff_dim();

        // feed-forward block: x2 = x_mid + gelu(ln2(x_mid)·w1 + b1)·w2 + b2
        Matrix<T> da(B * S, ffd);
        gemm_nt(dx, lp.w2, da, false);
        gemm_tn(lc.a, dx, lg.w2, true);
        add_colsum(dx, lg.b2);
        Matrix<T> du(B * S, ffd);
        for (size_t i = 0; i < du.data.size(); ++i) {
            du.data[i] = da.data[i] * gelu_grad(lc.u.data[i]);
        }
        Matrix<T> dh2(B * S, d);
        gemm_nt(du, lp.w1, dh2, false);
        gemm_tn(lc.h2, du, lg.w1, true);
        add_colsum(du, lg.b1);
        Matrix<T> dx1 = dx;  // residual branch
        layer_norm_backward(dh2, lc.xhat2, lc.rstd2, lp.ln2_g, dx1, lg.ln2_g, lg.ln2_b);

        // attention block: x_mid = x_in + (attn(ln1(x_in)))·wo + bo
        Matrix<T> dctx(B * S, d);
        gemm_nt(dx1, lp.wo, dctx, false);
        gemm_tn(lc.ctx, dx1, lg.wo, true);
        add_colsum(dx1, lg.bo);

        Matrix<T> dq(B * S, d);
        Matrix<T> dk(B * S, d);
        Matrix<T> dv(B * S, d);
        std::vector<T> dp(static_cast<size_t>(S));
        for (int b = 0; b < B; ++b) {
            for (int h = 0; h < H; ++h) {
                for (int s = 0; s < S; ++s) {
                    const T* pr = lc.probs.row((b * H + h) * S + s);
                    const T* dcr = dctx.row(b * S + s) + h * dh;
                    T dot = T(0);  // Σ_t dP[t]·P[t]
                    for (int t = 0; t < S; ++t) {
                        if (pr[t] == T(0)) {
                            dp[static_cast<size_t>(t)] = T(0);
                            continue;
                        }
                        const T* vr = lc.v.row(b * S + t) + h * dh;
                        T g = T(0);
                        for (int e = 0; e < dh; ++e) {
                            g += dcr[e] * vr[e];
                        }
                        dp[static_cast<size_t>(t)] = g;
                        dot += g * pr[t];
                    }
                    const T* qr = lc.q.row(b * S + s) + h * dh;
                    T* dqr = dq.row(b * S + s) + h * dh;
                    for (int t = 0; t < S; ++t) {
                        T p = pr[t];
                        if (p == T(0)) {
                            continue;
                        }
                        T ds = p * (dp[static_cast<size_t>(t)] - dot) * inv_sqrt_dh;
                        const T* kr = lc.k.row(b * S + t) + h * dh;
                        T* dkr = dk.row(b * S + t) + h * dh;
                        T* dvr = dv.row(b * S + t) + h * dh;
                        for (int e = 0; e < dh; ++e) {
                            dqr[e] += ds * kr[e];
                            dkr[e] += ds * qr[e];
                            dvr[e] += p * dcr[e];
                        }
                    }
                }
            }
        }

        Matrix<T> dh1(B * S, d);
        gemm_nt(dq, lp.wq, dh1, false);
        gemm_nt(dk, lp.wk, dh1, true);
        gemm_nt(dv, lp.wv, dh1, true);
        gemm_tn(lc.h1, dq, lg.wq, true);
        gemm_tn(lc.h1, dk, lg.wk, true);
        gemm_tn(lc.h1, dv, lg.wv, true);
        add_colsum(dq, lg.bq);
        add_colsum(dk, lg.bk);
        add_colsum(dv, lg.bv);

        Matrix<T> dx0 = dx1;  // residual branch
        layer_norm_backward(dh1, lc.xhat1, lc.rstd1, lp.ln1_g, dx0, lg.ln1_g, lg.ln1_b);
        dx = std::move(dx0);
    }

    // embedding backward
    const bool use_wb = config.wb_rows() > 0;
    for (int b = 0; b < B; ++b) {
        for (int s = 0; s < S; ++s) {
            size_t i = static_cast<size_t>(b) * S + s;
            const T* dxr = dx.row(static_cast<int>(i));
            T* te = grads.tok_emb.row(batch.token_ids[i]);
            T* pe = grads.pos_emb.row(s);
            for (int j = 0; j < d; ++j) {
                te[j] += dxr[j];
                pe[j] += dxr[j];
            }
            if (use_wb) {
                T* we = grads.wb_emb.row(batch.wb_indices[i]);
                for (int j = 0; j < d; ++j) {
                    we[j] += dxr[j];
                }
            }
        }
    }
}

// Exact gradients of the combined MLM loss. `grads` must be zero-initialized
// with matching shapes (make_zero_params); gradients are accumulated into it.
template <typename T>
LossResult<T> backward(const Batch& batch, const Parameters<T>& params, const ModelConfig& config,
                       const ForwardOutput<T>& out, const ForwardCache<T>& cache,
                       Parameters<T>& grads) {
    LossResult<T> losses = compute_loss(batch, out, config);
    Matrix<T> dhidden(batch.batch * batch.seq, config.d_model);
    detail::head_backward(out.hidden, out.token_logits, batch.target_ids, batch.mask_positions,
                          params.head_w, grads.head_w, grads.head_b, dhidden);
    if (config.implicit_head) {
        detail::head_backward(out.hidden, out.boundary_logits, batch.boundary_targets,
                              boundary_positions(batch, config), params.bhead_w, grads.bhead_w,
                              grads.bhead_b, dhidden);
    }
    backward_from_hidden(batch, params, config, cache, dhidden, grads);
    return losses;
}

}  // namespace wordbound::nn
