#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "wordbound/nn/model.hpp"

namespace wordbound::train {

// Decoupled weight decay Adam over a tensor registry. Biases and layer-norm
// parameters carry decay=false in the registry and are exempt from decay.
class AdamW {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;

    void init(const std::vector<nn::TensorRef<float>>& params) {
        m_.clear();
        v_.clear();
        for (const auto& ref : params) {
            m_.emplace_back(ref.tensor->rows, ref.tensor->cols);
            v_.emplace_back(ref.tensor->rows, ref.tensor->cols);
        }
        t_ = 0;
    }

    long long step_count() const { return t_; }

    // Optional global-norm clip at 1.0, applied to all gradients jointly.
    static void clip_global_norm(const std::vector<nn::TensorRef<float>>& grads,
                                 double max_norm = 1.0) {
        double sq = 0.0;
        for (const auto& g : grads) {
            for (float x : g.tensor->data) {
                sq += static_cast<double>(x) * static_cast<double>(x);
            }
        }
        double norm = std::sqrt(sq);
        if (norm <= max_norm) {
            return;
        }
        float scale = static_cast<float>(max_norm / norm);
        for (const auto& g : grads) {
            for (float& x : g.tensor->data) {
                x *= scale;
            }
        }
    }

    void step(const std::vector<nn::TensorRef<float>>& params,
              const std::vector<nn::TensorRef<float>>& grads, double lr) {
        if (m_.size() != params.size() || grads.size() != params.size()) {
            throw ShapeMismatch("optimizer state does not match the parameter registry");
        }
        ++t_;
        const float b1 = static_cast<float>(beta1);
        const float b2 = static_cast<float>(beta2);
        const float corr1 = static_cast<float>(1.0 - std::pow(beta1, static_cast<double>(t_)));
        const float corr2 = static_cast<float>(1.0 - std::pow(beta2, static_cast<double>(t_)));
        const float flr = static_cast<float>(lr);
        const float feps = static_cast<float>(eps);
        for (size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i].tensor->data;
            const auto& g = grads[i].tensor->data;
            auto& m = m_[i].data;
            auto& v = v_[i].data;
            const float wd = params[i].decay ? static_cast<float>(weight_decay) : 0.0f;
            for (size_t j = 0; j < p.size(); ++j) {
                m[j] = b1 * m[j] + (1.0f - b1) * g[j];
                v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
                float mhat = m[j] / corr1;
                float vhat = v[j] / corr2;
                p[j] -= flr * (mhat / (std::sqrt(vhat) + feps) + wd * p[j]);
            }
        }
    }

    // Moments as named tensors for the checkpoint ("opt.m.<name>", "opt.v.<name>").
    std::map<std::string, nn::Matrix<float>> state_tensors(
        const std::vector<nn::TensorRef<float>>& params) const {
        std::map<std::string, nn::Matrix<float>> out;
        for (size_t i = 0; i < params.size(); ++i) {
            out["opt.m." + params[i].name] = m_[i];
            out["opt.v." + params[i].name] = v_[i];
        }
        return out;
    }

    // Restores moments saved by state_tensors; step count comes from `steps`.
    void load_state(const std::vector<nn::TensorRef<float>>& params,
                    const std::map<std::string, nn::Matrix<float>>& tensors, long long steps) {
        init(params);
        for (size_t i = 0; i < params.size(); ++i) {
            auto mi = tensors.find("opt.m." + params[i].name);
            auto vi = tensors.find("opt.v." + params[i].name);
            if (mi == tensors.end() || vi == tensors.end()) {
                throw BadCheckpoint("checkpoint lacks optimizer state for " + params[i].name);
            }
            if (mi->second.rows != m_[i].rows || mi->second.cols != m_[i].cols) {
                throw BadCheckpoint("optimizer state shape mismatch for " + params[i].name);
            }
            m_[i] = mi->second;
            v_[i] = vi->second;
        }
        t_ = steps;
    }

private:
    std::vector<nn::Matrix<float>> m_;
    std::vector<nn::Matrix<float>> v_;
    long long t_ = 0;
};

}  // namespace wordbound::train
