#include "wordbound/train/pretrain.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>

#include "wordbound/errors.hpp"
#include "wordbound/nn/checkpoint.hpp"
#include "wordbound/train/adamw.hpp"
#include "wordbound/train/masking.hpp"
#include "wordbound/train/schedule.hpp"

namespace wordbound::train {

namespace {

constexpr uint64_t kEpochTag = 0x65706F6368ull;  // "epoch"
constexpr uint64_t kMaskTag = 0x6D61736Bull;     // "mask"
constexpr uint64_t kEvalTag = 0x6576616Cull;     // "eval"

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct EvalAccumulator {
    double loss_sum = 0.0;
    double token_loss_sum = 0.0;
    long long token_hits = 0;
    long long token_count = 0;
    long long boundary_hits = 0;
    long long boundary_count = 0;
};

EvalMetrics run_eval(const nn::Parameters<float>& params, const nn::ModelConfig& mc,
                     const std::vector<PreparedSequence>& seqs, const std::vector<int>& eval_idx,
                     const TrainConfig& tc, int vocab_size) {
    EvalAccumulator acc;
    size_t batch_ordinal = 0;
    for (size_t start = 0; start < eval_idx.size(); start += static_cast<size_t>(tc.batch_size)) {
        std::vector<int> pick(eval_idx.begin() + static_cast<long>(start),
                              eval_idx.begin() +
                                  static_cast<long>(std::min(start + tc.batch_size,
                                                             eval_idx.size())));
        nn::Batch clean = assemble_batch(seqs, pick, mc);
        nn::Batch masked = dynamic_mask(clean, tc.mask_rate,
                                        mix_seed(tc.seed, kEvalTag, batch_ordinal), vocab_size,
                                        tc.wb_maskable);
        ++batch_ordinal;
        nn::ForwardOutput<float> out = nn::forward(masked, params, mc);
        long long m = 0;
        for (auto flag : masked.mask_positions) {
            m += flag;
        }
        float tl = nn::mlm_loss(out.token_logits, masked.target_ids, masked.mask_positions);
        double tacc = nn::masked_accuracy(out.token_logits, masked.target_ids,
                                          masked.mask_positions);
        acc.token_loss_sum += static_cast<double>(tl) * static_cast<double>(m);
        acc.token_hits += static_cast<long long>(std::llround(tacc * static_cast<double>(m)));
        acc.token_count += m;
        double combined = tl;
        if (mc.implicit_head) {
            auto bpos = nn::boundary_positions(masked, mc);
            long long bm = 0;
            for (auto flag : bpos) {
                bm += flag;
            }
            float bl = nn::mlm_loss(out.boundary_logits, masked.boundary_targets, bpos);
            double bacc = nn::masked_accuracy(out.boundary_logits, masked.boundary_targets, bpos);
            acc.boundary_hits += static_cast<long long>(std::llround(bacc *
                                                                     static_cast<double>(bm)));
            acc.boundary_count += bm;
            combined += bl;
        }
        acc.loss_sum += combined * static_cast<double>(m);
    }
    EvalMetrics em;
    em.loss = acc.loss_sum / static_cast<double>(acc.token_count);
    em.token_loss = acc.token_loss_sum / static_cast<double>(acc.token_count);
    em.token_acc = static_cast<double>(acc.token_hits) / static_cast<double>(acc.token_count);
    if (acc.boundary_count > 0) {
        em.boundary_acc =
            static_cast<double>(acc.boundary_hits) / static_cast<double>(acc.boundary_count);
    }
    return em;
}

PretrainResult run_loop(nn::Parameters<float>& params, AdamW& opt, long long start_step,
                        const std::vector<std::string>& corpus, const Vocabulary& vocab,
                        const nn::ModelConfig& mc, const TrainConfig& tc,
                        const std::string& out_dir) {
    tc.validate();
    mc.validate();
    std::filesystem::create_directories(out_dir);

    auto seqs = prepare_lines(corpus, vocab, mc.wb_schema, tc.seq_len);
    std::vector<int> train_idx, eval_idx;
    split_train_eval(seqs.size(), tc.eval_split_k, train_idx, eval_idx);
    if (static_cast<long long>(train_idx.size()) < tc.batch_size) {
        throw CorpusTooSmall("train split has " + std::to_string(train_idx.size()) +
                             " sequences, need at least " + std::to_string(tc.batch_size));
    }
    const long long batches_per_epoch =
        static_cast<long long>(train_idx.size()) / tc.batch_size;

    LrSchedule sched{tc.total_steps, tc.effective_warmup(), tc.peak_lr};
    auto refs = nn::tensor_registry(params);

    std::string metrics_path = out_dir + "/metrics.tsv";
    bool fresh = start_step == 0 || !std::filesystem::exists(metrics_path);
    std::ofstream log(metrics_path, fresh ? std::ios::out : std::ios::app);
    if (!log) {
        throw IoError("cannot open " + metrics_path);
    }
    if (fresh) {
        log << "step\tlr\ttrain_loss\teval_loss\teval_token_acc\teval_boundary_acc\n";
    }

    PretrainResult res;
    res.metrics_path = metrics_path;
    nn::Parameters<float> grads = nn::make_zero_params<float>(mc);
    auto grefs = nn::tensor_registry(grads);

    std::deque<double> tail_losses;
    std::deque<double> tail_token_losses;
    const long long tail_n = std::max<long long>(1, tc.total_steps / 10);
    const long long token_tail_n = std::min<long long>(100, tc.total_steps);

    long long current_epoch = -1;
    std::vector<int> perm;
    for (long long step = start_step + 1; step <= tc.total_steps; ++step) {
        long long epoch = (step - 1) / batches_per_epoch;
        if (epoch != current_epoch) {
            perm = train_idx;
            DetRng er(mix_seed(tc.seed, kEpochTag, static_cast<uint64_t>(epoch)));
            er.shuffle(perm);
            current_epoch = epoch;
        }
        long long bi = (step - 1) % batches_per_epoch;
        std::vector<int> pick(perm.begin() + bi * tc.batch_size,
                              perm.begin() + (bi + 1) * tc.batch_size);
        nn::Batch clean = assemble_batch(seqs, pick, mc);
        nn::Batch masked =
            dynamic_mask(clean, tc.mask_rate, mix_seed(tc.seed, kMaskTag,
                                                       static_cast<uint64_t>(step)),
                         vocab.size(), tc.wb_maskable);

        for (auto& g : grefs) {
            g.tensor->zero();
        }
        nn::ForwardCache<float> cache;
        nn::ForwardOutput<float> out = nn::forward(masked, params, mc, &cache);
        nn::LossResult<float> losses = nn::backward(masked, params, mc, out, cache, grads);
        if (tc.grad_clip) {
            AdamW::clip_global_norm(grefs);
        }
        double lr = lr_at(step, sched);
        opt.step(refs, grefs, lr);

        if (step == start_step + 1) {
            res.initial_train_loss = losses.combined;
        }
        tail_losses.push_back(losses.combined);
        if (static_cast<long long>(tail_losses.size()) > tail_n) {
            tail_losses.pop_front();
        }
        tail_token_losses.push_back(losses.token_loss);
        if (static_cast<long long>(tail_token_losses.size()) > token_tail_n) {
            tail_token_losses.pop_front();
        }

        bool do_eval = !eval_idx.empty() &&
                       (step % tc.eval_every == 0 || step == tc.total_steps);
        std::string eval_cols = "-\t-\t-";
        if (do_eval) {
            EvalMetrics em = run_eval(params, mc, seqs, eval_idx, tc, vocab.size());
            eval_cols = fmt(em.loss) + "\t" + fmt(em.token_acc) + "\t" +
                        (em.boundary_acc >= 0 ? fmt(em.boundary_acc) : std::string("-"));
            res.final_eval = em;
        }
        log << step << '\t' << fmt(lr) << '\t' << fmt(losses.combined) << '\t' << eval_cols
            << '\n';

        if (step % tc.checkpoint_every == 0 || step == tc.total_steps) {
            nlohmann::json meta{{"seed", tc.seed},
                                {"step", step},
                                {"train", train_config_to_json(tc)}};
            std::string path = out_dir + "/checkpoint-" + std::to_string(step) + ".ckpt";
            nn::save_checkpoint(path, params, meta, opt.state_tensors(refs));
            res.final_checkpoint_path = path;
        }
        res.steps_run = step;
    }
    log.flush();

    double sum = 0.0;
    for (double v : tail_losses) {
        sum += v;
    }
    res.final_train_loss = tail_losses.empty() ? 0.0 : sum / static_cast<double>(tail_losses.size());
    sum = 0.0;
    for (double v : tail_token_losses) {
        sum += v;
    }
    res.mean_token_loss_last100 =
        tail_token_losses.empty() ? 0.0 : sum / static_cast<double>(tail_token_losses.size());
    return res;
}

}  // namespace

long long TrainConfig::effective_warmup() const {
    if (warmup_steps >= 0) {
        return warmup_steps;
    }
    return std::llround(warmup_fraction * static_cast<double>(total_steps));
}

void TrainConfig::validate() const {
    if (batch_size < 1 || total_steps < 1 || seq_len < 3) {
        throw InvalidConfig("batch_size/total_steps/seq_len too small");
    }
    if (!(mask_rate > 0.0 && mask_rate < 1.0)) {
        throw InvalidConfig("mask_rate must lie in (0, 1)");
    }
    if (effective_warmup() > total_steps) {
        throw InvalidConfig("warmup exceeds total_steps");
    }
    if (eval_every < 1 || checkpoint_every < 1 || eval_split_k < 0) {
        throw InvalidConfig("eval_every/checkpoint_every must be positive");
    }
}

nlohmann::json train_config_to_json(const TrainConfig& tc) {
    return nlohmann::json{
        {"batch_size", tc.batch_size},
        {"total_steps", tc.total_steps},
        {"warmup_steps", tc.warmup_steps},
        {"warmup_fraction", tc.warmup_fraction},
        {"peak_lr", tc.peak_lr},
        {"seq_len", tc.seq_len},
        {"mask_rate", tc.mask_rate},
        {"seed", tc.seed},
        {"eval_every", tc.eval_every},
        {"checkpoint_every", tc.checkpoint_every},
        {"weight_decay", tc.weight_decay},
        {"grad_clip", tc.grad_clip},
        {"wb_maskable", tc.wb_maskable},
        {"eval_split_k", tc.eval_split_k},
    };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig tc;
    tc.batch_size = j.value("batch_size", tc.batch_size);
    tc.total_steps = j.value("total_steps", tc.total_steps);
    tc.warmup_steps = j.value("warmup_steps", tc.warmup_steps);
    tc.warmup_fraction = j.value("warmup_fraction", tc.warmup_fraction);
    tc.peak_lr = j.value("peak_lr", tc.peak_lr);
    tc.seq_len = j.value("seq_len", tc.seq_len);
    tc.mask_rate = j.value("mask_rate", tc.mask_rate);
    tc.seed = j.value("seed", tc.seed);
    tc.eval_every = j.value("eval_every", tc.eval_every);
    tc.checkpoint_every = j.value("checkpoint_every", tc.checkpoint_every);
    tc.weight_decay = j.value("weight_decay", tc.weight_decay);
    tc.grad_clip = j.value("grad_clip", tc.grad_clip);
    tc.wb_maskable = j.value("wb_maskable", tc.wb_maskable);
    tc.eval_split_k = j.value("eval_split_k", tc.eval_split_k);
    return tc;
}

PretrainResult pretrain(const std::vector<std::string>& corpus, const Vocabulary& vocab,
                        const nn::ModelConfig& model_config, const TrainConfig& train_config,
                        const std::string& out_dir) {
    nn::Parameters<float> params = nn::init_params<float>(model_config, train_config.seed);
    AdamW opt;
    opt.weight_decay = train_config.weight_decay;
    auto refs = nn::tensor_registry(params);
    opt.init(refs);
    return run_loop(params, opt, 0, corpus, vocab, model_config, train_config, out_dir);
}

PretrainResult resume_pretrain(const std::string& checkpoint_path,
                               const std::vector<std::string>& corpus, const Vocabulary& vocab,
                               const std::string& out_dir) {
    nlohmann::json meta;
    std::map<std::string, nn::Matrix<float>> extra;
    nn::Parameters<float> params = nn::load_checkpoint(checkpoint_path, &meta, &extra);
    if (!meta.contains("train") || !meta.contains("step")) {
        throw BadCheckpoint("checkpoint lacks training state required for resume");
    }
    TrainConfig tc = train_config_from_json(meta["train"]);
    long long step = meta["step"].get<long long>();
    AdamW opt;
    opt.weight_decay = tc.weight_decay;
    auto refs = nn::tensor_registry(params);
    opt.load_state(refs, extra, step);
    return run_loop(params, opt, step, corpus, vocab, params.config, tc, out_dir);
}

std::optional<EvalMetrics> replay_eval(const std::string& checkpoint_path,
                                       const std::vector<std::string>& corpus,
                                       const Vocabulary& vocab) {
    nlohmann::json meta;
    nn::Parameters<float> params = nn::load_checkpoint(checkpoint_path, &meta);
    if (!meta.contains("train")) {
        throw BadCheckpoint("checkpoint lacks the train config needed for eval replay");
    }
    TrainConfig tc = train_config_from_json(meta["train"]);
    auto seqs = prepare_lines(corpus, vocab, params.config.wb_schema, tc.seq_len);
    std::vector<int> train_idx, eval_idx;
    split_train_eval(seqs.size(), tc.eval_split_k, train_idx, eval_idx);
    if (eval_idx.empty()) {
        return std::nullopt;
    }
    return run_eval(params, params.config, seqs, eval_idx, tc, vocab.size());
}

}  // namespace wordbound::train
