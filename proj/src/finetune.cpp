#include "wordbound/train/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "wordbound/boundary.hpp"
#include "wordbound/errors.hpp"
#include "wordbound/io.hpp"
#include "wordbound/nn/checkpoint.hpp"
#include "wordbound/rng.hpp"
#include "wordbound/tokenizer.hpp"
#include "wordbound/train/adamw.hpp"
#include "wordbound/train/schedule.hpp"
#include "wordbound/unicode.hpp"

namespace wordbound::train {

namespace {

constexpr uint64_t kFtEpochTag = 0x66745F6570ull;   // "ft_ep"
constexpr uint64_t kFtTableTag = 0x66745F7762ull;   // "ft_wb"

struct Example {
    std::vector<int> ids;
    std::vector<int> wb_index;
    std::vector<int> labels;  // token task: per position, -1 ignored
    int label = -1;           // sequence task
};

struct LabelMap {
    std::vector<std::string> names;
    std::map<std::string, int> index;

    int add(const std::string& name) {
        auto it = index.find(name);
        if (it != index.end()) {
            return it->second;
        }
        int id = static_cast<int>(names.size());
        names.push_back(name);
        index.emplace(name, id);
        return id;
    }
    int require(const std::string& name) const {
        auto it = index.find(name);
        if (it == index.end()) {
            throw LabelMismatch("label '" + name + "' absent from the training label set");
        }
        return it->second;
    }
};

// Wraps an encoding with [CLS]/[SEP], optionally splices [WB], truncates, and
// extracts per-position table indices and first-piece labels.
Example build_example(Encoding enc, const Vocabulary& vocab, const FinetuneConfig& cfg,
                      boundary::BoundarySchema table_schema,
                      const std::vector<int>* word_tags) {
    if (cfg.wb_injection == WbInjection::FtWBTokens) {
        enc = boundary::insert_wb_tokens(enc, vocab);
    }
    Encoding wrapped;
    wrapped.push(kClsId, std::string(kSpecialTokens[kClsId]), kNoWord);
    for (size_t i = 0; i < enc.size(); ++i) {
        wrapped.push(enc.token_ids[i], enc.token_strings[i], enc.word_ids[i]);
    }
    wrapped.push(kSepId, std::string(kSpecialTokens[kSepId]), kNoWord);

    auto ann = boundary::annotate(wrapped);
    Example ex;
    size_t n = std::min(wrapped.size(), static_cast<size_t>(cfg.seq_len));
    int prev_word = kNoWord;
    for (size_t i = 0; i < n; ++i) {
        ex.ids.push_back(wrapped.token_ids[i]);
        switch (table_schema) {
            case boundary::BoundarySchema::Binary: ex.wb_index.push_back(ann.binary[i]); break;
            case boundary::BoundarySchema::WordIndex:
                ex.wb_index.push_back(ann.word_index[i]);
                break;
            case boundary::BoundarySchema::SubwordIndex:
                ex.wb_index.push_back(ann.subword_index[i]);
                break;
            default: ex.wb_index.push_back(0); break;
        }
        if (word_tags) {
            int w = wrapped.word_ids[i];
            bool first_piece = w != kNoWord && w != prev_word;
            ex.labels.push_back(first_piece ? (*word_tags)[static_cast<size_t>(w)] : -1);
            if (w != kNoWord) {
                prev_word = w;
            }
        }
    }
    return ex;
}

std::vector<Example> load_sequence_dataset(const std::string& path, const Vocabulary& vocab,
                                           const FinetuneConfig& cfg,
                                           boundary::BoundarySchema table_schema, LabelMap& labels,
                                           bool grow_labels) {
    std::vector<Example> out;
    for (const auto& line : read_lines(path)) {
        if (line.empty()) {
            continue;
        }
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw IoError("sequence dataset row without a tab in " + path + ": " + line);
        }
        std::string label = line.substr(0, tab);
        Example ex = build_example(encode(line.substr(tab + 1), vocab), vocab, cfg, table_schema,
                                   nullptr);
        ex.label = grow_labels ? labels.add(label) : labels.require(label);
        out.push_back(std::move(ex));
    }
    if (out.empty()) {
        throw EmptyInput("no examples in " + path);
    }
    return out;
}

std::vector<Example> load_token_dataset(const std::string& path, const Vocabulary& vocab,
                                        const FinetuneConfig& cfg,
                                        boundary::BoundarySchema table_schema, LabelMap& labels,
                                        bool grow_labels) {
    std::vector<Example> out;
    std::vector<std::string> words;
    std::vector<int> tags;
    auto flush = [&]() {
        if (words.empty()) {
            return;
        }
        // each dataset token is one word: greedy-encode it directly so the
        // tag↔word correspondence survives punctuation-bearing tokens
        Encoding enc;
        for (size_t w = 0; w < words.size(); ++w) {
            for (auto& piece : encode_word(unicode::lowercase(words[w]), vocab)) {
                int id = vocab.id_of(piece);
                enc.push(id, std::move(piece), static_cast<int>(w));
            }
        }
        out.push_back(build_example(std::move(enc), vocab, cfg, table_schema, &tags));
        words.clear();
        tags.clear();
    };
    for (const auto& line : read_lines(path)) {
        if (line.empty()) {
            flush();
            continue;
        }
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw IoError("token dataset row without a tab in " + path + ": " + line);
        }
        words.push_back(line.substr(0, tab));
        std::string tag = line.substr(tab + 1);
        tags.push_back(grow_labels ? labels.add(tag) : labels.require(tag));
    }
    flush();
    if (out.empty()) {
        throw EmptyInput("no sentences in " + path);
    }
    return out;
}

nn::Batch to_batch(const std::vector<Example>& examples, const std::vector<int>& pick,
                   bool use_wb_table) {
    size_t max_len = 0;
    for (int i : pick) {
        max_len = std::max(max_len, examples[static_cast<size_t>(i)].ids.size());
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
    if (use_wb_table) {
        b.wb_indices.assign(n, 0);
    }
    for (size_t bi = 0; bi < pick.size(); ++bi) {
        const auto& ex = examples[static_cast<size_t>(pick[bi])];
        for (size_t s = 0; s < ex.ids.size(); ++s) {
            size_t i = bi * max_len + s;
            b.token_ids[i] = ex.ids[s];
            b.pad_mask[i] = 1;
            if (use_wb_table) {
                b.wb_indices[i] = ex.wb_index[s];
            }
        }
    }
    return b;
}

// softmax CE and dlogits for a logit matrix restricted to given rows
float rows_ce_backward(const nn::Matrix<float>& logits, const std::vector<int>& rows,
                       const std::vector<int>& row_targets, nn::Matrix<float>& dlogits) {
    const float inv_m = 1.0f / static_cast<float>(rows.size());
    double total = 0.0;
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        const float* lr = logits.row(rows[ri]);
        float* dl = dlogits.row(rows[ri]);
        float maxv = lr[0];
        for (int j = 1; j < logits.cols; ++j) {
            maxv = std::max(maxv, lr[j]);
        }
        float sum = 0.0f;
        for (int j = 0; j < logits.cols; ++j) {
            sum += std::exp(lr[j] - maxv);
        }
        int t = row_targets[ri];
        total += static_cast<double>(maxv + std::log(sum) - lr[t]);
        for (int j = 0; j < logits.cols; ++j) {
            dl[j] = std::exp(lr[j] - maxv) / sum * inv_m;
        }
        dl[t] -= inv_m;
    }
    return static_cast<float>(total / static_cast<double>(rows.size()));
}

struct DevScore {
    long long correct = 0;
    long long scored = 0;
    long long pred_pos = 0;  // token task: predictions ≠ outside
    long long gold_pos = 0;
    long long match_pos = 0;
};

double score_value(const DevScore& s, FinetuneTask task, int outside_label) {
    if (task == FinetuneTask::SequenceClassification || outside_label < 0) {
        return s.scored == 0 ? 0.0
                             : static_cast<double>(s.correct) / static_cast<double>(s.scored);
    }
    double p = s.pred_pos == 0 ? (s.gold_pos == 0 ? 1.0 : 0.0)
                               : static_cast<double>(s.match_pos) / static_cast<double>(s.pred_pos);
    double r = s.gold_pos == 0 ? (s.pred_pos == 0 ? 1.0 : 0.0)
                               : static_cast<double>(s.match_pos) / static_cast<double>(s.gold_pos);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace

std::string finetune_report_tsv(const FinetuneReport& report) {
    std::ostringstream out;
    out << "seed\tbest_epoch\tbest_" << report.metric_name << "\tstatus\n";
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };
    for (const auto& run : report.runs) {
        bool removed = std::find(report.removed_seeds.begin(), report.removed_seeds.end(),
                                 run.seed) != report.removed_seeds.end();
        out << run.seed << '\t' << run.best_epoch << '\t' << fmt(run.best_metric) << '\t'
            << (removed ? "outlier_removed" : "kept") << '\n';
    }
    out << "mean\t-\t" << fmt(report.mean) << "\t-\n";
    out << "stddev\t-\t" << fmt(report.stddev) << "\t-\n";
    return out.str();
}

FinetuneReport finetune(const std::string& checkpoint_path, const Vocabulary& vocab,
                        const std::string& train_path, const std::string& dev_path,
                        const FinetuneConfig& config) {
    if (config.epochs < 1 || config.batch_size < 1 || config.seq_len < 3 ||
        config.seeds.empty()) {
        throw InvalidConfig("finetune epochs/batch_size/seq_len/seeds too small");
    }
    nlohmann::json meta;
    nn::Parameters<float> base = nn::load_checkpoint(checkpoint_path, &meta);
    if (config.wb_injection != WbInjection::None &&
        base.config.wb_schema != boundary::BoundarySchema::None) {
        throw SchemaConflict(
            "finetune-time boundary injection requires a schema-free pretrained model, got " +
            std::string(boundary::schema_name(base.config.wb_schema)));
    }

    boundary::BoundarySchema table_schema = base.config.wb_schema;
    if (config.wb_injection == WbInjection::FtBinary) {
        table_schema = boundary::BoundarySchema::Binary;
    }

    LabelMap labels;
    const bool token_task = config.task == FinetuneTask::TokenClassification;
    auto train_set = token_task
                         ? load_token_dataset(train_path, vocab, config, table_schema, labels, true)
                         : load_sequence_dataset(train_path, vocab, config, table_schema, labels,
                                                 true);
    auto dev_set = token_task
                       ? load_token_dataset(dev_path, vocab, config, table_schema, labels, false)
                       : load_sequence_dataset(dev_path, vocab, config, table_schema, labels,
                                               false);
    const int n_classes = static_cast<int>(labels.names.size());
    if (n_classes < 2) {
        throw LabelMismatch("need at least two labels, got " + std::to_string(n_classes));
    }
    int outside_label = -1;
    if (token_task) {
        auto it = labels.index.find("O");
        if (it != labels.index.end()) {
            outside_label = it->second;
        }
    }

    FinetuneReport report;
    report.metric_name = token_task && outside_label >= 0 ? "f1" : "accuracy";

    const long long steps_per_epoch =
        (static_cast<long long>(train_set.size()) + config.batch_size - 1) / config.batch_size;
    const long long total_steps = steps_per_epoch * config.epochs;
    LrSchedule sched{total_steps,
                     std::llround(config.warmup_fraction * static_cast<double>(total_steps)),
                     config.lr};

    for (uint64_t seed : config.seeds) {
        nn::Parameters<float> params = nn::load_checkpoint(checkpoint_path);
        nn::ModelConfig mc = params.config;
        if (config.wb_injection == WbInjection::FtBinary) {
            mc.wb_schema = boundary::BoundarySchema::Binary;
            params.config = mc;
            params.wb_emb = nn::Matrix<float>(mc.wb_rows(), mc.d_model);
            DetRng rng(mix_seed(seed, kFtTableTag));
            for (auto& v : params.wb_emb.data) {
                v = static_cast<float>(rng.normal(0.0, nn::kInitStd));
            }
        }
        const bool use_wb_table = mc.wb_rows() > 0;

        nn::Matrix<float> cls_w(mc.d_model, n_classes);  // zero-init: uniform start
        nn::Matrix<float> cls_b(1, n_classes);
        nn::Parameters<float> grads = nn::make_zero_params<float>(mc);
        nn::Matrix<float> dcls_w(mc.d_model, n_classes);
        nn::Matrix<float> dcls_b(1, n_classes);

        // full-parameter registry: trunk plus the fresh head; the pretraining
        // MLM heads are not part of the finetuned function and stay frozen
        std::vector<nn::TensorRef<float>> prefs, grefs;
        auto is_mlm_head = [](const std::string& name) {
            return name == "head_w" || name == "head_b" || name == "bhead_w" ||
                   name == "bhead_b";
        };
        for (auto& r : nn::tensor_registry(params)) {
            if (!is_mlm_head(r.name)) {
                prefs.push_back(r);
            }
        }
        for (auto& r : nn::tensor_registry(grads)) {
            if (!is_mlm_head(r.name)) {
                grefs.push_back(r);
            }
        }
        prefs.push_back({"cls.w", &cls_w, true, nn::InitKind::Zero});
        prefs.push_back({"cls.b", &cls_b, false, nn::InitKind::Zero});
        grefs.push_back({"cls.w", &dcls_w, true, nn::InitKind::Zero});
        grefs.push_back({"cls.b", &dcls_b, false, nn::InitKind::Zero});

        AdamW opt;
        opt.weight_decay = config.weight_decay;
        opt.init(prefs);

        SeedRun run;
        run.seed = seed;
        std::vector<int> order(train_set.size());
        for (size_t i = 0; i < order.size(); ++i) {
            order[i] = static_cast<int>(i);
        }

        long long step = 0;
        for (int epoch = 1; epoch <= config.epochs; ++epoch) {
            DetRng er(mix_seed(seed, kFtEpochTag, static_cast<uint64_t>(epoch)));
            er.shuffle(order);
            for (size_t start = 0; start < order.size();
                 start += static_cast<size_t>(config.batch_size)) {
                std::vector<int> pick(
                    order.begin() + static_cast<long>(start),
                    order.begin() + static_cast<long>(std::min(
                                        start + static_cast<size_t>(config.batch_size),
                                        order.size())));
                nn::Batch batch = to_batch(train_set, pick, use_wb_table);
                for (auto& g : grefs) {
                    g.tensor->zero();
                }

                nn::ForwardCache<float> cache;
                nn::Matrix<float> hidden = nn::forward_hidden(batch, params, mc, &cache);
                nn::Matrix<float> dhidden(batch.batch * batch.seq, mc.d_model);

                if (token_task) {
                    nn::Matrix<float> logits(batch.batch * batch.seq, n_classes);
                    nn::linear(hidden, cls_w, cls_b, logits);
                    std::vector<int> rows;
                    std::vector<int> row_targets;
                    for (size_t bi = 0; bi < pick.size(); ++bi) {
                        const auto& ex = train_set[static_cast<size_t>(pick[bi])];
                        for (size_t s = 0; s < ex.labels.size(); ++s) {
                            if (ex.labels[s] >= 0) {
                                rows.push_back(static_cast<int>(bi * batch.seq + s));
                                row_targets.push_back(ex.labels[s]);
                            }
                        }
                    }
                    if (rows.empty()) {
                        continue;
                    }
                    nn::Matrix<float> dlogits(logits.rows, logits.cols);
                    rows_ce_backward(logits, rows, row_targets, dlogits);
                    nn::gemm_tn(hidden, dlogits, dcls_w, true);
                    nn::add_colsum(dlogits, dcls_b);
                    nn::gemm_nt(dlogits, cls_w, dhidden, true);
                } else {
                    // mean pooling (or CLS) then a linear head
                    nn::Matrix<float> pooled(batch.batch, mc.d_model);
                    std::vector<float> inv_counts(static_cast<size_t>(batch.batch), 0.0f);
                    for (int bi = 0; bi < batch.batch; ++bi) {
                        float* pr = pooled.row(bi);
                        if (config.cls_pooling) {
                            const float* hr = hidden.row(bi * batch.seq);
                            for (int j = 0; j < mc.d_model; ++j) {
                                pr[j] = hr[j];
                            }
                            continue;
                        }
                        int count = 0;
                        for (int s = 0; s < batch.seq; ++s) {
                            size_t i = static_cast<size_t>(bi) * batch.seq + s;
                            if (!batch.pad_mask[i]) {
                                continue;
                            }
                            const float* hr = hidden.row(static_cast<int>(i));
                            for (int j = 0; j < mc.d_model; ++j) {
                                pr[j] += hr[j];
                            }
                            ++count;
                        }
                        inv_counts[static_cast<size_t>(bi)] = 1.0f / static_cast<float>(count);
                        for (int j = 0; j < mc.d_model; ++j) {
                            pr[j] *= inv_counts[static_cast<size_t>(bi)];
                        }
                    }
                    nn::Matrix<float> logits(batch.batch, n_classes);
                    nn::linear(pooled, cls_w, cls_b, logits);
                    std::vector<int> rows(static_cast<size_t>(batch.batch));
                    std::vector<int> row_targets(static_cast<size_t>(batch.batch));
                    for (size_t bi = 0; bi < pick.size(); ++bi) {
                        rows[bi] = static_cast<int>(bi);
                        row_targets[bi] = train_set[static_cast<size_t>(pick[bi])].label;
                    }
                    nn::Matrix<float> dlogits(batch.batch, n_classes);
                    rows_ce_backward(logits, rows, row_targets, dlogits);
                    nn::gemm_tn(pooled, dlogits, dcls_w, true);
                    nn::add_colsum(dlogits, dcls_b);
                    nn::Matrix<float> dpooled(batch.batch, mc.d_model);
                    nn::gemm_nt(dlogits, cls_w, dpooled, false);
                    for (int bi = 0; bi < batch.batch; ++bi) {
                        const float* dpr = dpooled.row(bi);
                        if (config.cls_pooling) {
                            float* dhr = dhidden.row(bi * batch.seq);
                            for (int j = 0; j < mc.d_model; ++j) {
                                dhr[j] += dpr[j];
                            }
                            continue;
                        }
                        for (int s = 0; s < batch.seq; ++s) {
                            size_t i = static_cast<size_t>(bi) * batch.seq + s;
                            if (!batch.pad_mask[i]) {
                                continue;
                            }
                            float* dhr = dhidden.row(static_cast<int>(i));
                            for (int j = 0; j < mc.d_model; ++j) {
                                dhr[j] += dpr[j] * inv_counts[static_cast<size_t>(bi)];
                            }
                        }
                    }
                }

                nn::backward_from_hidden(batch, params, mc, cache, dhidden, grads);
                ++step;
                opt.step(prefs, grefs, lr_at(step, sched));
            }

            // dev pass
            DevScore score;
            for (size_t start = 0; start < dev_set.size();
                 start += static_cast<size_t>(config.batch_size)) {
                std::vector<int> pick;
                for (size_t i = start;
                     i < std::min(start + static_cast<size_t>(config.batch_size), dev_set.size());
                     ++i) {
                    pick.push_back(static_cast<int>(i));
                }
                nn::Batch batch = to_batch(dev_set, pick, use_wb_table);
                nn::Matrix<float> hidden = nn::forward_hidden(batch, params, mc);
                if (token_task) {
                    nn::Matrix<float> logits(batch.batch * batch.seq, n_classes);
                    nn::linear(hidden, cls_w, cls_b, logits);
                    for (size_t bi = 0; bi < pick.size(); ++bi) {
                        const auto& ex = dev_set[static_cast<size_t>(pick[bi])];
                        for (size_t s = 0; s < ex.labels.size(); ++s) {
                            int gold = ex.labels[s];
                            if (gold < 0) {
                                continue;
                            }
                            const float* lr = logits.row(static_cast<int>(bi * batch.seq + s));
                            int pred = 0;
                            for (int j = 1; j < n_classes; ++j) {
                                if (lr[j] > lr[pred]) {
                                    pred = j;
                                }
                            }
                            ++score.scored;
                            score.correct += pred == gold ? 1 : 0;
                            if (outside_label >= 0) {
                                score.pred_pos += pred != outside_label ? 1 : 0;
                                score.gold_pos += gold != outside_label ? 1 : 0;
                                score.match_pos +=
                                    (pred == gold && gold != outside_label) ? 1 : 0;
                            }
                        }
                    }
                } else {
                    for (size_t bi = 0; bi < pick.size(); ++bi) {
                        // mean/CLS pooled prediction per sequence
                        std::vector<float> pooled(static_cast<size_t>(mc.d_model), 0.0f);
                        if (config.cls_pooling) {
                            const float* hr = hidden.row(static_cast<int>(bi) * batch.seq);
                            pooled.assign(hr, hr + mc.d_model);
                        } else {
                            int count = 0;
                            for (int s = 0; s < batch.seq; ++s) {
                                size_t i = bi * static_cast<size_t>(batch.seq) + s;
                                if (!batch.pad_mask[i]) {
                                    continue;
                                }
                                const float* hr = hidden.row(static_cast<int>(i));
                                for (int j = 0; j < mc.d_model; ++j) {
                                    pooled[static_cast<size_t>(j)] += hr[j];
                                }
                                ++count;
                            }
                            for (auto& v : pooled) {
                                v /= static_cast<float>(count);
                            }
                        }
                        int pred = 0;
                        float best = 0.0f;
                        for (int c = 0; c < n_classes; ++c) {
                            float logit = cls_b.at(0, c);
                            for (int j = 0; j < mc.d_model; ++j) {
                                logit += pooled[static_cast<size_t>(j)] * cls_w.at(j, c);
                            }
                            if (c == 0 || logit > best) {
                                best = logit;
                                pred = c;
                            }
                        }
                        ++score.scored;
                        score.correct +=
                            pred == dev_set[static_cast<size_t>(pick[bi])].label ? 1 : 0;
                    }
                }
            }
            double metric = score_value(score, config.task, outside_label);
            run.per_epoch.push_back(metric);
            if (metric > run.best_metric || epoch == 1) {
                run.best_metric = metric;
                run.best_epoch = epoch;
            }
        }
        report.runs.push_back(std::move(run));
    }

    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) {
            mean += x;
        }
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) {
            var += (x - mean) * (x - mean);
        }
        double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
        return std::pair<double, double>(mean, sd);
    };

    std::vector<double> metrics;
    for (const auto& run : report.runs) {
        metrics.push_back(run.best_metric);
    }
    auto [mean, sd] = mean_std(metrics);
    if (config.remove_outliers && report.runs.size() >= 3 && sd > 0.0) {
        std::vector<double> kept;
        for (const auto& run : report.runs) {
            if (std::abs(run.best_metric - mean) > 2.0 * sd) {
                report.removed_seeds.push_back(run.seed);
            } else {
                kept.push_back(run.best_metric);
            }
        }
        if (!kept.empty()) {
            std::tie(mean, sd) = mean_std(kept);
        }
    }
    report.mean = mean;
    report.stddev = sd;
    return report;
}

}  // namespace wordbound::train
