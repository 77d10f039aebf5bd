// wordbound: train subword vocabularies, inspect boundary annotations, score
// segmentations, and run the small-scale pretraining/finetuning experiments.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wordbound/boundary.hpp"
#include "wordbound/errors.hpp"
#include "wordbound/io.hpp"
#include "wordbound/morpho.hpp"
#include "wordbound/nn/checkpoint.hpp"
#include "wordbound/nn/gradcheck.hpp"
#include "wordbound/tokenizer.hpp"
#include "wordbound/train/finetune.hpp"
#include "wordbound/train/pretrain.hpp"
#include "wordbound/vocabulary.hpp"
#include "wordbound/wordpiece_trainer.hpp"

namespace {

using namespace wordbound;

// --out flag > config file value > WORDBOUND_OUT env var > ./wordbound-out
std::string resolve_out_dir(const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) {
        return flag_value;
    }
    if (!config_value.empty()) {
        return config_value;
    }
    if (const char* env = std::getenv("WORDBOUND_OUT"); env && *env) {
        return env;
    }
    return "wordbound-out";
}

// "auto" sniffs the file for a "##" prefix; otherwise the name decides.
Vocabulary load_vocab(const std::string& path, const std::string& mode) {
    if (mode == "marked") {
        return Vocabulary::load(path, MarkerMode::Marked);
    }
    if (mode == "boundless") {
        return Vocabulary::load(path, MarkerMode::Boundless);
    }
    if (mode != "auto") {
        throw InvalidConfig("vocab mode must be auto, marked, or boundless: " + mode);
    }
    for (const auto& line : read_lines(path)) {
        if (line.rfind(kContinuationPrefix, 0) == 0) {
            return Vocabulary::load(path, MarkerMode::Marked);
        }
    }
    return Vocabulary::load(path, MarkerMode::Boundless);
}

std::string basename_of(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content).flush()) {
        throw IoError("cannot write " + path);
    }
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig("unparsable JSON in " + path + ": " + e.what());
    }
}

// Model config files may be partial; missing keys take the defaults.
nn::ModelConfig model_config_from_partial(const nlohmann::json& user, int fallback_vocab) {
    nn::ModelConfig defaults;
    defaults.vocab_size = fallback_vocab;
    nlohmann::json merged = nn::config_to_json(defaults);
    merged.update(user);
    return nn::config_from_json(merged);
}

struct MorphRow {
    std::string dataset;
    morpho::SegEvalResult result;
};

// Per-dataset boundary scores for one vocabulary, predicting with encode_word.
std::vector<MorphRow> score_gold_files(const Vocabulary& vocab,
                                       const std::vector<std::string>& gold_paths) {
    std::vector<MorphRow> rows;
    for (const auto& path : gold_paths) {
        auto gold = morpho::load_gold_tsv(path);
        std::map<std::string, std::vector<std::string>> preds;
        for (const auto& g : gold) {
            if (!preds.count(g.word)) {
                preds[g.word] = encode_word(g.word, vocab);
            }
        }
        rows.push_back({basename_of(path), morpho::evaluate(preds, gold)});
    }
    return rows;
}

int cmd_train_tokenizer(const std::string& config_path, const std::string& mode,
                        int vocab_size, int min_pair_freq, bool no_lowercase,
                        bool keep_punctuation, const std::string& out_flag,
                        std::vector<std::string> corpus_paths) {
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) {
        cfg = load_json_file(config_path);
    }
    TokenizerConfig tc;
    tc.vocab_size = vocab_size > 0 ? vocab_size : cfg.value("vocab_size", tc.vocab_size);
    tc.min_pair_frequency =
        min_pair_freq > 0 ? min_pair_freq : cfg.value("min_pair_frequency", tc.min_pair_frequency);
    tc.lowercase = no_lowercase ? false : cfg.value("lowercase", tc.lowercase);
    tc.isolate_punctuation =
        keep_punctuation ? false : cfg.value("isolate_punctuation", tc.isolate_punctuation);
    std::string mode_name = !mode.empty() ? mode : cfg.value("mode", std::string("marked"));
    if (mode_name == "marked") {
        tc.marker_mode = MarkerMode::Marked;
    } else if (mode_name == "boundless") {
        tc.marker_mode = MarkerMode::Boundless;
    } else {
        throw InvalidConfig("mode must be marked or boundless: " + mode_name);
    }
    if (corpus_paths.empty() && cfg.contains("corpus")) {
        for (const auto& p : cfg["corpus"]) {
            corpus_paths.push_back(p.get<std::string>());
        }
    }
    if (corpus_paths.empty()) {
        throw InvalidConfig("no corpus files given");
    }

    std::vector<std::string> corpus;
    for (const auto& path : corpus_paths) {
        for (auto& line : read_lines(path)) {
            corpus.push_back(std::move(line));
        }
    }

    std::string out_dir = resolve_out_dir(out_flag, cfg.value("out_dir", std::string()));
    std::filesystem::create_directories(out_dir);

    TrainReport report;
    Vocabulary vocab = train_wordpiece(corpus, tc, &report);
    std::string vocab_path = out_dir + "/vocab.txt";
    vocab.save(vocab_path);

    double redundancy = morpho::vocab_redundancy(vocab);
    std::ostringstream tsv;
    tsv << "key\tvalue\n";
    tsv << "mode\t" << mode_name << '\n';
    tsv << "entries\t" << vocab.size() << '\n';
    tsv << "merges\t" << report.merges << '\n';
    tsv << "exhausted\t" << (report.exhausted ? 1 : 0) << '\n';
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", redundancy);
    tsv << "redundancy\t" << buf << '\n';
    write_text(out_dir + "/tokenizer_report.tsv", tsv.str());

    nlohmann::json resolved{{"mode", mode_name},
                            {"vocab_size", tc.vocab_size},
                            {"min_pair_frequency", tc.min_pair_frequency},
                            {"lowercase", tc.lowercase},
                            {"isolate_punctuation", tc.isolate_punctuation},
                            {"corpus", corpus_paths},
                            {"out_dir", out_dir}};
    write_text(out_dir + "/resolved_config.json", resolved.dump(2) + "\n");

    std::cout << "vocabulary: " << vocab_path << " (" << vocab.size() << " entries, "
              << report.merges << " merges" << (report.exhausted ? ", merges exhausted" : "")
              << ")\n";
    std::cout << "redundancy: " << buf << '\n';
    for (const auto& w : report.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    return 0;
}

int cmd_encode(const std::string& vocab_path, const std::string& vocab_b_path,
               const std::string& mode, const std::string& text, const std::string& input_path,
               bool annotate_flag, bool wb_tokens) {
    std::vector<std::pair<std::string, Vocabulary>> vocabs;
    vocabs.emplace_back(basename_of(vocab_path), load_vocab(vocab_path, mode));
    if (!vocab_b_path.empty()) {
        vocabs.emplace_back(basename_of(vocab_b_path), load_vocab(vocab_b_path, mode));
    }

    std::vector<std::string> lines;
    if (!text.empty()) {
        lines.push_back(text);
    } else if (!input_path.empty()) {
        lines = read_lines(input_path);
    } else {
        throw InvalidConfig("give --text or --input");
    }

    const bool labeled = vocabs.size() > 1;
    for (const auto& line : lines) {
        for (const auto& [label, vocab] : vocabs) {
            Encoding enc = encode(line, vocab);
            if (wb_tokens) {
                enc = boundary::insert_wb_tokens(enc, vocab);
            }
            if (annotate_flag) {
                if (labeled) {
                    std::cout << "# " << label << '\n';
                }
                std::cout << boundary::annotation_tsv(enc, boundary::annotate(enc));
            } else {
                if (labeled) {
                    std::cout << label << '\t';
                }
                for (size_t i = 0; i < enc.size(); ++i) {
                    std::cout << (i ? " " : "") << enc.token_strings[i];
                }
                std::cout << '\n';
            }
        }
    }
    return 0;
}

int cmd_eval_morph(const std::string& vocab_path, const std::string& mode,
                   const std::vector<std::string>& gold_paths, const std::string& out_flag) {
    Vocabulary vocab = load_vocab(vocab_path, mode);
    std::vector<morpho::DatasetReport> reports;
    for (const auto& row : score_gold_files(vocab, gold_paths)) {
        reports.push_back({row.dataset, row.result});
    }
    std::string tsv = morpho::report_tsv(reports);
    std::cout << tsv;
    if (!out_flag.empty()) {
        std::filesystem::create_directories(out_flag);
        write_text(out_flag + "/morph_report.tsv", tsv);
    }
    return 0;
}

int cmd_compare_morph(const std::string& vocab_a, const std::string& vocab_b,
                      const std::string& mode, const std::vector<std::string>& gold_paths) {
    std::cout << "tokenizer\tavg_len\tprecision\trecall\tf1\tredundancy\n";
    for (const auto& path : {vocab_a, vocab_b}) {
        Vocabulary vocab = load_vocab(path, mode);
        auto rows = score_gold_files(vocab, gold_paths);
        double len = 0.0, p = 0.0, r = 0.0, f1 = 0.0;
        for (const auto& row : rows) {
            len += row.result.avg_len;
            p += row.result.precision;
            r += row.result.recall;
            f1 += row.result.f1;
        }
        double n = static_cast<double>(rows.size());
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t%.6f\t%.6f\t%.6f", len / n, p / n, r / n,
                      f1 / n, morpho::vocab_redundancy(vocab));
        std::cout << path << '\t' << buf << '\n';
    }
    return 0;
}

int cmd_pretrain(const std::string& config_path, const std::string& corpus_flag,
                 const std::string& vocab_flag, const std::string& vocab_mode,
                 const std::string& out_flag, long long seed, const std::string& schema,
                 int implicit, long long steps, int batch_size, int seq_len, double peak_lr,
                 const std::string& resume) {
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) {
        cfg = load_json_file(config_path);
    }
    std::string corpus_path = !corpus_flag.empty() ? corpus_flag : cfg.value("corpus", "");
    std::string vocab_path = !vocab_flag.empty() ? vocab_flag : cfg.value("vocab", "");
    if (corpus_path.empty() || vocab_path.empty()) {
        throw InvalidConfig("pretrain needs a corpus and a vocab (flags or config file)");
    }
    Vocabulary vocab = load_vocab(vocab_path, vocab_mode);
    std::vector<std::string> corpus = read_lines(corpus_path);
    std::string out_dir = resolve_out_dir(out_flag, cfg.value("out_dir", std::string()));
    std::filesystem::create_directories(out_dir);

    train::PretrainResult res;
    if (!resume.empty()) {
        res = train::resume_pretrain(resume, corpus, vocab, out_dir);
    } else {
        nn::ModelConfig mc = model_config_from_partial(
            cfg.value("model", nlohmann::json::object()), vocab.size());
        if (mc.vocab_size != vocab.size()) {
            throw InvalidConfig("model vocab_size " + std::to_string(mc.vocab_size) +
                                " does not match the vocabulary (" +
                                std::to_string(vocab.size()) + " entries)");
        }
        train::TrainConfig tc =
            train::train_config_from_json(cfg.value("train", nlohmann::json::object()));
        // flag overrides
        if (seed >= 0) {
            tc.seed = static_cast<uint64_t>(seed);
        }
        if (!schema.empty()) {
            mc.wb_schema = boundary::schema_from_name(schema);
        }
        if (implicit >= 0) {
            mc.implicit_head = implicit > 0;
        }
        if (steps > 0) {
            tc.total_steps = steps;
        }
        if (batch_size > 0) {
            tc.batch_size = batch_size;
        }
        if (seq_len > 0) {
            tc.seq_len = seq_len;
        }
        if (peak_lr > 0) {
            tc.peak_lr = peak_lr;
        }
        mc.validate();
        tc.validate();
        if (mc.wb_schema == boundary::BoundarySchema::WBTokens &&
            vocab.id_of("[WB]") != kWbId) {
            throw InvalidConfig("wb-tokens schema needs [WB] at its reserved slot in the vocab");
        }

        nlohmann::json resolved{{"corpus", corpus_path},
                                {"vocab", vocab_path},
                                {"out_dir", out_dir},
                                {"model", nn::config_to_json(mc)},
                                {"train", train::train_config_to_json(tc)}};
        write_text(out_dir + "/resolved_config.json", resolved.dump(2) + "\n");
        res = train::pretrain(corpus, vocab, mc, tc, out_dir);
    }

    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "steps: %lld\ninitial train loss: %.6f\nfinal train loss: %.6f\n"
                  "mean token loss (last 100): %.6f\n",
                  res.steps_run, res.initial_train_loss, res.final_train_loss,
                  res.mean_token_loss_last100);
    std::cout << buf;
    if (res.final_eval) {
        std::snprintf(buf, sizeof(buf), "eval loss: %.6f\neval token accuracy: %.6f\n",
                      res.final_eval->loss, res.final_eval->token_acc);
        std::cout << buf;
        if (res.final_eval->boundary_acc >= 0) {
            std::snprintf(buf, sizeof(buf), "eval boundary accuracy: %.6f\n",
                          res.final_eval->boundary_acc);
            std::cout << buf;
        }
    }
    std::cout << "metrics: " << res.metrics_path << '\n';
    std::cout << "checkpoint: " << res.final_checkpoint_path << '\n';
    return 0;
}

int cmd_finetune(const std::string& checkpoint, const std::string& vocab_path,
                 const std::string& vocab_mode, const std::string& train_path,
                 const std::string& dev_path, const std::string& task,
                 const std::string& inject, int epochs, int batch_size, int seq_len, double lr,
                 const std::string& seeds_csv, bool cls_pool, bool remove_outliers,
                 const std::string& out_flag) {
    train::FinetuneConfig fc;
    if (task == "sequence") {
        fc.task = train::FinetuneTask::SequenceClassification;
    } else if (task == "token") {
        fc.task = train::FinetuneTask::TokenClassification;
    } else {
        throw InvalidConfig("task must be sequence or token: " + task);
    }
    if (inject == "none") {
        fc.wb_injection = train::WbInjection::None;
    } else if (inject == "binary") {
        fc.wb_injection = train::WbInjection::FtBinary;
    } else if (inject == "wb-tokens") {
        fc.wb_injection = train::WbInjection::FtWBTokens;
    } else {
        throw InvalidConfig("inject must be none, binary, or wb-tokens: " + inject);
    }
    if (epochs > 0) {
        fc.epochs = epochs;
    }
    if (batch_size > 0) {
        fc.batch_size = batch_size;
    }
    if (seq_len > 0) {
        fc.seq_len = seq_len;
    }
    if (lr > 0) {
        fc.lr = lr;
    }
    fc.cls_pooling = cls_pool;
    fc.remove_outliers = remove_outliers;
    if (!seeds_csv.empty()) {
        fc.seeds.clear();
        std::istringstream ss(seeds_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            fc.seeds.push_back(std::stoull(item));
        }
        if (fc.seeds.empty()) {
            throw InvalidConfig("empty seed list");
        }
    }

    Vocabulary vocab = load_vocab(vocab_path, vocab_mode);
    train::FinetuneReport report =
        train::finetune(checkpoint, vocab, train_path, dev_path, fc);
    std::string tsv = train::finetune_report_tsv(report);
    std::cout << tsv;
    if (!out_flag.empty()) {
        std::filesystem::create_directories(out_flag);
        write_text(out_flag + "/finetune_report.tsv", tsv);
    }
    return 0;
}

int cmd_grad_check(const std::string& schema, bool implicit, bool allow_wb_implicit, int coords,
                   double eps, long long seed) {
    nn::ModelConfig mc;
    mc.n_layers = 1;
    mc.n_heads = 2;
    mc.d_model = 8;
    mc.vocab_size = 11;
    mc.max_seq_len = 8;
    mc.wb_schema = boundary::schema_from_name(schema);
    mc.implicit_head = implicit;
    mc.allow_wb_tokens_with_implicit = allow_wb_implicit;
    mc.validate();

    nn::Batch batch = nn::make_gradcheck_batch(mc, static_cast<uint64_t>(seed));
    nn::GradCheckResult res =
        nn::finite_difference_check(batch, mc, static_cast<uint64_t>(seed), coords, eps);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "max relative error: %.3e over %d coordinates (worst: %s, analytic %.6e, "
                  "numeric %.6e)\n",
                  res.max_rel_err, res.checked, res.worst_tensor.c_str(), res.worst_analytic,
                  res.worst_numeric);
    std::cout << buf;
    return res.max_rel_err < 1e-3 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"word-boundary tokenisation and pretraining toolkit"};
    app.require_subcommand(1);

    // train-tokenizer
    auto* t = app.add_subcommand("train-tokenizer", "train a subword vocabulary");
    std::string t_config, t_mode, t_out;
    int t_vocab_size = 0, t_min_pair = 0;
    bool t_no_lower = false, t_keep_punct = false;
    std::vector<std::string> t_corpus;
    t->add_option("--config", t_config, "JSON config file");
    t->add_option("--mode", t_mode, "marked or boundless");
    t->add_option("--vocab-size", t_vocab_size, "target vocabulary size");
    t->add_option("--min-pair-freq", t_min_pair, "minimum pair frequency to merge");
    t->add_flag("--no-lowercase", t_no_lower, "keep case");
    t->add_flag("--keep-punctuation", t_keep_punct, "do not isolate punctuation");
    t->add_option("--out", t_out, "output directory");
    t->add_option("corpus", t_corpus, "corpus text files");

    // encode
    auto* e = app.add_subcommand("encode", "tokenise text, optionally with annotations");
    std::string e_vocab, e_vocab_b, e_mode = "auto", e_text, e_input;
    bool e_annotate = false, e_wb = false;
    e->add_option("--vocab", e_vocab, "vocabulary file")->required();
    e->add_option("--vocab-b", e_vocab_b, "second vocabulary for side-by-side output");
    e->add_option("--mode", e_mode, "auto, marked, or boundless");
    e->add_option("--text", e_text, "text to encode");
    e->add_option("--input", e_input, "file of lines to encode");
    e->add_flag("--annotate", e_annotate, "emit token/binary/word/subword TSV");
    e->add_flag("--wb-tokens", e_wb, "insert [WB] between words");

    // eval-morph
    auto* m = app.add_subcommand("eval-morph", "score segmentations against gold morphs");
    std::string m_vocab, m_mode = "auto", m_out;
    std::vector<std::string> m_gold;
    m->add_option("--vocab", m_vocab, "vocabulary file")->required();
    m->add_option("--mode", m_mode, "auto, marked, or boundless");
    m->add_option("--out", m_out, "directory for the report file");
    m->add_option("gold", m_gold, "gold TSV files (word<TAB>morphs)")->required();

    // compare
    auto* c = app.add_subcommand("compare", "side-by-side evaluation of two vocabularies");
    std::string c_tasks = "morph", c_vocab_a, c_vocab_b, c_mode = "auto";
    std::vector<std::string> c_gold;
    c->add_option("--tasks", c_tasks, "task list (morph)");
    c->add_option("--vocab-a", c_vocab_a, "first vocabulary")->required();
    c->add_option("--vocab-b", c_vocab_b, "second vocabulary")->required();
    c->add_option("--mode", c_mode, "auto, marked, or boundless");
    c->add_option("gold", c_gold, "gold TSV files")->required();

    // pretrain
    auto* p = app.add_subcommand("pretrain", "masked-language-model pretraining");
    std::string p_config, p_corpus, p_vocab, p_vocab_mode = "auto", p_out, p_schema, p_resume;
    long long p_seed = -1, p_steps = 0;
    int p_implicit = -1, p_batch = 0, p_seq_len = 0;
    double p_lr = 0.0;
    p->add_option("--config", p_config, "experiment JSON config");
    p->add_option("--corpus", p_corpus, "corpus file (one sentence per line)");
    p->add_option("--vocab", p_vocab, "vocabulary file");
    p->add_option("--vocab-mode", p_vocab_mode, "auto, marked, or boundless");
    p->add_option("--out", p_out, "output directory");
    p->add_option("--seed", p_seed, "training seed");
    p->add_option("--schema", p_schema, "none, binary, word, subword, or wb-tokens");
    p->add_option("--implicit", p_implicit, "1 to enable the boundary prediction head");
    p->add_option("--steps", p_steps, "total optimizer steps");
    p->add_option("--batch-size", p_batch, "sequences per step");
    p->add_option("--seq-len", p_seq_len, "maximum sequence length");
    p->add_option("--peak-lr", p_lr, "peak learning rate");
    p->add_option("--resume", p_resume, "checkpoint to continue from");

    // finetune
    auto* f = app.add_subcommand("finetune", "classification finetuning from a checkpoint");
    std::string f_ckpt, f_vocab, f_vocab_mode = "auto", f_train, f_dev;
    std::string f_task = "sequence", f_inject = "none", f_seeds, f_out;
    int f_epochs = 0, f_batch = 0, f_seq_len = 0;
    double f_lr = 0.0;
    bool f_cls = false, f_outliers = false;
    f->add_option("--checkpoint", f_ckpt, "pretrained checkpoint")->required();
    f->add_option("--vocab", f_vocab, "vocabulary file")->required();
    f->add_option("--train", f_train, "training set")->required();
    f->add_option("--dev", f_dev, "dev set")->required();
    f->add_option("--task", f_task, "sequence or token");
    f->add_option("--inject", f_inject, "none, binary, or wb-tokens");
    f->add_option("--epochs", f_epochs, "training epochs");
    f->add_option("--batch-size", f_batch, "examples per step");
    f->add_option("--seq-len", f_seq_len, "maximum sequence length");
    f->add_option("--lr", f_lr, "peak learning rate");
    f->add_option("--seeds", f_seeds, "comma-separated seed list");
    f->add_flag("--cls-pool", f_cls, "pool the [CLS] position instead of the mean");
    f->add_flag("--remove-outliers", f_outliers, "drop runs more than 2 SD from the mean");
    f->add_option("--out", f_out, "directory for the report file");

    // grad-check
    auto* g = app.add_subcommand("grad-check", "finite-difference gradient verification");
    std::string g_schema = "none";
    bool g_implicit = false, g_allow = false;
    int g_coords = 200;
    double g_eps = 1e-4;
    long long g_seed = 7;
    g->add_option("--schema", g_schema, "none, binary, word, subword, or wb-tokens");
    g->add_flag("--implicit", g_implicit, "enable the boundary prediction head");
    g->add_flag("--allow-wb-implicit", g_allow, "permit wb-tokens with the implicit head");
    g->add_option("--coords", g_coords, "sampled coordinates");
    g->add_option("--eps", g_eps, "finite-difference step");
    g->add_option("--seed", g_seed, "test-point seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) {
            return cmd_train_tokenizer(t_config, t_mode, t_vocab_size, t_min_pair, t_no_lower,
                                       t_keep_punct, t_out, t_corpus);
        }
        if (e->parsed()) {
            return cmd_encode(e_vocab, e_vocab_b, e_mode, e_text, e_input, e_annotate, e_wb);
        }
        if (m->parsed()) {
            return cmd_eval_morph(m_vocab, m_mode, m_gold, m_out);
        }
        if (c->parsed()) {
            if (c_tasks != "morph") {
                throw InvalidConfig("unsupported task list: " + c_tasks);
            }
            return cmd_compare_morph(c_vocab_a, c_vocab_b, c_mode, c_gold);
        }
        if (p->parsed()) {
            return cmd_pretrain(p_config, p_corpus, p_vocab, p_vocab_mode, p_out, p_seed,
                                p_schema, p_implicit, p_steps, p_batch, p_seq_len, p_lr,
                                p_resume);
        }
        if (f->parsed()) {
            return cmd_finetune(f_ckpt, f_vocab, f_vocab_mode, f_train, f_dev, f_task, f_inject,
                                f_epochs, f_batch, f_seq_len, f_lr, f_seeds, f_cls, f_outliers,
                                f_out);
        }
        if (g->parsed()) {
            return cmd_grad_check(g_schema, g_implicit, g_allow, g_coords, g_eps, g_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
