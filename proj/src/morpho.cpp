#include "wordbound/morpho.hpp"

#include <cstdio>
#include <sstream>

#include "wordbound/errors.hpp"
#include "wordbound/io.hpp"
#include "wordbound/tokenizer.hpp"
#include "wordbound/unicode.hpp"

namespace wordbound::morpho {

namespace {

std::string_view strip_marker(std::string_view piece) {
    if (piece.starts_with(kContinuationPrefix)) {
        piece.remove_prefix(kContinuationPrefix.size());
    }
    return piece;
}

int codepoint_count(std::string_view s) {
    int n = 0;
    size_t pos = 0;
    while (pos < s.size()) {
        unicode::decode(s, pos, false);
        ++n;
    }
    return n;
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::set<int> boundary_set(const std::vector<std::string>& pieces) {
    std::set<int> out;
    int offset = 0;
    for (size_t i = 0; i < pieces.size(); ++i) {
        offset += codepoint_count(strip_marker(pieces[i]));
        if (i + 1 < pieces.size()) {
            out.insert(offset);
        }
    }
    return out;
}

SegEvalResult evaluate(const std::map<std::string, std::vector<std::string>>& predictions,
                       const std::vector<GoldSegmentation>& gold) {
    if (gold.empty()) {
        throw EmptyGold("gold dataset is empty");
    }
    long long matched = 0;
    long long total_pred = 0;
    long long total_gold = 0;
    long long total_pieces = 0;
    SegEvalResult res;
    for (const auto& g : gold) {
        std::string concat;
        for (const auto& m : g.morphs) {
            concat += m;
        }
        if (g.morphs.empty() || concat != g.word) {
            ++res.n_skipped;
            continue;
        }
        auto it = predictions.find(g.word);
        if (it == predictions.end()) {
            throw MissingPrediction("no prediction for gold word: " + g.word);
        }
        auto pred = boundary_set(it->second);
        auto ref = boundary_set(g.morphs);
        for (int b : pred) {
            if (ref.count(b)) {
                ++matched;
            }
        }
        total_pred += static_cast<long long>(pred.size());
        total_gold += static_cast<long long>(ref.size());
        total_pieces += static_cast<long long>(it->second.size());
        ++res.n_words;
    }
    if (res.n_words == 0) {
        throw EmptyGold("no usable gold rows (all " + std::to_string(res.n_skipped) +
                        " rows had mismatched morph concatenations)");
    }
    auto ratio = [](long long num, long long den, long long other_den) {
        if (den > 0) {
            return static_cast<double>(num) / static_cast<double>(den);
        }
        return other_den == 0 ? 1.0 : 0.0;
    };
    res.precision = ratio(matched, total_pred, total_gold);
    res.recall = ratio(matched, total_gold, total_pred);
    res.f1 = (res.precision + res.recall) == 0.0
                 ? 0.0
                 : 2.0 * res.precision * res.recall / (res.precision + res.recall);
    res.avg_len = static_cast<double>(total_pieces) / static_cast<double>(res.n_words);
    return res;
}

double vocab_redundancy(const Vocabulary& vocab) {
    if (vocab.mode() == MarkerMode::Boundless) {
        return 0.0;
    }
    long long dual = 0;
    long long total = 0;
    std::string prefixed;
    for (int id = kNumSpecials; id < vocab.size(); ++id) {
        ++total;
        const std::string& tok = vocab.token(id);
        if (tok.starts_with(kContinuationPrefix)) {
            continue;  // counted via its unprefixed partner below
        }
        prefixed.assign(kContinuationPrefix);
        prefixed += tok;
        if (vocab.contains(prefixed)) {
            dual += 2;  // both members of the pair
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(dual) / static_cast<double>(total);
}

double avg_seq_len(const Vocabulary& vocab, const std::vector<std::string>& words) {
    if (words.empty()) {
        throw EmptyInput("avg_seq_len needs at least one word");
    }
    long long pieces = 0;
    for (const auto& w : words) {
        pieces += static_cast<long long>(encode_word(w, vocab).size());
    }
    return static_cast<double>(pieces) / static_cast<double>(words.size());
}

std::vector<GoldSegmentation> load_gold_tsv(const std::string& path, bool lowercase) {
    std::vector<GoldSegmentation> out;
    for (const auto& raw : read_lines(path)) {
        if (raw.empty()) {
            continue;
        }
        size_t tab = raw.find('\t');
        if (tab == std::string::npos) {
            throw IoError("gold row without a tab in " + path + ": " + raw);
        }
        GoldSegmentation g;
        g.word = raw.substr(0, tab);
        std::istringstream morphs(raw.substr(tab + 1));
        std::string m;
        while (morphs >> m) {
            g.morphs.push_back(m);
        }
        if (lowercase) {
            g.word = unicode::lowercase(g.word);
            for (auto& piece : g.morphs) {
                piece = unicode::lowercase(piece);
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::string report_tsv(const std::vector<DatasetReport>& reports) {
    std::ostringstream out;
    out << "dataset\tprecision\trecall\tf1\tavg_len\tn_words\tn_skipped\n";
    double p = 0, r = 0, f = 0, len = 0;
    for (const auto& rep : reports) {
        const auto& x = rep.result;
        out << rep.name << '\t' << format_score(x.precision) << '\t' << format_score(x.recall)
            << '\t' << format_score(x.f1) << '\t' << format_score(x.avg_len) << '\t' << x.n_words
            << '\t' << x.n_skipped << '\n';
        p += x.precision;
        r += x.recall;
        f += x.f1;
        len += x.avg_len;
    }
    if (reports.size() > 1) {
        double n = static_cast<double>(reports.size());
        out << "macro_avg\t" << format_score(p / n) << '\t' << format_score(r / n) << '\t'
            << format_score(f / n) << '\t' << format_score(len / n) << "\t-\t-\n";
    }
    return out.str();
}

}  // namespace wordbound::morpho
