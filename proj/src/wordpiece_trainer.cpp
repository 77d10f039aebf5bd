#include "wordbound/wordpiece_trainer.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>

#include "wordbound/errors.hpp"
#include "wordbound/unicode.hpp"

namespace wordbound {

namespace {

using Pair = std::pair<int, int>;

struct PairHash {
    size_t operator()(const Pair& p) const noexcept {
        uint64_t v = (static_cast<uint64_t>(static_cast<uint32_t>(p.first)) << 32) |
                     static_cast<uint32_t>(p.second);
        // splitmix64 finalizer
        v += 0x9E3779B97F4A7C15ull;
        v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
        v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
        return static_cast<size_t>(v ^ (v >> 31));
    }
};

struct WordType {
    std::vector<int> units;
    long long freq = 0;
};

std::string merge_string(const std::string& left, const std::string& right, MarkerMode mode) {
    std::string merged = left;
    if (mode == MarkerMode::Marked && right.starts_with(kContinuationPrefix)) {
        merged.append(right, kContinuationPrefix.size(), std::string::npos);
    } else {
        merged.append(right);
    }
    return merged;
}

// score(a) > score(b) where score = freq / (freq(left)*freq(right)), compared
// exactly by cross-multiplication.
bool score_greater(long long fa, long long la, long long ra, long long fb, long long lb,
                   long long rb) {
    return static_cast<__int128>(fa) * lb * rb > static_cast<__int128>(fb) * la * ra;
}

}  // namespace

Vocabulary train_wordpiece(const std::vector<std::string>& corpus, const TokenizerConfig& config,
                           TrainReport* report) {
    if (config.vocab_size <= 0 || config.min_pair_frequency <= 0) {
        throw InvalidConfig("vocab_size and min_pair_frequency must be positive");
    }
    TrainReport local;
    TrainReport& rep = report ? *report : local;

    PretokenizeOptions popts{config.lowercase, config.isolate_punctuation};
    // std::map gives a deterministic (sorted) word order for free.
    std::map<std::string, long long> word_freq;
    for (const auto& line : corpus) {
        for (auto& w : pretokenize(line, popts)) {
            ++word_freq[w];
        }
    }
    if (word_freq.empty()) {
        throw EmptyCorpus("no pre-tokens found in corpus");
    }

    std::vector<std::string> unit_str;
    std::unordered_map<std::string, int, TransparentHash, TransparentEq> unit_id;
    auto intern = [&](std::string s) {
        auto it = unit_id.find(std::string_view(s));
        if (it != unit_id.end()) {
            return it->second;
        }
        int id = static_cast<int>(unit_str.size());
        unit_str.push_back(std::move(s));
        unit_id.emplace(unit_str.back(), id);
        return id;
    };

    const bool marked = config.marker_mode == MarkerMode::Marked;
    std::vector<WordType> words;
    words.reserve(word_freq.size());
    for (const auto& [word, freq] : word_freq) {
        WordType wt;
        wt.freq = freq;
        bool first = true;
        size_t pos = 0;
        while (pos < word.size()) {
            size_t start = pos;
            unicode::decode(word, pos, false);
            std::string unit;
            if (marked && !first) {
                unit = std::string(kContinuationPrefix);
            }
            unit.append(word, start, pos - start);
            wt.units.push_back(intern(std::move(unit)));
            first = false;
        }
        words.push_back(std::move(wt));
    }

    std::vector<std::string> alphabet = unit_str;
    std::sort(alphabet.begin(), alphabet.end());
    if (config.vocab_size < kNumSpecials + static_cast<int>(alphabet.size())) {
        throw VocabSizeTooSmall("vocab_size " + std::to_string(config.vocab_size) +
                                " < specials + alphabet (" +
                                std::to_string(kNumSpecials + alphabet.size()) + ")");
    }

    Vocabulary vocab = make_base_vocabulary(config.marker_mode);
    for (const auto& unit : alphabet) {
        vocab.add(unit);
    }

    std::vector<long long> unit_freq(unit_str.size(), 0);
    std::unordered_map<Pair, long long, PairHash> pair_freq;
    std::unordered_map<Pair, std::vector<int>, PairHash> pair_words;
    for (size_t wi = 0; wi < words.size(); ++wi) {
        const auto& wt = words[wi];
        for (int u : wt.units) {
            unit_freq[static_cast<size_t>(u)] += wt.freq;
        }
        for (size_t i = 0; i + 1 < wt.units.size(); ++i) {
            Pair p{wt.units[i], wt.units[i + 1]};
            pair_freq[p] += wt.freq;
            pair_words[p].push_back(static_cast<int>(wi));
        }
    }

    std::vector<int> word_stamp(words.size(), -1);
    int round = 0;
    while (vocab.size() < config.vocab_size) {
        // Selection is order-independent: exact score comparison, then the
        // merged string, then the pair itself (unique) break ties.
        bool have_best = false;
        Pair best{};
        long long best_freq = 0;
        std::string best_merged;
        for (const auto& [p, freq] : pair_freq) {
            if (freq < config.min_pair_frequency) {
                continue;
            }
            long long lf = unit_freq[static_cast<size_t>(p.first)];
            long long rf = unit_freq[static_cast<size_t>(p.second)];
            if (!have_best) {
                have_best = true;
                best = p;
                best_freq = freq;
                best_merged.clear();
                continue;
            }
            long long blf = unit_freq[static_cast<size_t>(best.first)];
            long long brf = unit_freq[static_cast<size_t>(best.second)];
            if (score_greater(freq, lf, rf, best_freq, blf, brf)) {
                best = p;
                best_freq = freq;
                best_merged.clear();
            } else if (!score_greater(best_freq, blf, brf, freq, lf, rf)) {
                if (best_merged.empty()) {
                    best_merged = merge_string(unit_str[static_cast<size_t>(best.first)],
                                               unit_str[static_cast<size_t>(best.second)],
                                               config.marker_mode);
                }
                std::string merged = merge_string(unit_str[static_cast<size_t>(p.first)],
                                                  unit_str[static_cast<size_t>(p.second)],
                                                  config.marker_mode);
                auto key = [](const Pair& q, const std::vector<std::string>& us) {
                    return std::pair<const std::string&, const std::string&>(
                        us[static_cast<size_t>(q.first)], us[static_cast<size_t>(q.second)]);
                };
                if (merged < best_merged ||
                    (merged == best_merged && key(p, unit_str) < key(best, unit_str))) {
                    best = p;
                    best_freq = freq;
                    best_merged = std::move(merged);
                }
            }
        }
        if (!have_best) {
            rep.exhausted = true;
            rep.warnings.push_back("merges exhausted at vocabulary size " +
                                   std::to_string(vocab.size()) + " (target " +
                                   std::to_string(config.vocab_size) + ")");
            break;
        }

        std::string merged = merge_string(unit_str[static_cast<size_t>(best.first)],
                                          unit_str[static_cast<size_t>(best.second)],
                                          config.marker_mode);
        int merged_unit = intern(merged);
        if (merged_unit == static_cast<int>(unit_freq.size())) {
            unit_freq.push_back(0);
        }
        vocab.add(merged);  // no-op when a different merge path already produced it
        ++rep.merges;

        std::vector<int> affected = std::move(pair_words[best]);
        pair_words.erase(best);
        for (int wi : affected) {
            if (word_stamp[static_cast<size_t>(wi)] == round) {
                continue;
            }
            word_stamp[static_cast<size_t>(wi)] = round;
            auto& wt = words[static_cast<size_t>(wi)];
            bool contains = false;
            for (size_t i = 0; i + 1 < wt.units.size(); ++i) {
                if (wt.units[i] == best.first && wt.units[i + 1] == best.second) {
                    contains = true;
                    break;
                }
            }
            if (!contains) {
                continue;  // stale index entry
            }
            for (int u : wt.units) {
                unit_freq[static_cast<size_t>(u)] -= wt.freq;
            }
            for (size_t i = 0; i + 1 < wt.units.size(); ++i) {
                pair_freq[{wt.units[i], wt.units[i + 1]}] -= wt.freq;
            }
            std::vector<int> next;
            next.reserve(wt.units.size());
            for (size_t i = 0; i < wt.units.size();) {
                if (i + 1 < wt.units.size() && wt.units[i] == best.first &&
                    wt.units[i + 1] == best.second) {
                    next.push_back(merged_unit);
                    i += 2;
                } else {
                    next.push_back(wt.units[i]);
                    ++i;
                }
            }
            wt.units = std::move(next);
            for (int u : wt.units) {
                unit_freq[static_cast<size_t>(u)] += wt.freq;
            }
            for (size_t i = 0; i + 1 < wt.units.size(); ++i) {
                Pair p{wt.units[i], wt.units[i + 1]};
                pair_freq[p] += wt.freq;
                pair_words[p].push_back(wi);
            }
        }
        ++round;
    }

    vocab.validate();
    return vocab;
}

}  // namespace wordbound
