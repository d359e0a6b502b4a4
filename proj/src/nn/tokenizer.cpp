#include "sarcbench/nn/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "sarcbench/errors.hpp"
#include "sarcbench/io.hpp"
#include "sarcbench/utf8.hpp"

namespace sarc::nn {

namespace {

struct CodePair {
    char32_t from;
    char32_t to;
};
struct CodeRange {
    char32_t first;
    char32_t last;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodeRange (&table)[N], char32_t cp) {
    const auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                                     [](char32_t v, const CodeRange& r) { return v < r.first; });
    return it != std::begin(table) && cp <= std::prev(it)->last;
}

template <std::size_t N>
char32_t map_pair(const CodePair (&table)[N], char32_t cp) {
    const auto it = std::lower_bound(std::begin(table), std::end(table), cp,
                                     [](const CodePair& p, char32_t v) { return p.from < v; });
    return it != std::end(table) && it->from == cp ? it->to : cp;
}

bool is_control(char32_t cp) {
    if (cp == U'\t' || cp == U'\n' || cp == U'\r') {
        return false;
    }
    return cp < 0x10000 && in_ranges(kControlRanges, cp);
}

bool is_punctuation(char32_t cp) {
    if ((cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) || (cp >= 91 && cp <= 96) || (cp >= 123 && cp <= 126)) {
        return true;
    }
    return cp < 0x10000 && in_ranges(kPunctuationRanges, cp);
}

bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x20000 && cp <= 0x2A6DF) ||
           (cp >= 0x2A700 && cp <= 0x2B73F) || (cp >= 0x2B740 && cp <= 0x2B81F) ||
           (cp >= 0x2B820 && cp <= 0x2CEAF) || (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x2F800 && cp <= 0x2FA1F);
}

char32_t to_lower(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
    }
    return cp < 0x10000 ? map_pair(kLowerPairs, cp) : cp;
}

constexpr std::size_t kMaxCharsPerWord = 100;
constexpr std::string_view kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        index_.emplace(tokens_[i], static_cast<std::int32_t>(i));
    }
    const auto need = [&](std::string_view name) {
        const auto id = find(name);
        if (!id) {
            throw DataError("vocabulary lacks the special token " + std::string(name));
        }
        return *id;
    };
    pad_ = need("[PAD]");
    unk_ = need("[UNK]");
    cls_ = need("[CLS]");
    sep_ = need("[SEP]");
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open vocabulary " + path.string());
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        tokens.push_back(line);
    }
    return Vocab(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& t : tokens_) {
        out += t;
        out += '\n';
    }
    write_text_file(path, out);
}

Vocab Vocab::build(std::span<const std::string> texts, std::size_t max_size, bool lowercase) {
    // A throwaway tokenizer for basic splitting only needs the special tokens.
    std::vector<std::string> specials(std::begin(kSpecials), std::end(kSpecials));
    const WordPieceTokenizer splitter(std::make_shared<const Vocab>(specials), lowercase);
    std::map<std::string, std::size_t> word_freq;
    std::set<std::string> chars;
    for (const auto& text : texts) {
        for (auto& word : splitter.basic_tokenize(text)) {
            for (char32_t cp : utf8::decode(word)) {
                chars.insert(utf8::encode(std::u32string(1, cp)));
            }
            ++word_freq[std::move(word)];
        }
    }
    std::vector<std::string> tokens = specials;
    std::set<std::string> present(tokens.begin(), tokens.end());
    const auto add = [&](std::string t) {
        if (present.insert(t).second) {
            tokens.push_back(std::move(t));
        }
    };
    for (const auto& c : chars) {
        add(c);
    }
    for (const auto& c : chars) {
        add("##" + c);
    }
    std::vector<std::pair<std::string, std::size_t>> words(word_freq.begin(), word_freq.end());
    std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [w, n] : words) {
        if (tokens.size() >= max_size) {
            break;
        }
        add(std::move(w));
    }
    return Vocab(std::move(tokens));
}

std::optional<std::int32_t> Vocab::find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

WordPieceTokenizer::WordPieceTokenizer(std::shared_ptr<const Vocab> vocab, bool lowercase)
    : vocab_(std::move(vocab)), lowercase_(lowercase) {}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(std::string_view text) const {
    std::u32string cleaned;
    for (char32_t cp : utf8::decode(text)) {
        if (cp == 0 || cp == 0xFFFD || is_control(cp)) {
            continue;
        }
        if (utf8::is_whitespace(cp)) {
            cleaned.push_back(U' ');
        } else if (is_cjk(cp)) {
            cleaned += U' ';
            cleaned.push_back(cp);
            cleaned += U' ';
        } else {
            cleaned.push_back(cp);
        }
    }
    std::vector<std::string> out;
    std::u32string current;
    const auto flush = [&] {
        if (!current.empty()) {
            out.push_back(utf8::encode(current));
            current.clear();
        }
    };
    for (char32_t cp : cleaned) {
        if (cp == U' ') {
            flush();
            continue;
        }
        if (lowercase_) {
            cp = to_lower(cp);
            if (cp < 0x10000) {
                cp = map_pair(kFoldPairs, cp);
                if (in_ranges(kNonspacingMarkRanges, cp)) {
                    continue;
                }
            }
        }
        if (is_punctuation(cp)) {
            flush();
            out.push_back(utf8::encode(std::u32string(1, cp)));
            continue;
        }
        current.push_back(cp);
    }
    flush();
    return out;
}

std::vector<std::string> WordPieceTokenizer::wordpiece(std::string_view word) const {
    const std::u32string cps = utf8::decode(word);
    if (cps.size() > kMaxCharsPerWord) {
        return {"[UNK]"};
    }
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < cps.size()) {
        std::size_t end = cps.size();
        std::optional<std::string> match;
        while (start < end) {
            std::string candidate = utf8::encode(std::u32string_view(cps).substr(start, end - start));
            if (start > 0) {
                candidate = "##" + candidate;
            }
            if (vocab_->find(candidate)) {
                match = std::move(candidate);
                break;
            }
            --end;
        }
        if (!match) {
            return {"[UNK]"};
        }
        pieces.push_back(std::move(*match));
        start = end;
    }
    return pieces;
}

std::vector<std::string> WordPieceTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (const auto& word : basic_tokenize(text)) {
        for (auto& piece : wordpiece(word)) {
            out.push_back(std::move(piece));
        }
    }
    return out;
}

std::vector<std::int32_t> WordPieceTokenizer::encode(std::string_view text, std::size_t max_length) const {
    if (max_length < 2) {
        throw UsageError("max_sequence_length must leave room for [CLS] and [SEP]");
    }
    std::vector<std::int32_t> ids{vocab_->cls_id()};
    for (const auto& piece : tokenize(text)) {
        if (ids.size() + 1 >= max_length) {
            break;
        }
        ids.push_back(vocab_->find(piece).value_or(vocab_->unk_id()));
    }
    ids.push_back(vocab_->sep_id());
    return ids;
}

}  // namespace sarc::nn
