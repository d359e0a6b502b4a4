#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sarc::nn {

// WordPiece vocabulary in the one-token-per-line vocab.txt format.
class Vocab {
public:
    explicit Vocab(std::vector<std::string> tokens);

    static Vocab load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Special tokens, then every character seen (bare and "##"-prefixed), then
    // the most frequent basic-tokenized words up to max_size entries in total.
    static Vocab build(std::span<const std::string> texts, std::size_t max_size, bool lowercase = true);

    std::optional<std::int32_t> find(std::string_view token) const;
    const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::int32_t pad_id() const { return pad_; }
    std::int32_t unk_id() const { return unk_; }
    std::int32_t cls_id() const { return cls_; }
    std::int32_t sep_id() const { return sep_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
    std::int32_t pad_ = 0;
    std::int32_t unk_ = 0;
    std::int32_t cls_ = 0;
    std::int32_t sep_ = 0;
};

// BERT-style tokenizer: clean text, split on whitespace and punctuation,
// optionally lower-case and strip accents, then greedy longest-match WordPiece.
class WordPieceTokenizer {
public:
    explicit WordPieceTokenizer(std::shared_ptr<const Vocab> vocab, bool lowercase = true);

    std::vector<std::string> basic_tokenize(std::string_view text) const;
    std::vector<std::string> wordpiece(std::string_view word) const;
    std::vector<std::string> tokenize(std::string_view text) const;

    // [CLS] pieces... [SEP], truncated so the result has at most max_length ids.
    std::vector<std::int32_t> encode(std::string_view text, std::size_t max_length) const;

    const Vocab& vocab() const { return *vocab_; }

private:
    std::shared_ptr<const Vocab> vocab_;
    bool lowercase_;
};

}  // namespace sarc::nn
