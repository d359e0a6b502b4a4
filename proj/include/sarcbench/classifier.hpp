#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sarcbench/corpus.hpp"
#include "sarcbench/io.hpp"
#include "sarcbench/nn/model.hpp"
#include "sarcbench/nn/tokenizer.hpp"
#include "sarcbench/predictions.hpp"

namespace sarc {

enum class OptimizerKind { AdamW };
enum class LossKind { CrossEntropy };

struct ClassifierConfig {
    std::string base_encoder_id;
    std::size_t num_labels = 2;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::size_t epochs = 100;
    OptimizerKind optimizer = OptimizerKind::AdamW;
    LossKind loss = LossKind::CrossEntropy;
    std::size_t max_sequence_length = 64;
    std::uint64_t seed = 42;
    // Train only the head on features from a fixed (eval-mode) encoder.
    bool freeze_encoder = false;
    double weight_decay = 0.01;
    // Global gradient-norm clipping; 0 disables it.
    double max_grad_norm = 0.0;

    void validate() const;
    json to_json() const;
    // Keys absent from j keep the values of `base`; unknown keys are rejected.
    static ClassifierConfig from_json(const json& j, const ClassifierConfig& base);
    static ClassifierConfig from_json(const json& j);
};

// Pretrained (or previously fine-tuned) encoder weights with their tokenizer.
struct EncoderBundle {
    nn::Encoder encoder;
    std::shared_ptr<const nn::Vocab> vocab;
    bool lowercase = true;
    std::string source;
};

struct TrainingLogRow {
    std::string stage;
    std::size_t epoch = 0;
    double mean_loss = 0.0;
};

struct ModelCheckpoint {
    std::shared_ptr<const EncoderBundle> encoder;
    nn::ClassificationHead head{2, 2, 0.0f};
    std::vector<std::string> provenance;
    ClassifierConfig config;
    Task task = Task::Sarcasm;
    std::vector<TrainingLogRow> training_log;

    std::size_t num_labels() const { return head.num_labels(); }
};

// base_encoder_id names a directory holding config.json (DistilBERT keys),
// model.safetensors and vocab.txt, or a saved checkpoint directory.
std::shared_ptr<const EncoderBundle> resolve_encoder(const std::string& base_encoder_id);

// Writes a randomly initialised encoder with a vocabulary built from texts,
// in the same layout resolve_encoder reads.
void init_encoder(const std::filesystem::path& dir, const nn::EncoderConfig& config,
                  std::span<const std::string> texts, std::uint64_t seed, bool lowercase = true);

// Stage label defaults to the split name.
ModelCheckpoint train(const ClassifierConfig& config, const DatasetSplit& split, std::string_view stage_label = {});

// Copies the checkpoint for another stage. On a label-count mismatch the final
// classifier layer is re-created at num_labels; the encoder is shared untouched.
ModelCheckpoint begin_fine_tune(const ModelCheckpoint& checkpoint, std::size_t num_labels,
                                const ClassifierConfig& config);

ModelCheckpoint sequential_fine_tune(const ModelCheckpoint& checkpoint, const DatasetSplit& split,
                                     const ClassifierConfig& config, std::string_view stage_label = {});

// Puts the final classifier layer of `source` on top of `checkpoint`. Used to
// score a sentiment-fine-tuned encoder on the binary sarcasm task.
ModelCheckpoint reattach_classifier(const ModelCheckpoint& checkpoint, const ModelCheckpoint& source);

// Deterministic eval-mode inference. For binary heads the score is
// P(Sarcastic) and the label is Sarcastic iff score >= 0.5.
PredictionSet predict(const ModelCheckpoint& checkpoint, std::span<const LabeledSentence> sentences,
                      std::string model_id = {}, std::string dataset_id = {});

struct FoldResult {
    std::vector<std::string> validation_ids;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
};

struct CrossValidationResult {
    std::vector<FoldResult> folds;
    double mean_train_accuracy = 0.0;
    double mean_validation_accuracy = 0.0;

    json to_json() const;
};

// Stratified fold assignment: each class is shuffled under the seed and dealt
// round-robin across folds.
std::vector<std::vector<std::size_t>> stratified_folds(const DatasetSplit& split, std::size_t k, std::uint64_t seed);

CrossValidationResult kfold_cross_validate(const ClassifierConfig& config, const DatasetSplit& split, std::size_t k);

void save_checkpoint(const std::filesystem::path& dir, const ModelCheckpoint& checkpoint);
ModelCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace sarc
