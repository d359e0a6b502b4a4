#include "sarcbench/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "sarcbench/errors.hpp"
#include "sarcbench/nn/tensor.hpp"
#include "sarcbench/rng.hpp"

namespace sarc {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kHeadInitStream = 0x68656164;  // "head"
constexpr std::uint64_t kStageStream = 0x7374616765;   // "stage"
constexpr std::uint64_t kFoldStream = 0x666f6c64;      // "fold"

std::shared_ptr<const EncoderBundle> load_bundle(const fs::path& dir, const fs::path& weights) {
    const auto config = nn::EncoderConfig::from_json(json::parse(read_text_file(dir / "config.json")));
    auto vocab = std::make_shared<const nn::Vocab>(nn::Vocab::load(dir / "vocab.txt"));
    if (vocab->size() != config.vocab_size) {
        throw DataError("vocab.txt has " + std::to_string(vocab->size()) + " entries but config.json says " +
                        std::to_string(config.vocab_size));
    }
    bool lowercase = true;
    if (fs::exists(dir / "tokenizer_config.json")) {
        lowercase = json::parse(read_text_file(dir / "tokenizer_config.json")).value("do_lower_case", true);
    }
    auto encoder = nn::Encoder::from_tensors(config, nn::load_safetensors(weights));
    return std::make_shared<const EncoderBundle>(
        EncoderBundle{std::move(encoder), std::move(vocab), lowercase, dir.string()});
}

void write_bundle_files(const fs::path& dir, const EncoderBundle& bundle, const std::string& weights_name) {
    fs::create_directories(dir);
    write_text_file(dir / "config.json", bundle.encoder.config().to_json().dump(2) + "\n");
    write_text_file(dir / "tokenizer_config.json", json{{"do_lower_case", bundle.lowercase}}.dump(2) + "\n");
    bundle.vocab->save(dir / "vocab.txt");
    nn::save_safetensors(dir / weights_name, bundle.encoder.tensors());
}

std::vector<std::vector<std::int32_t>> encode_all(const EncoderBundle& bundle,
                                                  std::span<const LabeledSentence> sentences,
                                                  std::size_t max_length) {
    const nn::WordPieceTokenizer tok(bundle.vocab, bundle.lowercase);
    max_length = std::min(max_length, bundle.encoder.config().max_position_embeddings);
    std::vector<std::vector<std::int32_t>> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        out.push_back(tok.encode(s.text, max_length));
    }
    return out;
}

nn::TokenBatch gather_batch(const EncoderBundle& bundle, const std::vector<std::vector<std::int32_t>>& ids,
                            std::span<const std::size_t> rows) {
    std::vector<std::vector<std::int32_t>> seqs;
    seqs.reserve(rows.size());
    for (auto r : rows) {
        seqs.push_back(ids[r]);
    }
    return nn::pad_batch(seqs, bundle.vocab->pad_id());
}

std::vector<nn::Parameter*> collect(nn::ClassificationHead& head, nn::Encoder* encoder) {
    std::vector<nn::Parameter*> out;
    for (auto& p : head.parameters()) {
        out.push_back(&p);
    }
    if (encoder != nullptr) {
        for (auto& p : encoder->parameters()) {
            out.push_back(&p);
        }
    }
    return out;
}

void check_split_labels(const DatasetSplit& split, std::size_t num_labels) {
    if (split.num_labels() != num_labels) {
        throw UsageError("split '" + std::string(to_string(split.name)) + "' has " +
                         std::to_string(split.num_labels()) + " labels but the model expects " +
                         std::to_string(num_labels));
    }
}

// One training stage over the split. A null encoder means the encoder is
// frozen: features are computed once in eval mode and only the head learns.
void fit(const EncoderBundle& bundle, nn::Encoder* encoder, nn::ClassificationHead& head,
         const DatasetSplit& split, const ClassifierConfig& cfg, std::uint64_t stream, const std::string& stage,
         std::vector<TrainingLogRow>& log) {
    const std::size_t n = split.size();
    const std::size_t dim = bundle.encoder.config().dim;
    const auto ids = encode_all(bundle, split.records, cfg.max_sequence_length);
    std::vector<std::int32_t> targets;
    targets.reserve(n);
    for (const auto& r : split.records) {
        targets.push_back(label_index(r.label));
    }

    std::vector<float> frozen_features;
    if (encoder == nullptr) {
        frozen_features.resize(n * dim);
        std::vector<std::size_t> rows;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            rows.resize(std::min(cfg.batch_size, n - start));
            std::iota(rows.begin(), rows.end(), start);
            const auto tb = gather_batch(bundle, ids, rows);
            const auto hidden = bundle.encoder.forward(tb, nn::Mode::Eval, nullptr, nullptr);
            const auto cls = nn::cls_rows(hidden, tb.batch, tb.seq, dim);
            std::copy(cls.begin(), cls.end(), frozen_features.begin() + static_cast<std::ptrdiff_t>(start * dim));
        }
    }

    Rng rng(mix_seed(cfg.seed, stream));
    auto params = collect(head, encoder);
    nn::AdamW optimizer({.lr = cfg.learning_rate, .weight_decay = cfg.weight_decay});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t labels = head.num_labels();

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(std::span(order), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const auto rows = std::span(order).subspan(start, std::min(cfg.batch_size, n - start));
            const std::size_t bs = rows.size();
            std::vector<std::int32_t> batch_targets;
            for (auto r : rows) {
                batch_targets.push_back(targets[r]);
            }
            nn::zero_grad(params);

            nn::TokenBatch tb;
            nn::EncoderCache ec;
            std::vector<float> features;
            if (encoder != nullptr) {
                tb = gather_batch(bundle, ids, rows);
                const auto hidden = encoder->forward(tb, nn::Mode::Train, &rng, &ec);
                features = nn::cls_rows(hidden, tb.batch, tb.seq, dim);
            } else {
                features.resize(bs * dim);
                for (std::size_t i = 0; i < bs; ++i) {
                    std::copy_n(frozen_features.begin() + static_cast<std::ptrdiff_t>(rows[i] * dim), dim,
                                features.begin() + static_cast<std::ptrdiff_t>(i * dim));
                }
            }
            nn::HeadCache hc;
            const auto logits = head.forward(features, bs, nn::Mode::Train, &rng, &hc);
            std::vector<float> dlogits(bs * labels);
            loss_sum += nn::cross_entropy(logits, batch_targets, labels, dlogits) * static_cast<double>(bs);
            const auto dcls = head.backward(hc, dlogits);
            if (encoder != nullptr) {
                encoder->backward(ec, nn::scatter_cls(dcls, tb.batch, tb.seq, dim));
            }
            if (cfg.max_grad_norm > 0.0) {
                nn::clip_grad_norm(params, cfg.max_grad_norm);
            }
            optimizer.step(params);
        }
        const double mean = loss_sum / static_cast<double>(n);
        log.push_back({stage, epoch, mean});
        spdlog::info("{} epoch {}/{} mean loss {:.6f}", stage, epoch, cfg.epochs, mean);
        if (!std::isfinite(mean)) {
            spdlog::warn("{}: loss is not finite at epoch {}", stage, epoch);
        }
    }
}

// Runs one stage on a copy of the checkpoint's encoder and head.
void run_stage(ModelCheckpoint& ckpt, const DatasetSplit& split, const ClassifierConfig& cfg,
               const std::string& stage) {
    const std::uint64_t stream = kStageStream + ckpt.provenance.size();
    if (cfg.freeze_encoder) {
        fit(*ckpt.encoder, nullptr, ckpt.head, split, cfg, stream, stage, ckpt.training_log);
        return;
    }
    nn::Encoder encoder = ckpt.encoder->encoder;
    fit(*ckpt.encoder, &encoder, ckpt.head, split, cfg, stream, stage, ckpt.training_log);
    ckpt.encoder = std::make_shared<const EncoderBundle>(
        EncoderBundle{std::move(encoder), ckpt.encoder->vocab, ckpt.encoder->lowercase, ckpt.encoder->source});
}

std::string stage_name(std::string_view kind, std::string_view label, const DatasetSplit& split) {
    return std::string(kind) + ":" + std::string(label.empty() ? to_string(split.name) : label);
}

}  // namespace

void ClassifierConfig::validate() const {
    if (num_labels < 2) {
        throw UsageError("num_labels must be at least 2");
    }
    if (batch_size < 1) {
        throw UsageError("batch_size must be at least 1");
    }
    if (epochs < 1) {
        throw UsageError("epochs must be at least 1");
    }
    if (!(learning_rate > 0.0)) {
        throw UsageError("learning_rate must be positive");
    }
    if (max_sequence_length < 2) {
        throw UsageError("max_sequence_length must be at least 2");
    }
    if (weight_decay < 0.0 || max_grad_norm < 0.0) {
        throw UsageError("weight_decay and max_grad_norm must be non-negative");
    }
}

json ClassifierConfig::to_json() const {
    return json{{"base_encoder_id", base_encoder_id},
                {"num_labels", num_labels},
                {"batch_size", batch_size},
                {"learning_rate", learning_rate},
                {"epochs", epochs},
                {"optimizer", "AdamW"},
                {"loss", "CrossEntropy"},
                {"max_sequence_length", max_sequence_length},
                {"seed", seed},
                {"freeze_encoder", freeze_encoder},
                {"weight_decay", weight_decay},
                {"max_grad_norm", max_grad_norm}};
}

ClassifierConfig ClassifierConfig::from_json(const json& j, const ClassifierConfig& base) {
    if (!j.is_object()) {
        throw UsageError("classifier config must be a JSON object");
    }
    static const std::set<std::string> known{"base_encoder_id", "num_labels", "batch_size", "learning_rate",
                                             "epochs", "optimizer", "loss", "max_sequence_length", "seed",
                                             "freeze_encoder", "weight_decay", "max_grad_norm"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw UsageError("unknown classifier config key '" + key + "'");
        }
    }
    ClassifierConfig c = base;
    try {
        c.base_encoder_id = j.value("base_encoder_id", c.base_encoder_id);
        c.num_labels = j.value("num_labels", c.num_labels);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.epochs = j.value("epochs", c.epochs);
        c.max_sequence_length = j.value("max_sequence_length", c.max_sequence_length);
        c.seed = j.value("seed", c.seed);
        c.freeze_encoder = j.value("freeze_encoder", c.freeze_encoder);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
        if (j.value("optimizer", std::string("AdamW")) != "AdamW") {
            throw UsageError("only the AdamW optimizer is supported");
        }
        if (j.value("loss", std::string("CrossEntropy")) != "CrossEntropy") {
            throw UsageError("only the CrossEntropy loss is supported");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad classifier config: ") + e.what());
    }
    c.validate();
    return c;
}

ClassifierConfig ClassifierConfig::from_json(const json& j) { return from_json(j, ClassifierConfig{}); }

std::shared_ptr<const EncoderBundle> resolve_encoder(const std::string& base_encoder_id) {
    const fs::path dir(base_encoder_id);
    if (base_encoder_id.empty() || !fs::is_directory(dir)) {
        throw DataError("cannot resolve encoder artifact '" + base_encoder_id + "': not a directory");
    }
    for (const char* weights : {"encoder.safetensors", "model.safetensors"}) {
        if (fs::exists(dir / weights) && fs::exists(dir / "config.json") && fs::exists(dir / "vocab.txt")) {
            return load_bundle(dir, dir / weights);
        }
    }
    throw DataError("cannot resolve encoder artifact '" + base_encoder_id +
                    "': expected config.json, vocab.txt and model.safetensors");
}

void init_encoder(const fs::path& dir, const nn::EncoderConfig& config, std::span<const std::string> texts,
                  std::uint64_t seed, bool lowercase) {
    auto vocab = std::make_shared<const nn::Vocab>(nn::Vocab::build(texts, config.vocab_size, lowercase));
    nn::EncoderConfig c = config;
    c.vocab_size = vocab->size();
    c.pad_token_id = vocab->pad_id();
    Rng rng(seed);
    EncoderBundle bundle{nn::Encoder::random(c, rng), vocab, lowercase, dir.string()};
    write_bundle_files(dir, bundle, "model.safetensors");
}

ModelCheckpoint train(const ClassifierConfig& config, const DatasetSplit& split, std::string_view stage_label) {
    config.validate();
    check_split_labels(split, config.num_labels);
    if (split.records.empty()) {
        throw DataError("cannot train on an empty split");
    }
    ModelCheckpoint ckpt;
    ckpt.encoder = resolve_encoder(config.base_encoder_id);
    ckpt.config = config;
    ckpt.task = split.task;
    const auto& ec = ckpt.encoder->encoder.config();
    Rng head_rng(mix_seed(config.seed, kHeadInitStream));
    ckpt.head = nn::ClassificationHead::random(ec.dim, config.num_labels, ec.seq_classif_dropout,
                                               ec.initializer_range, head_rng);
    const auto stage = stage_name("train", stage_label, split);
    run_stage(ckpt, split, config, stage);
    ckpt.provenance.push_back(stage);
    return ckpt;
}

ModelCheckpoint begin_fine_tune(const ModelCheckpoint& checkpoint, std::size_t num_labels,
                                const ClassifierConfig& config) {
    ModelCheckpoint next = checkpoint;
    next.config = config;
    next.config.base_encoder_id = checkpoint.config.base_encoder_id;
    next.config.num_labels = num_labels;
    if (num_labels != checkpoint.num_labels()) {
        const auto& ec = checkpoint.encoder->encoder.config();
        Rng rng(mix_seed(config.seed, kHeadInitStream + checkpoint.provenance.size()));
        next.head.reset_classifier(num_labels, ec.initializer_range, rng);
        spdlog::info("replaced classifier layer: {} -> {} labels", checkpoint.num_labels(), num_labels);
    }
    return next;
}

ModelCheckpoint sequential_fine_tune(const ModelCheckpoint& checkpoint, const DatasetSplit& split,
                                     const ClassifierConfig& config, std::string_view stage_label) {
    if (split.records.empty()) {
        throw DataError("cannot fine-tune on an empty split");
    }
    if (checkpoint.provenance.empty()) {
        throw UsageError("checkpoint has no provenance; train it first");
    }
    ModelCheckpoint next = begin_fine_tune(checkpoint, split.num_labels(), config);
    next.config.validate();
    next.task = split.task;
    const auto stage = stage_name("finetune", stage_label, split);
    run_stage(next, split, next.config, stage);
    next.provenance.push_back(stage);
    return next;
}

ModelCheckpoint reattach_classifier(const ModelCheckpoint& checkpoint, const ModelCheckpoint& source) {
    if (checkpoint.head.dim() != source.head.dim()) {
        throw UsageError("cannot reattach a classifier of a different width");
    }
    ModelCheckpoint next = checkpoint;
    auto tensors = checkpoint.head.tensors();
    const auto src = source.head.tensors();
    tensors["classifier.weight"] = src.at("classifier.weight");
    tensors["classifier.bias"] = src.at("classifier.bias");
    next.head = nn::ClassificationHead::from_tensors(tensors, checkpoint.encoder->encoder.config().seq_classif_dropout);
    next.task = source.task;
    next.config.num_labels = source.num_labels();
    next.provenance.push_back("reattach:" + (source.provenance.empty() ? std::string("?") : source.provenance.back()));
    return next;
}

PredictionSet predict(const ModelCheckpoint& checkpoint, std::span<const LabeledSentence> sentences,
                      std::string model_id, std::string dataset_id) {
    PredictionSet out;
    if (model_id.empty()) {
        for (const auto& p : checkpoint.provenance) {
            model_id += (model_id.empty() ? "" : ">") + p;
        }
    }
    out.model_id = std::move(model_id);
    out.dataset_id = std::move(dataset_id);
    if (sentences.empty()) {
        return out;
    }
    const Task task = sentences.front().task;
    for (const auto& s : sentences) {
        if (s.task != task) {
            throw DataError("prediction input mixes tasks");
        }
    }
    const auto labels = labels_for(task);
    if (labels.size() != checkpoint.num_labels()) {
        throw UsageError("checkpoint head has " + std::to_string(checkpoint.num_labels()) + " labels but task '" +
                         std::string(to_string(task)) + "' has " + std::to_string(labels.size()));
    }
    const auto& bundle = *checkpoint.encoder;
    const std::size_t dim = bundle.encoder.config().dim;
    const std::size_t L = labels.size();
    const auto ids = encode_all(bundle, sentences, checkpoint.config.max_sequence_length);
    const std::size_t n = sentences.size();
    const std::size_t bs = std::max<std::size_t>(checkpoint.config.batch_size, 1);
    std::vector<std::size_t> rows;
    out.entries.reserve(n);
    for (std::size_t start = 0; start < n; start += bs) {
        rows.resize(std::min(bs, n - start));
        std::iota(rows.begin(), rows.end(), start);
        const auto tb = gather_batch(bundle, ids, rows);
        const auto hidden = bundle.encoder.forward(tb, nn::Mode::Eval, nullptr, nullptr);
        const auto cls = nn::cls_rows(hidden, tb.batch, tb.seq, dim);
        const auto logits = checkpoint.head.forward(cls, rows.size(), nn::Mode::Eval, nullptr, nullptr);
        const auto probs = nn::softmax_rows(logits, rows.size(), L);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            PredictionEntry e;
            e.sentence_id = sentences[rows[i]].id;
            const auto row = std::span(probs).subspan(i * L, L);
            if (task == Task::Sarcasm) {
                const double score = row[static_cast<std::size_t>(label_index(TaskLabel::Sarcastic))];
                e.score = score;
                e.predicted = score >= 0.5 ? TaskLabel::Sarcastic : TaskLabel::NonSarcastic;
            } else {
                e.predicted = labels[static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin())];
            }
            out.entries.push_back(std::move(e));
        }
    }
    return out;
}

json CrossValidationResult::to_json() const {
    json folds_json = json::array();
    for (const auto& f : folds) {
        folds_json.push_back({{"train_accuracy", f.train_accuracy},
                              {"validation_accuracy", f.validation_accuracy},
                              {"validation_size", f.validation_ids.size()}});
    }
    return json{{"k", folds.size()},
                {"folds", folds_json},
                {"mean_train_accuracy", mean_train_accuracy},
                {"mean_validation_accuracy", mean_validation_accuracy}};
}

std::vector<std::vector<std::size_t>> stratified_folds(const DatasetSplit& split, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw UsageError("k must be at least 2");
    }
    std::vector<std::vector<std::size_t>> folds(k);
    for (const auto label : labels_for(split.task)) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < split.records.size(); ++i) {
            if (split.records[i].label == label) {
                members.push_back(i);
            }
        }
        if (members.empty()) {
            continue;
        }
        if (members.size() < k) {
            throw UsageError("k=" + std::to_string(k) + " exceeds the " + std::to_string(members.size()) +
                             " records of class '" + std::string(to_string(label)) + "'");
        }
        Rng rng(mix_seed(mix_seed(seed, kFoldStream), static_cast<std::uint64_t>(label_index(label))));
        shuffle(std::span(members), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            folds[i % k].push_back(members[i]);
        }
    }
    for (auto& f : folds) {
        std::sort(f.begin(), f.end());
    }
    return folds;
}

CrossValidationResult kfold_cross_validate(const ClassifierConfig& config, const DatasetSplit& split, std::size_t k) {
    if (split.size() < k) {
        throw UsageError("split has fewer records than folds");
    }
    const auto folds = stratified_folds(split, k, config.seed);
    const auto accuracy = [](const PredictionSet& p, std::span<const LabeledSentence> gold) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            correct += p.entries[i].predicted == gold[i].label ? 1 : 0;
        }
        return gold.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold.size());
    };
    CrossValidationResult result;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<bool> held(split.size(), false);
        std::vector<LabeledSentence> val;
        for (auto i : folds[f]) {
            held[i] = true;
            val.push_back(split.records[i]);
        }
        std::vector<LabeledSentence> tr;
        for (std::size_t i = 0; i < split.size(); ++i) {
            if (!held[i]) {
                tr.push_back(split.records[i]);
            }
        }
        const auto train_split = DatasetSplit::make(split.name, split.task, std::move(tr));
        const auto ckpt = train(config, train_split, "cv-fold-" + std::to_string(f + 1));
        FoldResult fr;
        fr.train_accuracy = accuracy(predict(ckpt, train_split.records), train_split.records);
        fr.validation_accuracy = accuracy(predict(ckpt, val), val);
        for (const auto& r : val) {
            fr.validation_ids.push_back(r.id);
        }
        spdlog::info("fold {}/{}: train accuracy {:.4f}, validation accuracy {:.4f}", f + 1, k, fr.train_accuracy,
                     fr.validation_accuracy);
        result.mean_train_accuracy += fr.train_accuracy / static_cast<double>(k);
        result.mean_validation_accuracy += fr.validation_accuracy / static_cast<double>(k);
        result.folds.push_back(std::move(fr));
    }
    return result;
}

void save_checkpoint(const fs::path& dir, const ModelCheckpoint& checkpoint) {
    if (checkpoint.provenance.empty()) {
        throw UsageError("refusing to save a checkpoint without provenance");
    }
    write_bundle_files(dir, *checkpoint.encoder, "encoder.safetensors");
    nn::save_safetensors(dir / "head.safetensors", checkpoint.head.tensors());
    json label_map = json::object();
    const auto labels = labels_for(checkpoint.task);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        label_map[std::to_string(i)] = to_string(labels[i]);
    }
    const json manifest{{"provenance", checkpoint.provenance},
                        {"config", checkpoint.config.to_json()},
                        {"task", to_string(checkpoint.task)},
                        {"head_spec", {{"num_labels", checkpoint.num_labels()}}},
                        {"label_map", label_map}};
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::string csv = "stage,epoch,mean_loss\n";
    for (const auto& row : checkpoint.training_log) {
        csv += csv_escape(row.stage) + "," + std::to_string(row.epoch) + "," + fmt::format("{:.9g}", row.mean_loss) +
               "\n";
    }
    write_text_file(dir / "train_log.csv", csv);
}

ModelCheckpoint load_checkpoint(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) {
        throw DataError("no checkpoint manifest in " + dir.string());
    }
    ModelCheckpoint ckpt;
    try {
        const auto manifest = json::parse(read_text_file(dir / "manifest.json"));
        ckpt.provenance = manifest.at("provenance").get<std::vector<std::string>>();
        ckpt.config = ClassifierConfig::from_json(manifest.at("config"));
        const auto task = parse_task(manifest.at("task").get<std::string>());
        if (!task) {
            throw DataError("checkpoint manifest names an unknown task");
        }
        ckpt.task = *task;
    } catch (const json::exception& e) {
        throw DataError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
    }
    if (ckpt.provenance.empty()) {
        throw DataError("checkpoint manifest has empty provenance");
    }
    ckpt.encoder = load_bundle(dir, dir / "encoder.safetensors");
    ckpt.head = nn::ClassificationHead::from_tensors(nn::load_safetensors(dir / "head.safetensors"),
                                                     ckpt.encoder->encoder.config().seq_classif_dropout);
    if (ckpt.head.num_labels() != ckpt.config.num_labels) {
        throw DataError("checkpoint head size disagrees with its config");
    }
    if (fs::exists(dir / "train_log.csv")) {
        const auto rows = parse_csv(read_text_file(dir / "train_log.csv"));
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].size() == 3) {
                ckpt.training_log.push_back({rows[i][0], std::stoul(rows[i][1]), std::stod(rows[i][2])});
            }
        }
    }
    return ckpt;
}

}  // namespace sarc
