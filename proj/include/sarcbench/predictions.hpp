#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sarcbench/io.hpp"
#include "sarcbench/labels.hpp"

namespace sarc {

enum class PredictionStatus { Ok, Unparseable, Error };

std::string_view to_string(PredictionStatus status);
PredictionStatus parse_prediction_status(std::string_view text);

struct PredictionEntry {
    std::string sentence_id;
    std::optional<TaskLabel> predicted;  // absent unless status == Ok
    std::optional<double> score;         // P(Sarcastic) for score-producing binary models
    PredictionStatus status = PredictionStatus::Ok;

    bool operator==(const PredictionEntry&) const = default;
};

struct PredictionSet {
    std::string model_id;
    std::string dataset_id;
    std::vector<PredictionEntry> entries;

    bool operator==(const PredictionSet&) const = default;
};

json to_json(const PredictionSet& set);
PredictionSet prediction_set_from_json(const json& obj);

void save_predictions(const std::filesystem::path& path, const PredictionSet& set);
PredictionSet load_predictions(const std::filesystem::path& path);

}  // namespace sarc
