#include "sarcbench/predictions.hpp"

#include "sarcbench/errors.hpp"

namespace sarc {

std::string_view to_string(PredictionStatus status) {
    switch (status) {
    case PredictionStatus::Ok: return "ok";
    case PredictionStatus::Unparseable: return "unparseable";
    case PredictionStatus::Error: return "error";
    }
    throw std::logic_error("bad PredictionStatus");
}

PredictionStatus parse_prediction_status(std::string_view text) {
    if (text == "ok") {
        return PredictionStatus::Ok;
    }
    if (text == "unparseable") {
        return PredictionStatus::Unparseable;
    }
    if (text == "error") {
        return PredictionStatus::Error;
    }
    throw DataError("unknown prediction status '" + std::string(text) + "'");
}

json to_json(const PredictionSet& set) {
    json entries = json::array();
    for (const auto& e : set.entries) {
        json row{{"sentence_id", e.sentence_id}, {"status", to_string(e.status)}};
        row["predicted"] = e.predicted ? json(to_string(*e.predicted)) : json(nullptr);
        if (e.score) {
            row["score"] = *e.score;
        }
        entries.push_back(std::move(row));
    }
    return json{{"model_id", set.model_id}, {"dataset_id", set.dataset_id}, {"entries", std::move(entries)}};
}

PredictionSet prediction_set_from_json(const json& obj) {
    PredictionSet set;
    try {
        set.model_id = obj.at("model_id").get<std::string>();
        set.dataset_id = obj.at("dataset_id").get<std::string>();
        for (const auto& row : obj.at("entries")) {
            PredictionEntry e;
            e.sentence_id = row.at("sentence_id").get<std::string>();
            e.status = parse_prediction_status(row.at("status").get<std::string>());
            if (const auto it = row.find("predicted"); it != row.end() && !it->is_null()) {
                const auto label = parse_task_label(it->get<std::string>());
                if (!label) {
                    throw DataError("unknown predicted label '" + it->get<std::string>() + "'");
                }
                e.predicted = label;
            }
            if (const auto it = row.find("score"); it != row.end() && !it->is_null()) {
                e.score = it->get<double>();
            }
            set.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed prediction set: ") + e.what());
    }
    return set;
}

void save_predictions(const std::filesystem::path& path, const PredictionSet& set) {
    write_text_file(path, to_json(set).dump(1) + "\n");
}

PredictionSet load_predictions(const std::filesystem::path& path) {
    json obj;
    try {
        obj = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return prediction_set_from_json(obj);
}

}  // namespace sarc
