#include "sarcbench/labels.hpp"

#include <array>
#include <stdexcept>

namespace sarc {

namespace {

constexpr std::array kSarcasmLabels{TaskLabel::NonSarcastic, TaskLabel::Sarcastic};
constexpr std::array kSentimentLabels{TaskLabel::Negative, TaskLabel::Neutral, TaskLabel::Positive};

}  // namespace

std::string_view to_string(TaskLabel label) {
    switch (label) {
    case TaskLabel::Sarcastic: return "sarcastic";
    case TaskLabel::NonSarcastic: return "non-sarcastic";
    case TaskLabel::Positive: return "positive";
    case TaskLabel::Negative: return "negative";
    case TaskLabel::Neutral: return "neutral";
    }
    throw std::logic_error("bad TaskLabel");
}

std::optional<TaskLabel> parse_task_label(std::string_view text) {
    for (auto label : {TaskLabel::Sarcastic, TaskLabel::NonSarcastic, TaskLabel::Positive,
                       TaskLabel::Negative, TaskLabel::Neutral}) {
        if (text == to_string(label)) {
            return label;
        }
    }
    return std::nullopt;
}

std::string_view display_name(TaskLabel label) {
    switch (label) {
    case TaskLabel::Sarcastic: return "Sarcastic";
    case TaskLabel::NonSarcastic: return "Non-Sarcastic";
    case TaskLabel::Positive: return "Positive";
    case TaskLabel::Negative: return "Negative";
    case TaskLabel::Neutral: return "Neutral";
    }
    throw std::logic_error("bad TaskLabel");
}

std::string_view to_string(Task task) {
    return task == Task::Sarcasm ? "sarcasm" : "sentiment";
}

std::optional<Task> parse_task(std::string_view text) {
    if (text == "sarcasm") {
        return Task::Sarcasm;
    }
    if (text == "sentiment") {
        return Task::Sentiment;
    }
    return std::nullopt;
}

std::string_view to_string(Language lang) {
    return lang == Language::English ? "en" : "hinglish";
}

std::optional<Language> parse_language(std::string_view text) {
    if (text == "en") {
        return Language::English;
    }
    if (text == "hinglish") {
        return Language::Hinglish;
    }
    return std::nullopt;
}

Task task_of(TaskLabel label) {
    return label == TaskLabel::Sarcastic || label == TaskLabel::NonSarcastic ? Task::Sarcasm
                                                                              : Task::Sentiment;
}

std::span<const TaskLabel> labels_for(Task task) {
    if (task == Task::Sarcasm) {
        return kSarcasmLabels;
    }
    return kSentimentLabels;
}

int label_index(TaskLabel label) {
    const auto labels = labels_for(task_of(label));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) {
            return static_cast<int>(i);
        }
    }
    throw std::logic_error("label missing from its task");
}

}  // namespace sarc
