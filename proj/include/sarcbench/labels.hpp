#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace sarc {

enum class Task { Sarcasm, Sentiment };
enum class Language { English, Hinglish };
enum class TaskLabel { Sarcastic, NonSarcastic, Positive, Negative, Neutral };

// Wire spellings: "sarcastic", "non-sarcastic", "positive", "negative", "neutral".
std::string_view to_string(TaskLabel label);
std::optional<TaskLabel> parse_task_label(std::string_view text);

// "Sarcastic" / "Non-Sarcastic" style used in prompts and reports.
std::string_view display_name(TaskLabel label);

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view text);

// Wire spellings: "en", "hinglish".
std::string_view to_string(Language lang);
std::optional<Language> parse_language(std::string_view text);

Task task_of(TaskLabel label);

// Label order used as classifier output indices.
// Sarcasm: {NonSarcastic, Sarcastic}; Sentiment: {Negative, Neutral, Positive}.
std::span<const TaskLabel> labels_for(Task task);
int label_index(TaskLabel label);

}  // namespace sarc
