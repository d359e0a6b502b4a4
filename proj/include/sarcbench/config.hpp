#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sarcbench/io.hpp"

namespace sarc {

// Built-in defaults for every configuration key.
json default_config();

// Defaults, merged with the file (JSON merge-patch), then each "a.b.c=value"
// override; values parse as JSON when they can and as strings otherwise.
// --seed wins over everything. Unknown top-level sections are rejected.
json resolve_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                    std::optional<std::uint64_t> seed);

void apply_override(json& config, const std::string& assignment);

// Relative paths in the config resolve against this directory (the config
// file's directory, or the working directory without a file).
std::filesystem::path config_base_dir(const json& config);
std::filesystem::path config_path(const json& config, const std::string& pointer);

}  // namespace sarc
