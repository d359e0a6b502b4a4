#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sarc {

using json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over the target.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Calls fn(line_number, object) for every non-blank line. Line numbers are 1-based.
// Parse failures raise DataError naming the file and line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

std::string to_jsonl(const std::vector<json>& rows);

// Hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view bytes);

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, CRLF tolerant.
std::vector<std::vector<std::string>> parse_csv(std::string_view content);
std::string csv_escape(std::string_view field);

}  // namespace sarc
