#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace uwrap {

using json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const json& value);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

}  // namespace uwrap
