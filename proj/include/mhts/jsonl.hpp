#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mhts {

using json = nlohmann::json;

std::vector<json> read_jsonl(const std::filesystem::path& path);

// One compact JSON object per line, written atomically. nlohmann keeps
// object keys sorted, so serialization is deterministic.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);

std::string dump_jsonl(const std::vector<json>& records);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

}  // namespace mhts
