#include "mhts/jsonl.hpp"

#include <fstream>

#include "mhts/errors.hpp"
#include "mhts/fsutil.hpp"

namespace mhts {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open jsonl file: " + path.string());
    std::vector<json> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error("malformed json at " + path.string() + ":" + std::to_string(line_no));
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::string dump_jsonl(const std::vector<json>& records) {
    std::string out;
    for (const json& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
    write_file_atomic(path, dump_jsonl(records));
}

json read_json_file(const std::filesystem::path& path) {
    std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("malformed json file: " + path.string());
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& value) {
    write_file_atomic(path, value.dump(2) + "\n");
}

}  // namespace mhts
