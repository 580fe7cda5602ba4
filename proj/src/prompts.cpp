#include "mhts/prompts.hpp"

#include <filesystem>

#include "mhts/errors.hpp"
#include "mhts/fsutil.hpp"
#include "mhts/sha256.hpp"

namespace fs = std::filesystem;

namespace mhts {

PromptRegistry::PromptRegistry(const std::string& dir) : dir_(dir) {
    if (!fs::is_directory(dir)) throw UsageError("prompt registry directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        templates_[entry.path().stem().string()] = read_file(entry.path());
    }
    if (templates_.empty()) throw UsageError("prompt registry is empty: " + dir);
}

bool PromptRegistry::has(const std::string& id) const { return templates_.count(id) > 0; }

const std::string& PromptRegistry::raw(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw UsageError("unknown prompt template: " + id);
    return it->second;
}

std::string PromptRegistry::render(const std::string& id,
                                   const std::map<std::string, std::string>& vars) const {
    const std::string& tpl = raw(id);
    std::string out;
    out.reserve(tpl.size());
    size_t pos = 0;
    while (pos < tpl.size()) {
        size_t open = tpl.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tpl, pos, std::string::npos);
            break;
        }
        out.append(tpl, pos, open - pos);
        size_t close = tpl.find("}}", open + 2);
        if (close == std::string::npos) {
            throw UsageError("unterminated placeholder in template '" + id + "'");
        }
        std::string name = tpl.substr(open + 2, close - open - 2);
        auto it = vars.find(name);
        if (it == vars.end()) {
            throw UsageError("unbound placeholder '" + name + "' in template '" + id + "'");
        }
        out += it->second;
        pos = close + 2;
    }
    return out;
}

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(templates_.size());
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::string PromptRegistry::version(const std::string& id) const { return sha256_hex(raw(id)); }

}  // namespace mhts
