#pragma once

#include <map>
#include <string>
#include <vector>

namespace mhts {

// Prompt templates are plain text files (<id>.txt) with {{placeholder}}
// slots, loaded from a directory. Prompts are data: editing a template
// changes request hashes, which naturally invalidates stale fixtures.
class PromptRegistry {
public:
    explicit PromptRegistry(const std::string& dir);

    bool has(const std::string& id) const;
    const std::string& raw(const std::string& id) const;
    // Substitutes every {{name}}; throws UsageError if a placeholder has
    // no binding or the template id is unknown.
    std::string render(const std::string& id, const std::map<std::string, std::string>& vars) const;

    std::vector<std::string> ids() const;
    // sha256 of the template text; recorded in run metadata.
    std::string version(const std::string& id) const;

private:
    std::map<std::string, std::string> templates_;
    std::string dir_;
};

}  // namespace mhts
