#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mhts/vecmath.hpp"

namespace mhts {

struct ChatParams {
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::optional<int64_t> seed_hint;
};

// The gateway hands providers both the rendered prompt (all a remote API
// needs) and the template id + raw variables (what the scripted provider
// dispatches on).
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string name() const = 0;
    virtual std::string chat(const std::string& template_id,
                             const std::map<std::string, std::string>& variables,
                             const std::string& rendered_prompt, const ChatParams& params) = 0;
    virtual bool uses_network() const { return false; }
};

class EmbedProvider {
public:
    virtual ~EmbedProvider() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Vec> embed(const std::vector<std::string>& texts) = 0;
    virtual bool uses_network() const { return false; }
};

class RerankProvider {
public:
    virtual ~RerankProvider() = default;
    virtual std::string name() const = 0;
    // Higher score = more relevant. One score per document.
    virtual std::vector<double> scores(const std::string& query,
                                       const std::vector<std::string>& docs) = 0;
    virtual bool uses_network() const { return false; }
};

// ---------------------------------------------------------------------------
// Offline deterministic providers

// Feature-hashing embedder: character trigrams and whole words hashed into
// d buckets with a sign bit, then L2-normalized. Texts sharing vocabulary
// land near each other, which is all the offline pipeline needs.
class HashEmbedProvider : public EmbedProvider {
public:
    explicit HashEmbedProvider(int dim);
    std::string name() const override;
    std::vector<Vec> embed(const std::vector<std::string>& texts) override;
    Vec embed_one(const std::string& text) const;

private:
    int dim_;
};

// Rule-based stand-in for a chat model. Produces well-formed, deterministic
// responses for every pipeline template, so fixtures for the bundled toy
// corpus can be recorded without network access.
class ScriptedChatProvider : public ChatProvider {
public:
    std::string name() const override { return "scripted"; }
    std::string chat(const std::string& template_id,
                     const std::map<std::string, std::string>& variables,
                     const std::string& rendered_prompt, const ChatParams& params) override;
};

// Test hook: wraps a std::function.
class CallbackChatProvider : public ChatProvider {
public:
    using Fn = std::function<std::string(const std::string& template_id,
                                         const std::map<std::string, std::string>& variables,
                                         const std::string& rendered_prompt)>;
    explicit CallbackChatProvider(Fn fn, std::string name = "callback")
        : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string name() const override { return name_; }
    std::string chat(const std::string& template_id,
                     const std::map<std::string, std::string>& variables,
                     const std::string& rendered_prompt, const ChatParams&) override {
        return fn_(template_id, variables, rendered_prompt);
    }

private:
    Fn fn_;
    std::string name_;
};

class CallbackEmbedProvider : public EmbedProvider {
public:
    using Fn = std::function<Vec(const std::string&)>;
    explicit CallbackEmbedProvider(Fn fn, std::string name = "callback-embed")
        : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string name() const override { return name_; }
    std::vector<Vec> embed(const std::vector<std::string>& texts) override {
        std::vector<Vec> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(fn_(t));
        return out;
    }

private:
    Fn fn_;
    std::string name_;
};

// ---------------------------------------------------------------------------
// HTTP providers (OpenAI-compatible chat/embeddings, Jina-style rerank)

struct HttpProviderConfig {
    std::string endpoint;  // e.g. "https://api.openai.com" or "http://127.0.0.1:8089"
    std::string path;      // e.g. "/v1/chat/completions"
    std::string model;
    std::string api_key;
    int timeout_seconds = 120;
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig cfg);
    std::string name() const override;
    std::string chat(const std::string& template_id,
                     const std::map<std::string, std::string>& variables,
                     const std::string& rendered_prompt, const ChatParams& params) override;
    bool uses_network() const override { return true; }

private:
    HttpProviderConfig cfg_;
};

class HttpEmbedProvider : public EmbedProvider {
public:
    explicit HttpEmbedProvider(HttpProviderConfig cfg);
    std::string name() const override;
    std::vector<Vec> embed(const std::vector<std::string>& texts) override;
    bool uses_network() const override { return true; }

private:
    HttpProviderConfig cfg_;
};

class HttpRerankProvider : public RerankProvider {
public:
    explicit HttpRerankProvider(HttpProviderConfig cfg);
    std::string name() const override;
    std::vector<double> scores(const std::string& query,
                               const std::vector<std::string>& docs) override;
    bool uses_network() const override { return true; }

private:
    HttpProviderConfig cfg_;
};

}  // namespace mhts
