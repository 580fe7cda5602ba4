#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mhts/prompts.hpp"
#include "mhts/providers.hpp"
#include "mhts/vecmath.hpp"

namespace mhts {

using json = nlohmann::json;

enum class ProviderMode { live, record, replay };

ProviderMode provider_mode_from_string(const std::string& s);
std::string to_string(ProviderMode mode);

struct ChatRequest {
    std::string prompt_template_id;
    std::map<std::string, std::string> variables;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::optional<int64_t> seed_hint;
};

struct EmbeddingVector {
    Vec values;
    std::string model_id;
};

struct GatewaySettings {
    ProviderMode mode = ProviderMode::replay;
    std::string fixtures_dir;       // required for record/replay
    // Provider identities for request hashing. Configuration-derived so a
    // replay run (which constructs no providers) keys fixtures exactly like
    // the record run that wrote them.
    std::string chat_provider_id;
    std::string embed_provider_id;
    std::string rerank_provider_id;
    int max_retries = 4;            // retry attempts after the first call
    double backoff_base_ms = 250;   // doubles per attempt; no jitter, determinism first
    double requests_per_minute = 0; // 0 = unlimited
    bool sleep_in_tests = true;     // tests may disable real backoff sleeps
};

struct GatewayStats {
    uint64_t provider_calls = 0;
    uint64_t network_calls = 0;
    uint64_t fixture_hits = 0;
    uint64_t fixtures_written = 0;
    uint64_t cache_hits = 0;
    uint64_t retries = 0;
};

// Single front door for every model interaction. Requests are content-hashed;
// record mode persists one fixture per request, replay mode serves only from
// fixtures and never touches a provider.
class Gateway {
public:
    Gateway(GatewaySettings settings, std::shared_ptr<PromptRegistry> prompts,
            std::unique_ptr<ChatProvider> chat_provider,
            std::unique_ptr<EmbedProvider> embed_provider,
            std::unique_ptr<RerankProvider> rerank_provider, ChatParams default_chat_params = {});

    std::string chat(const ChatRequest& request);

    // Order-preserving; duplicate texts are embedded once (cache).
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);
    EmbeddingVector embed_one(const std::string& text);

    // Returns indices into `docs`, best first, exactly top_k of them.
    // With no rerank provider configured the cosine fallback is used:
    // rank by cosine(query embedding, doc embedding), ties toward the
    // lower input index.
    std::vector<int> rerank(const std::string& query, const std::vector<std::string>& docs,
                            int top_k);

    const GatewayStats& stats() const { return stats_; }
    // Attempt counts of the most recent chat call chain (for tests).
    int last_attempt_count() const { return last_attempts_.load(); }

    ProviderMode mode() const { return settings_.mode; }
    const PromptRegistry& prompts() const { return *prompts_; }
    std::string embed_model_id() const;

private:
    std::string fixture_path(const std::string& request_hash) const;
    std::optional<json> load_fixture(const std::string& request_hash) const;
    void store_fixture(const std::string& request_hash, const json& request_summary,
                       const std::string& provider, const json& response);
    json call_with_policy(const std::string& request_hash, const json& request_summary,
                          const std::string& provider_name,
                          const std::function<json()>& invoke_provider, bool network);
    // retry/backoff/rate-limit loop shared by every provider call shape
    void run_with_retries(const std::function<void()>& invoke_once, bool network);
    template <typename T>
    T invoke_with_retries(const std::function<T()>& invoke, bool network) {
        T result;
        run_with_retries([&]() { result = invoke(); }, network);
        return result;
    }
    void rate_limit_tick();

    GatewaySettings settings_;
    std::shared_ptr<PromptRegistry> prompts_;
    std::unique_ptr<ChatProvider> chat_;
    std::unique_ptr<EmbedProvider> embed_;
    std::unique_ptr<RerankProvider> rerank_;
    ChatParams default_chat_params_;

    std::mutex mutex_;
    std::unordered_map<std::string, Vec> embed_cache_;  // keyed by text sha256
    GatewayStats stats_;
    std::atomic<int> last_attempts_{0};

    // token bucket
    double bucket_tokens_ = 0;
    std::chrono::steady_clock::time_point bucket_refilled_at_;
};

}  // namespace mhts
