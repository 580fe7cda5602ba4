#include "mhts/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <thread>

#include "mhts/errors.hpp"
#include "mhts/fsutil.hpp"
#include "mhts/jsonl.hpp"
#include "mhts/log.hpp"
#include "mhts/sha256.hpp"

namespace fs = std::filesystem;

namespace mhts {

ProviderMode provider_mode_from_string(const std::string& s) {
    if (s == "live") return ProviderMode::live;
    if (s == "record") return ProviderMode::record;
    if (s == "replay") return ProviderMode::replay;
    throw UsageError("unknown provider mode: " + s + " (expected live|record|replay)");
}

std::string to_string(ProviderMode mode) {
    switch (mode) {
        case ProviderMode::live: return "live";
        case ProviderMode::record: return "record";
        case ProviderMode::replay: return "replay";
    }
    return "?";
}

namespace {

std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

Gateway::Gateway(GatewaySettings settings, std::shared_ptr<PromptRegistry> prompts,
                 std::unique_ptr<ChatProvider> chat_provider,
                 std::unique_ptr<EmbedProvider> embed_provider,
                 std::unique_ptr<RerankProvider> rerank_provider, ChatParams default_chat_params)
    : settings_(std::move(settings)),
      prompts_(std::move(prompts)),
      chat_(std::move(chat_provider)),
      embed_(std::move(embed_provider)),
      rerank_(std::move(rerank_provider)),
      default_chat_params_(std::move(default_chat_params)) {
    if (settings_.mode != ProviderMode::live && settings_.fixtures_dir.empty()) {
        throw UsageError("gateway mode '" + to_string(settings_.mode) +
                         "' requires a fixtures directory");
    }
    if (settings_.mode == ProviderMode::record && !settings_.fixtures_dir.empty()) {
        ensure_dir(settings_.fixtures_dir);
    }
    // burst capacity of roughly one second of the configured rate
    bucket_tokens_ = std::max(1.0, settings_.requests_per_minute / 60.0);
    bucket_refilled_at_ = std::chrono::steady_clock::now();
}

std::string Gateway::embed_model_id() const {
    if (!settings_.embed_provider_id.empty()) return settings_.embed_provider_id;
    return embed_ ? embed_->name() : std::string("none");
}

std::string Gateway::fixture_path(const std::string& request_hash) const {
    return (fs::path(settings_.fixtures_dir) / (request_hash + ".json")).string();
}

std::optional<json> Gateway::load_fixture(const std::string& request_hash) const {
    fs::path path = fixture_path(request_hash);
    if (!fs::exists(path)) return std::nullopt;
    return read_json_file(path);
}

void Gateway::store_fixture(const std::string& request_hash, const json& request_summary,
                            const std::string& provider, const json& response) {
    json fixture{{"request_hash", request_hash},
                 {"provider", provider},
                 {"request_summary", request_summary},
                 {"response", response},
                 {"recorded_at", now_iso8601()}};
    write_json_file(fixture_path(request_hash), fixture);
}

void Gateway::run_with_retries(const std::function<void()>& invoke_once, bool network) {
    int attempts = 0;
    while (true) {
        rate_limit_tick();
        ++attempts;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++stats_.provider_calls;
            if (network) ++stats_.network_calls;
        }
        try {
            invoke_once();
            break;
        } catch (const TransientProviderError& e) {
            if (attempts > settings_.max_retries) {
                last_attempts_.store(attempts);
                throw ProviderError(std::string("retry budget exhausted: ") + e.what());
            }
            {
                std::lock_guard<std::mutex> lock(mutex_);
                ++stats_.retries;
            }
            double delay_ms = settings_.backoff_base_ms * std::pow(2.0, attempts - 1);
            log_warn("transient provider failure (attempt " + std::to_string(attempts) +
                     "): " + e.what());
            if (settings_.sleep_in_tests && delay_ms > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(static_cast<int64_t>(delay_ms)));
            }
        }
    }
    last_attempts_.store(attempts);
}

void Gateway::rate_limit_tick() {
    if (settings_.requests_per_minute <= 0) return;
    while (true) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto now = std::chrono::steady_clock::now();
            double elapsed_s = std::chrono::duration<double>(now - bucket_refilled_at_).count();
            double capacity = std::max(1.0, settings_.requests_per_minute / 60.0);
            bucket_tokens_ = std::min(capacity,
                                      bucket_tokens_ + elapsed_s * settings_.requests_per_minute / 60.0);
            bucket_refilled_at_ = now;
            if (bucket_tokens_ >= 1.0) {
                bucket_tokens_ -= 1.0;
                return;
            }
            double deficit = 1.0 - bucket_tokens_;
            wait = std::chrono::milliseconds(
                static_cast<int64_t>(deficit * 60000.0 / settings_.requests_per_minute) + 1);
        }
        std::this_thread::sleep_for(wait);
    }
}

json Gateway::call_with_policy(const std::string& request_hash, const json& request_summary,
                               const std::string& provider_name,
                               const std::function<json()>& invoke_provider, bool network) {
    if (settings_.mode == ProviderMode::replay) {
        auto fixture = load_fixture(request_hash);
        if (!fixture) throw ProviderError("fixture missing: " + request_hash);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++stats_.fixture_hits;
        }
        return fixture->at("response");
    }
    if (settings_.mode == ProviderMode::record) {
        // A fixture already on disk short-circuits the provider, so a
        // resumed record run does not redo paid calls.
        if (auto fixture = load_fixture(request_hash)) {
            std::lock_guard<std::mutex> lock(mutex_);
            ++stats_.fixture_hits;
            return fixture->at("response");
        }
    }

    json response;
    run_with_retries([&]() { response = invoke_provider(); }, network);

    if (settings_.mode == ProviderMode::record) {
        std::lock_guard<std::mutex> lock(mutex_);
        store_fixture(request_hash, request_summary, provider_name, response);
        ++stats_.fixtures_written;
    }
    return response;
}

std::string Gateway::chat(const ChatRequest& request) {
    std::string rendered = prompts_->render(request.prompt_template_id, request.variables);

    ChatParams params = default_chat_params_;
    params.temperature = request.temperature;
    params.max_output_tokens = request.max_output_tokens;
    params.seed_hint = request.seed_hint;

    std::string provider_name = settings_.chat_provider_id.empty()
                                    ? (chat_ ? chat_->name() : std::string("none"))
                                    : settings_.chat_provider_id;
    json summary{{"kind", "chat"},
                 {"provider", provider_name},
                 {"template", request.prompt_template_id},
                 {"prompt", rendered},
                 {"params",
                  {{"temperature", params.temperature},
                   {"max_output_tokens", params.max_output_tokens},
                   {"seed_hint", params.seed_hint ? json(*params.seed_hint) : json(nullptr)}}}};
    std::string request_hash = sha256_hex(summary.dump());

    if (settings_.mode != ProviderMode::replay && !chat_) {
        throw UsageError("no chat provider configured");
    }
    json response = call_with_policy(
        request_hash, summary, provider_name,
        [&]() { return json(chat_->chat(request.prompt_template_id, request.variables, rendered,
                                        params)); },
        chat_ && chat_->uses_network());
    if (!response.is_string()) throw ProviderError("chat fixture holds a non-string response");
    return response.get<std::string>();
}

EmbeddingVector Gateway::embed_one(const std::string& text) {
    return embed(std::vector<std::string>{text})[0];
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw UsageError("embed: empty batch");
    for (const std::string& t : texts) {
        if (t.empty()) throw UsageError("embed: empty text in batch");
    }
    std::string provider_name = settings_.embed_provider_id.empty()
                                    ? (embed_ ? embed_->name() : std::string("none"))
                                    : settings_.embed_provider_id;

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> misses;          // unique texts that need a provider/fixture
    std::vector<std::string> miss_hashes;
    std::map<std::string, Vec> resolved;      // text hash -> vector

    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (const std::string& t : texts) {
            std::string h = sha256_hex(t);
            if (embed_cache_.count(h)) {
                ++stats_.cache_hits;
                resolved[h] = embed_cache_[h];
            } else if (!resolved.count(h) &&
                       std::find(miss_hashes.begin(), miss_hashes.end(), h) == miss_hashes.end()) {
                misses.push_back(t);
                miss_hashes.push_back(h);
            }
        }
    }

    // Fixtures are keyed per text so batches of any shape replay the same
    // vectors; the provider itself is called once for all remaining misses.
    std::vector<std::string> pending_texts, pending_hashes, pending_request_hashes;
    std::vector<json> pending_summaries;
    for (size_t i = 0; i < misses.size(); ++i) {
        const std::string& text = misses[i];
        const std::string& text_hash = miss_hashes[i];
        json summary{{"kind", "embed"}, {"provider", provider_name}, {"text", text}};
        std::string request_hash = sha256_hex(summary.dump());
        if (settings_.mode != ProviderMode::live) {
            if (auto fixture = load_fixture(request_hash)) {
                Vec v = fixture->at("response").get<Vec>();
                std::lock_guard<std::mutex> lock(mutex_);
                ++stats_.fixture_hits;
                embed_cache_[text_hash] = v;
                resolved[text_hash] = std::move(v);
                continue;
            }
            if (settings_.mode == ProviderMode::replay) {
                throw ProviderError("fixture missing: " + request_hash);
            }
        }
        pending_texts.push_back(text);
        pending_hashes.push_back(text_hash);
        pending_request_hashes.push_back(request_hash);
        pending_summaries.push_back(std::move(summary));
    }

    if (!pending_texts.empty()) {
        if (!embed_) throw UsageError("no embedding provider configured");
        std::vector<Vec> vectors = invoke_with_retries<std::vector<Vec>>(
            [&]() { return embed_->embed(pending_texts); }, embed_->uses_network());
        if (vectors.size() != pending_texts.size()) {
            throw ProviderError("embedding count mismatch from provider");
        }
        for (size_t i = 0; i < vectors.size(); ++i) {
            for (double x : vectors[i]) {
                if (!std::isfinite(x)) throw ProviderError("non-finite embedding value");
            }
            std::lock_guard<std::mutex> lock(mutex_);
            if (settings_.mode == ProviderMode::record) {
                store_fixture(pending_request_hashes[i], pending_summaries[i], provider_name,
                              json(vectors[i]));
                ++stats_.fixtures_written;
            }
            embed_cache_[pending_hashes[i]] = vectors[i];
            resolved[pending_hashes[i]] = std::move(vectors[i]);
        }
    }

    for (size_t i = 0; i < texts.size(); ++i) {
        out[i].values = resolved.at(sha256_hex(texts[i]));
        out[i].model_id = provider_name;
    }
    return out;
}

std::vector<int> Gateway::rerank(const std::string& query, const std::vector<std::string>& docs,
                                 int top_k) {
    if (top_k < 0 || static_cast<size_t>(top_k) > docs.size()) {
        throw UsageError("rerank: top_k out of range");
    }
    std::vector<double> scores;
    bool provider_backed = rerank_ != nullptr ||
                           (!settings_.rerank_provider_id.empty() &&
                            settings_.rerank_provider_id != "cosine_fallback" &&
                            settings_.mode == ProviderMode::replay);
    if (provider_backed) {
        if (!rerank_ && settings_.mode != ProviderMode::replay) {
            throw UsageError("no rerank provider configured");
        }
        std::string provider_name = settings_.rerank_provider_id.empty()
                                        ? rerank_->name()
                                        : settings_.rerank_provider_id;
        json summary{{"kind", "rerank"},
                     {"provider", provider_name},
                     {"query", query},
                     {"docs", docs}};
        std::string request_hash = sha256_hex(summary.dump());
        json response = call_with_policy(
            request_hash, summary, provider_name,
            [&]() { return json(rerank_->scores(query, docs)); },
            rerank_ && rerank_->uses_network());
        scores = response.get<std::vector<double>>();
        if (scores.size() != docs.size()) throw ProviderError("rerank score count mismatch");
    } else {
        // cosine fallback, deterministic and offline
        std::vector<std::string> batch;
        batch.push_back(query);
        batch.insert(batch.end(), docs.begin(), docs.end());
        std::vector<EmbeddingVector> vecs = embed(batch);
        scores.resize(docs.size());
        for (size_t i = 0; i < docs.size(); ++i) {
            scores[i] = cosine_similarity(vecs[0].values, vecs[i + 1].values);
        }
    }
    std::vector<int> order(docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    order.resize(static_cast<size_t>(top_k));
    return order;
}

}  // namespace mhts
