#include <json.hpp>

// httplib pulls in system networking headers; keep it out of our headers.
#include <httplib.h>

#include "mhts/errors.hpp"
#include "mhts/providers.hpp"

namespace mhts {

using json = nlohmann::json;

namespace {

json post_json(const HttpProviderConfig& cfg, const std::string& path, const json& body) {
    httplib::Client client(cfg.endpoint);
    client.set_connection_timeout(cfg.timeout_seconds);
    client.set_read_timeout(cfg.timeout_seconds);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransientProviderError("connection failure to " + cfg.endpoint + path + ": " +
                                     httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransientProviderError("provider returned HTTP " + std::to_string(res->status) +
                                     " for " + path);
    }
    if (res->status == 401 || res->status == 403) {
        throw ProviderError("authentication failure (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
        throw ProviderError("provider returned HTTP " + std::to_string(res->status) + " for " +
                            path + ": " + res->body);
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw ProviderError("provider returned malformed JSON for " + path);
    return parsed;
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.path.empty()) cfg_.path = "/v1/chat/completions";
}

std::string HttpChatProvider::name() const { return "http:" + cfg_.model; }

std::string HttpChatProvider::chat(const std::string&, const std::map<std::string, std::string>&,
                                   const std::string& rendered_prompt, const ChatParams& params) {
    json body{{"model", params.model.empty() ? cfg_.model : params.model},
              {"temperature", params.temperature},
              {"max_tokens", params.max_output_tokens},
              {"messages", json::array({{{"role", "user"}, {"content", rendered_prompt}}})}};
    if (params.seed_hint) body["seed"] = *params.seed_hint;
    json res = post_json(cfg_, cfg_.path, body);
    try {
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ProviderError("unexpected chat completion payload shape");
    }
}

HttpEmbedProvider::HttpEmbedProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.path.empty()) cfg_.path = "/v1/embeddings";
}

std::string HttpEmbedProvider::name() const { return "http:" + cfg_.model; }

std::vector<Vec> HttpEmbedProvider::embed(const std::vector<std::string>& texts) {
    json body{{"model", cfg_.model}, {"input", texts}};
    json res = post_json(cfg_, cfg_.path, body);
    std::vector<Vec> out(texts.size());
    try {
        for (const json& item : res.at("data")) {
            size_t idx = item.at("index").get<size_t>();
            if (idx >= out.size()) throw ProviderError("embedding index out of range");
            out[idx] = item.at("embedding").get<Vec>();
        }
    } catch (const json::exception&) {
        throw ProviderError("unexpected embeddings payload shape");
    }
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i].empty()) throw ProviderError("missing embedding for input " + std::to_string(i));
    }
    return out;
}

HttpRerankProvider::HttpRerankProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.path.empty()) cfg_.path = "/v1/rerank";
}

std::string HttpRerankProvider::name() const { return "http:" + cfg_.model; }

std::vector<double> HttpRerankProvider::scores(const std::string& query,
                                               const std::vector<std::string>& docs) {
    json body{{"model", cfg_.model}, {"query", query}, {"documents", docs}};
    json res = post_json(cfg_, cfg_.path, body);
    std::vector<double> out(docs.size(), 0.0);
    try {
        for (const json& item : res.at("results")) {
            size_t idx = item.at("index").get<size_t>();
            if (idx >= out.size()) throw ProviderError("rerank index out of range");
            out[idx] = item.at("relevance_score").get<double>();
        }
    } catch (const json::exception&) {
        throw ProviderError("unexpected rerank payload shape");
    }
    return out;
}

}  // namespace mhts
