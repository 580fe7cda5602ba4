#include "mhts/config.hpp"

#include <filesystem>

#include "mhts/errors.hpp"
#include "mhts/jsonl.hpp"

namespace mhts {

using json = nlohmann::json;

json Config::to_json() const {
    return json{
        {"gateway",
         {{"mode", mode},
          {"chat_provider", chat_provider},
          {"chat_model", chat_model},
          {"chat_endpoint", chat_endpoint},
          {"embed_provider", embed_provider},
          {"embed_model", embed_model},
          {"embed_endpoint", embed_endpoint},
          {"hash_dim", hash_dim},
          {"rerank_provider", rerank_provider},
          {"rerank_model", rerank_model},
          {"rerank_endpoint", rerank_endpoint},
          {"api_key_env", api_key_env},
          {"fixtures_dir", fixtures_dir},
          {"prompts_dir", prompts_dir},
          {"max_retries", max_retries},
          {"backoff_base_ms", backoff_base_ms},
          {"requests_per_minute", requests_per_minute},
          {"temperature", temperature},
          {"max_output_tokens", max_output_tokens}}},
        {"corpus",
         {{"max_tokens", max_tokens}, {"tokenizer", tokenizer_id}, {"vocab_path", vocab_path}}},
        {"claims", {{"max_claims_per_chunk", max_claims_per_chunk}}},
        {"clustering",
         {{"d_prime", d_prime},
          {"theta", theta},
          {"k_max", k_max},
          {"var_floor", var_floor},
          {"em_tol", em_tol},
          {"em_max_iter", em_max_iter},
          {"em_n_init", em_n_init}}},
        {"tree",
         {{"max_levels", max_levels},
          {"mh_per_cluster", mh_per_cluster},
          {"min_new_claims", min_new_claims},
          {"duplicate_cosine", duplicate_cosine},
          {"carry_forward_unused", carry_forward_unused}}},
        {"qa", {{"min_level", min_level}, {"max_pairs", max_pairs}}},
        {"difficulty", {{"lambda", lambda}, {"adjacent_only", adjacent_only}}},
        {"eval",
         {{"n_buckets", n_buckets},
          {"samples_per_bucket", samples_per_bucket},
          {"judge", judge},
          {"bucketing", bucketing}}},
        {"run", {{"seed", seed}, {"out_dir", out_dir}, {"workers", workers}}}};
}

namespace {

template <typename T>
void pull(const json& section, const char* key, T& field) {
    if (section.contains(key)) field = section.at(key).get<T>();
}

}  // namespace

Config Config::from_json(const json& j) {
    Config c;
    if (j.contains("gateway")) {
        const json& g = j.at("gateway");
        pull(g, "mode", c.mode);
        pull(g, "chat_provider", c.chat_provider);
        pull(g, "chat_model", c.chat_model);
        pull(g, "chat_endpoint", c.chat_endpoint);
        pull(g, "embed_provider", c.embed_provider);
        pull(g, "embed_model", c.embed_model);
        pull(g, "embed_endpoint", c.embed_endpoint);
        pull(g, "hash_dim", c.hash_dim);
        pull(g, "rerank_provider", c.rerank_provider);
        pull(g, "rerank_model", c.rerank_model);
        pull(g, "rerank_endpoint", c.rerank_endpoint);
        pull(g, "api_key_env", c.api_key_env);
        pull(g, "fixtures_dir", c.fixtures_dir);
        pull(g, "prompts_dir", c.prompts_dir);
        pull(g, "max_retries", c.max_retries);
        pull(g, "backoff_base_ms", c.backoff_base_ms);
        pull(g, "requests_per_minute", c.requests_per_minute);
        pull(g, "temperature", c.temperature);
        pull(g, "max_output_tokens", c.max_output_tokens);
    }
    if (j.contains("corpus")) {
        const json& s = j.at("corpus");
        pull(s, "max_tokens", c.max_tokens);
        pull(s, "tokenizer", c.tokenizer_id);
        pull(s, "vocab_path", c.vocab_path);
    }
    if (j.contains("claims")) pull(j.at("claims"), "max_claims_per_chunk", c.max_claims_per_chunk);
    if (j.contains("clustering")) {
        const json& s = j.at("clustering");
        pull(s, "d_prime", c.d_prime);
        pull(s, "theta", c.theta);
        pull(s, "k_max", c.k_max);
        pull(s, "var_floor", c.var_floor);
        pull(s, "em_tol", c.em_tol);
        pull(s, "em_max_iter", c.em_max_iter);
        pull(s, "em_n_init", c.em_n_init);
    }
    if (j.contains("tree")) {
        const json& s = j.at("tree");
        pull(s, "max_levels", c.max_levels);
        pull(s, "mh_per_cluster", c.mh_per_cluster);
        pull(s, "min_new_claims", c.min_new_claims);
        pull(s, "duplicate_cosine", c.duplicate_cosine);
        pull(s, "carry_forward_unused", c.carry_forward_unused);
    }
    if (j.contains("qa")) {
        const json& s = j.at("qa");
        pull(s, "min_level", c.min_level);
        pull(s, "max_pairs", c.max_pairs);
    }
    if (j.contains("difficulty")) {
        const json& s = j.at("difficulty");
        pull(s, "lambda", c.lambda);
        pull(s, "adjacent_only", c.adjacent_only);
    }
    if (j.contains("eval")) {
        const json& s = j.at("eval");
        pull(s, "n_buckets", c.n_buckets);
        pull(s, "samples_per_bucket", c.samples_per_bucket);
        pull(s, "judge", c.judge);
        pull(s, "bucketing", c.bucketing);
    }
    if (j.contains("run")) {
        const json& s = j.at("run");
        pull(s, "seed", c.seed);
        pull(s, "out_dir", c.out_dir);
        pull(s, "workers", c.workers);
    }
    return c;
}

Config Config::load_file(const std::string& path) {
    Config c;
    try {
        c = from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    // data paths in a config file resolve against the file's directory, so
    // configs work from any CWD
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& field) {
        if (!field.empty() && std::filesystem::path(field).is_relative()) {
            field = (base / field).lexically_normal().string();
        }
    };
    resolve(c.fixtures_dir);
    resolve(c.prompts_dir);
    resolve(c.vocab_path);
    return c;
}

}  // namespace mhts
