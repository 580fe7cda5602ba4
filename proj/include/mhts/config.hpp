#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace mhts {

// Every knob the pipeline exposes, with its built-in default. Precedence:
// CLI flag > config file > default; the resolved snapshot lands in the run
// manifest.
struct Config {
    // gateway / providers
    std::string mode = "replay";  // live | record | replay
    std::string chat_provider = "scripted";  // scripted | http
    std::string chat_model = "gpt-4o";
    std::string chat_endpoint = "https://api.openai.com";
    std::string embed_provider = "hash";  // hash | http
    std::string embed_model = "text-embedding-3-small";
    std::string embed_endpoint = "https://api.openai.com";
    int hash_dim = 48;
    std::string rerank_provider = "cosine_fallback";  // cosine_fallback | http
    std::string rerank_model = "jina-reranker-v2-base-multilingual";
    std::string rerank_endpoint;
    std::string api_key_env = "MHTS_API_KEY";
    std::string fixtures_dir = "fixtures";
    std::string prompts_dir = "prompts";
    int max_retries = 4;
    double backoff_base_ms = 250.0;
    double requests_per_minute = 0.0;  // 0 = unlimited
    double temperature = 0.0;
    int max_output_tokens = 2048;

    // corpus
    int64_t max_tokens = 1024;
    std::string tokenizer_id = "bpe";
    std::string vocab_path;

    // claims
    int max_claims_per_chunk = 25;

    // clustering
    int d_prime = 10;
    double theta = 0.1;
    int k_max = 0;  // 0 = max(2, floor(sqrt(n)))
    double var_floor = 1e-6;
    double em_tol = 1e-6;
    int em_max_iter = 200;
    int em_n_init = 4;

    // tree
    int max_levels = 5;
    int mh_per_cluster = 3;
    int min_new_claims = 2;
    double duplicate_cosine = 0.95;
    bool carry_forward_unused = false;

    // qa
    int min_level = 1;
    int max_pairs = 0;  // 0 = all

    // difficulty
    double lambda = 1.0;
    bool adjacent_only = false;

    // eval
    int n_buckets = 5;
    int samples_per_bucket = 0;  // 0 = judge every qa pair
    std::string judge = "synthetic:42";  // gateway | synthetic:<seed>
    std::string bucketing = "by_difficulty_quantile";

    // run
    uint64_t seed = 42;
    std::string out_dir = "out";
    int workers = 1;

    nlohmann::json to_json() const;
    static Config from_json(const nlohmann::json& j);
    // defaults overlaid with the file's values
    static Config load_file(const std::string& path);
};

}  // namespace mhts
