#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mhts/config.hpp"
#include "mhts/errors.hpp"
#include "mhts/log.hpp"
#include "mhts/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 usage error, 2 stage failure, 3 provider failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitStage = 2;
constexpr int kExitProvider = 3;

struct GlobalArgs {
    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::string run_id;
    bool seed_set = false;
    uint64_t seed = 0;
    bool verbose = false;
};

mhts::Config resolve_config(const GlobalArgs& args) {
    mhts::Config config =
        args.config_path.empty() ? mhts::Config{} : mhts::Config::load_file(args.config_path);
    if (!args.mode.empty()) config.mode = args.mode;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (args.seed_set) config.seed = args.seed;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mhts — multi-hop QA benchmark synthesis and RAG evaluation"};
    app.require_subcommand(1);

    GlobalArgs globals;
    app.add_option("--config", globals.config_path, "JSON config file");
    app.add_option("--mode", globals.mode, "provider mode: live|record|replay");
    app.add_option("--out", globals.out_dir, "output directory for artifacts");
    app.add_option("--run-id", globals.run_id, "explicit run id recorded in the manifest");
    app.add_option("--seed", globals.seed, "global RNG seed")
        ->each([&](const std::string&) { globals.seed_set = true; });
    app.add_flag("--verbose", globals.verbose, "debug logging");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "chunk a plaintext document");
    std::string ingest_input, ingest_tokenizer, ingest_vocab;
    int64_t ingest_max_tokens = -1;
    ingest->add_option("--input", ingest_input, "UTF-8 plaintext file")->required();
    ingest->add_option("--max-tokens", ingest_max_tokens, "chunk budget (default 1024)");
    ingest->add_option("--tokenizer", ingest_tokenizer, "tokenizer id: whitespace|bpe");
    ingest->add_option("--vocab", ingest_vocab, "vocabulary file for the bpe tokenizer");

    // extract
    auto* extract = app.add_subcommand("extract", "extract level-0 claims per chunk");
    std::string extract_chunks;
    extract->add_option("--chunks", extract_chunks, "chunks.jsonl (default: <out>/chunks.jsonl)");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "soft-cluster claims with a GMM");
    std::string cluster_claims;
    double cluster_theta = -1.0;
    cluster->add_option("--claims", cluster_claims, "claims_l0.jsonl");
    cluster->add_option("--theta", cluster_theta, "soft assignment threshold");

    // build-tree
    auto* build_tree = app.add_subcommand("build-tree", "recursive multi-hop claim synthesis");
    std::string bt_claims, bt_clusters;
    int bt_max_levels = -1;
    double bt_theta = -1.0;
    build_tree->add_option("--claims", bt_claims, "claims_l0.jsonl");
    build_tree->add_option("--clusters", bt_clusters, "clusters.jsonl");
    build_tree->add_option("--max-levels", bt_max_levels, "generation rounds cap");
    build_tree->add_option("--theta", bt_theta, "soft assignment threshold");

    // gen-qa
    auto* gen_qa = app.add_subcommand("gen-qa", "questions and grounded answers");
    std::string gq_tree, gq_chunks;
    int gq_min_level = -1, gq_max_pairs = -1;
    gen_qa->add_option("--tree", gq_tree, "tree.json");
    gen_qa->add_option("--chunks", gq_chunks, "chunks.jsonl");
    gen_qa->add_option("--min-level", gq_min_level, "lowest claim level to turn into QA");
    gen_qa->add_option("--max-pairs", gq_max_pairs, "cap on QA pairs (seeded sample)");

    // score
    auto* score = app.add_subcommand("score", "difficulty decomposition and D = h - lambda*s");
    std::string sc_qa, sc_tree, sc_chunks;
    double sc_lambda = std::nan("");
    score->add_option("--qa", sc_qa, "qa_pairs.jsonl");
    score->add_option("--tree", sc_tree, "tree.json");
    score->add_option("--chunks", sc_chunks, "chunks.jsonl");
    score->add_option("--lambda", sc_lambda, "similarity weight (default 1)");

    // diversity
    auto* diversity = app.add_subcommand("diversity", "semantic spread of two vector sets");
    std::string dv_a, dv_b, dv_metric = "euclidean";
    diversity->add_option("--set-a", dv_a, "embeddings jsonl")->required();
    diversity->add_option("--set-b", dv_b, "embeddings jsonl")->required();
    diversity->add_option("--metric", dv_metric, "euclidean|cosine_distance");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "baseline RAG + position-swapped judging");
    std::string ev_qa, ev_difficulty, ev_chunks, ev_tree, ev_judge, ev_bucketing;
    int ev_buckets = -1;
    evaluate->add_option("--qa", ev_qa, "qa_pairs.jsonl");
    evaluate->add_option("--difficulty", ev_difficulty, "difficulty.jsonl");
    evaluate->add_option("--chunks", ev_chunks, "chunks.jsonl");
    evaluate->add_option("--tree", ev_tree, "tree.json");
    evaluate->add_option("--judge", ev_judge, "gateway or synthetic:<seed>");
    evaluate->add_option("--buckets", ev_buckets, "bucket count for the win-rate table");
    int ev_samples_per_bucket = -1;
    evaluate->add_option("--samples-per-bucket", ev_samples_per_bucket,
                         "judge a seeded sample of this size per difficulty bucket (0 = all)");
    evaluate->add_option("--bucketing", ev_bucketing, "by_hop|by_difficulty_quantile");

    // emit
    auto* emit = app.add_subcommand("emit", "package the benchmark JSONL");
    bool emit_keep_flagged = false;
    double emit_min_difficulty = std::nan("");
    emit->add_flag("--keep-flagged", emit_keep_flagged, "keep no-support pairs");
    emit->add_option("--min-difficulty", emit_min_difficulty, "drop pairs below this D");

    // run-all
    auto* run_all = app.add_subcommand("run-all", "full pipeline: ingest through emit");
    std::string ra_input;
    bool ra_keep_flagged = false;
    run_all->add_option("--input", ra_input, "UTF-8 plaintext corpus")->required();
    run_all->add_flag("--keep-flagged", ra_keep_flagged, "keep no-support pairs");

    // global flags may appear after the subcommand name
    for (CLI::App* sub : {ingest, extract, cluster, build_tree, gen_qa, score, diversity,
                          evaluate, emit, run_all}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (globals.verbose) mhts::set_log_threshold(mhts::LogLevel::debug);

    try {
        mhts::Config config = resolve_config(globals);

        if (*ingest) {
            if (ingest_max_tokens > 0) config.max_tokens = ingest_max_tokens;
            if (!ingest_tokenizer.empty()) config.tokenizer_id = ingest_tokenizer;
            if (!ingest_vocab.empty()) config.vocab_path = ingest_vocab;
        }
        if (*cluster && cluster_theta >= 0) config.theta = cluster_theta;
        if (*build_tree) {
            if (bt_max_levels > 0) config.max_levels = bt_max_levels;
            if (bt_theta >= 0) config.theta = bt_theta;
        }
        if (*gen_qa) {
            if (gq_min_level >= 0) config.min_level = gq_min_level;
            if (gq_max_pairs >= 0) config.max_pairs = gq_max_pairs;
        }
        if (*score && !std::isnan(sc_lambda)) config.lambda = sc_lambda;
        if (*evaluate) {
            if (!ev_judge.empty()) config.judge = ev_judge;
            if (ev_buckets > 0) config.n_buckets = ev_buckets;
            if (ev_samples_per_bucket >= 0) config.samples_per_bucket = ev_samples_per_bucket;
            if (!ev_bucketing.empty()) config.bucketing = ev_bucketing;
        }

        mhts::Pipeline pipeline(config, globals.run_id);

        if (*ingest) pipeline.ingest(ingest_input);
        if (*extract) pipeline.extract(extract_chunks);
        if (*cluster) pipeline.cluster(cluster_claims);
        if (*build_tree) pipeline.build_tree_stage(bt_claims, bt_clusters);
        if (*gen_qa) pipeline.gen_qa(gq_tree, gq_chunks);
        if (*score) pipeline.score(sc_qa, sc_tree, sc_chunks);
        if (*diversity) pipeline.diversity(dv_a, dv_b, dv_metric);
        if (*evaluate) pipeline.evaluate(ev_qa, ev_difficulty, ev_chunks, ev_tree);
        if (*emit) {
            mhts::EmitFilters filters;
            filters.keep_flagged = emit_keep_flagged;
            if (!std::isnan(emit_min_difficulty)) filters.min_difficulty = emit_min_difficulty;
            pipeline.emit(filters);
        }
        if (*run_all) {
            mhts::EmitFilters filters;
            filters.keep_flagged = ra_keep_flagged;
            pipeline.run_all(ra_input, filters);
        }
    } catch (const mhts::ProviderError& e) {
        std::fprintf(stderr, "provider failure: %s\n", e.what());
        return kExitProvider;
    } catch (const mhts::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const mhts::StageError& e) {
        std::fprintf(stderr, "stage failure: %s\n", e.what());
        return kExitStage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stage failure: %s\n", e.what());
        return kExitStage;
    }
    return kExitOk;
}
