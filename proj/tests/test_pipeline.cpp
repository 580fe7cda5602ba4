#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "mhts/config.hpp"
#include "mhts/errors.hpp"
#include "mhts/jsonl.hpp"
#include "mhts/pipeline.hpp"
#include "support/testutil.hpp"

using namespace mhts;
using mhts::test::TempDir;
namespace fs = std::filesystem;

namespace {

Config toy_config(const std::string& out_dir, const std::string& mode = "replay") {
    Config config = Config::load_file(mhts::test::repo_dir() + "/data/toy/config_toy.json");
    config.mode = mode;
    config.out_dir = out_dir;
    return config;
}

std::string toy_corpus() { return mhts::test::repo_dir() + "/data/toy/corpus.txt"; }

int run_cli(const std::string& args) {
    std::string cmd = std::string(MHTS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config precedence: file over defaults, CLI wiring over file") {
    Config defaults;
    CHECK(defaults.max_tokens == 1024);
    CHECK(defaults.theta == 0.1);
    CHECK(defaults.lambda == 1.0);
    CHECK(defaults.max_levels == 5);

    Config from_file = toy_config("unused");
    CHECK(from_file.max_tokens == 120);
    CHECK(from_file.tokenizer_id == "whitespace");
    CHECK(from_file.theta == 0.2);
    // relative data paths resolve against the config file directory
    CHECK(fs::path(from_file.fixtures_dir).is_absolute());
    CHECK(fs::exists(from_file.prompts_dir));

    // round-trip through the snapshot shape
    Config back = Config::from_json(from_file.to_json());
    CHECK(back.max_tokens == from_file.max_tokens);
    CHECK(back.judge == from_file.judge);
    CHECK(back.hash_dim == from_file.hash_dim);
}

TEST_CASE("stage ordering is enforced through declared inputs") {
    TempDir out;
    Pipeline pipeline(toy_config(out.str()), "test-run");
    CHECK_THROWS_WITH_AS(pipeline.gen_qa(), doctest::Contains("missing input"), StageError);
    CHECK_THROWS_WITH_AS(pipeline.extract(), doctest::Contains("chunks.jsonl"), StageError);
}

TEST_CASE("toy pipeline replays deterministically from committed fixtures") {
    TempDir out_a, out_b;

    auto run_into = [&](const std::string& out_dir) {
        Pipeline pipeline(toy_config(out_dir), "determinism-check");
        pipeline.run_all(toy_corpus());
        pipeline.evaluate();
        CHECK(pipeline.gateway().stats().network_calls == 0);
        return pipeline.manifest();
    };
    RunManifest first = run_into(out_a.str());
    RunManifest second = run_into(out_b.str());

    REQUIRE(first.stages.size() == 8);  // 7 core stages + evaluate
    for (const auto& [stage, record] : first.stages) {
        CHECK(record.status == "ok");
        REQUIRE(second.stages.count(stage));
        CHECK(second.stages.at(stage).artifacts == record.artifacts);
    }
}

TEST_CASE("re-running a completed stage reproduces the artifact hash") {
    TempDir out;
    Config config = toy_config(out.str());
    Pipeline pipeline(config, "rerun-check");
    pipeline.ingest(toy_corpus());
    std::string first_hash = pipeline.manifest().stages.at("ingest").artifacts.at("chunks.jsonl");
    pipeline.ingest(toy_corpus());
    CHECK(pipeline.manifest().stages.at("ingest").artifacts.at("chunks.jsonl") == first_hash);
}

TEST_CASE("a failed stage is recorded and prior artifacts survive") {
    TempDir out;
    Config config = toy_config(out.str());
    Pipeline pipeline(config, "failure-check");
    pipeline.ingest(toy_corpus());

    // break replay by pointing at an empty fixture directory
    TempDir empty_fixtures;
    config.fixtures_dir = empty_fixtures.str();
    Pipeline broken(config, "failure-check");
    CHECK_THROWS_AS(broken.extract(), ProviderError);

    RunManifest manifest = RunManifest::from_json(read_json_file(out.path() / "manifest.json"));
    CHECK(manifest.stages.at("extract").status == "failed");
    CHECK_FALSE(manifest.stages.at("extract").error.empty());
    CHECK(manifest.stages.at("ingest").status == "ok");
    CHECK(fs::exists(out.path() / "chunks.jsonl"));
}

TEST_CASE("emit joins, filters flagged pairs, honors min difficulty") {
    TempDir out;
    // hand-written artifacts, no model calls involved
    std::vector<json> qa_records{
        {{"id", "qa_a"}, {"claim_id", "a"}, {"question", "Q1?"}, {"answer", "A1"},
         {"context_chunks", {0, 1, 2}}, {"question_embedding", {1.0, 0.0}}},
        {{"id", "qa_b"}, {"claim_id", "b"}, {"question", "Q2?"}, {"answer", "A2"},
         {"context_chunks", {1, 2, 3}}, {"question_embedding", {0.0, 1.0}}},
        {{"id", "qa_c"}, {"claim_id", "c"}, {"question", "Q3?"}, {"answer", "A3"},
         {"context_chunks", {2, 3, 4}}, {"question_embedding", {1.0, 1.0}}}};
    std::vector<json> difficulty_records{
        {{"qa_id", "qa_a"}, {"h", 2}, {"s", 0.5}, {"lambda", 1.0}, {"D", 1.5},
         {"evidences", json::array()}, {"flags", json::array()}},
        {{"qa_id", "qa_b"}, {"h", 3}, {"s", 0.0}, {"lambda", 1.0}, {"D", 3.0},
         {"evidences", json::array()}, {"flags", {"no_support"}}},
        {{"qa_id", "qa_c"}, {"h", 4}, {"s", 0.2}, {"lambda", 1.0}, {"D", 3.8},
         {"evidences", json::array()}, {"flags", json::array()}}};
    write_jsonl(fs::path(out.str()) / "qa_pairs.jsonl", qa_records);
    write_jsonl(fs::path(out.str()) / "difficulty.jsonl", difficulty_records);

    Pipeline pipeline(toy_config(out.str()), "emit-check");
    pipeline.emit({});
    auto benchmark = read_jsonl(fs::path(out.str()) / "benchmark.jsonl");
    REQUIRE(benchmark.size() == 2);  // flagged qa_b dropped
    CHECK(benchmark[0].at("id") == "qa_a");
    CHECK(benchmark[1].at("id") == "qa_c");

    EmitFilters keep;
    keep.keep_flagged = true;
    pipeline.emit(keep);
    CHECK(read_jsonl(fs::path(out.str()) / "benchmark.jsonl").size() == 3);

    EmitFilters hard;
    hard.min_difficulty = 3.0;
    pipeline.emit(hard);
    auto filtered = read_jsonl(fs::path(out.str()) / "benchmark.jsonl");
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].at("id") == "qa_c");

    // join mismatch
    std::vector<json> extra = qa_records;
    extra.push_back({{"id", "qa_z"}, {"claim_id", "z"}, {"question", "Q?"}, {"answer", "A"},
                     {"context_chunks", {0, 1, 2}}, {"question_embedding", {1.0, 0.0}}});
    write_jsonl(fs::path(out.str()) / "qa_pairs.jsonl", extra);
    CHECK_THROWS_WITH_AS(pipeline.emit({}), doctest::Contains("missing from difficulty"),
                         StageError);
}

TEST_CASE("cli exit codes: usage 1, stage failure 2, provider failure 3") {
    TempDir out;
    std::string config_flag = " --config " + mhts::test::repo_dir() + "/data/toy/config_toy.json";

    CHECK(run_cli("definitely-not-a-subcommand") == 1);
    CHECK(run_cli("ingest") == 1);  // missing required --input

    // score before anything exists -> stage failure
    CHECK(run_cli("score --out " + out.str() + config_flag) == 2);

    // replay against an empty fixtures dir -> provider failure
    TempDir out2, empty_fixtures;
    CHECK(run_cli("ingest --input " + toy_corpus() + " --out " + out2.str() + config_flag) == 0);
    std::string bad_config = out2.str() + "/bad_config.json";
    {
        json c = Config::load_file(mhts::test::repo_dir() + "/data/toy/config_toy.json").to_json();
        c["gateway"]["fixtures_dir"] = empty_fixtures.str();
        std::ofstream f(bad_config);
        f << c.dump();
    }
    CHECK(run_cli("extract --out " + out2.str() + " --config " + bad_config) == 3);
}

TEST_CASE("cli run-all on the toy corpus succeeds end to end") {
    TempDir out;
    std::string config_flag = " --config " + mhts::test::repo_dir() + "/data/toy/config_toy.json";
    CHECK(run_cli("run-all --input " + toy_corpus() + " --out " + out.str() + config_flag) == 0);
    CHECK(fs::exists(out.path() / "benchmark.jsonl"));
    CHECK(fs::exists(out.path() / "manifest.json"));
    CHECK(run_cli("evaluate --out " + out.str() + config_flag) == 0);
    CHECK(fs::exists(out.path() / "winrate_report.json"));
    CHECK(fs::exists(out.path() / "winrate_points.csv"));

    // diversity over the exported embedding sets
    CHECK(run_cli("diversity --set-a " + out.str() + "/embeddings_questions.jsonl --set-b " +
                  out.str() + "/embeddings_chunks.jsonl --out " + out.str() + config_flag) == 0);
    json report = read_json_file(out.path() / "diversity_report.json");
    CHECK(report.at("set_a").at("n") == report.at("set_b").at("n"));
    CHECK(report.at("set_a").at("avg_pairwise_distance").get<double>() > 0.0);
}

TEST_CASE("evaluate can judge a seeded difficulty-stratified sample") {
    TempDir out;
    std::string config_flag = " --config " + mhts::test::repo_dir() + "/data/toy/config_toy.json";
    REQUIRE(run_cli("run-all --input " + toy_corpus() + " --out " + out.str() + config_flag) == 0);
    REQUIRE(run_cli("evaluate --out " + out.str() + config_flag +
                    " --buckets 3 --samples-per-bucket 2") == 0);

    auto retrieval = read_jsonl(fs::path(out.str()) / "retrieval.jsonl");
    auto verdicts = read_jsonl(fs::path(out.str()) / "verdicts.jsonl");
    size_t total_pairs = read_jsonl(fs::path(out.str()) / "qa_pairs.jsonl").size();
    CHECK(retrieval.size() == 6);  // 3 buckets x 2 samples
    CHECK(retrieval.size() < total_pairs);
    CHECK(verdicts.size() == retrieval.size() * 3);  // three judge metrics per pair

    // seeded: a second identical run selects the same sample
    TempDir out2;
    REQUIRE(run_cli("run-all --input " + toy_corpus() + " --out " + out2.str() + config_flag) ==
            0);
    REQUIRE(run_cli("evaluate --out " + out2.str() + config_flag +
                    " --buckets 3 --samples-per-bucket 2") == 0);
    auto retrieval2 = read_jsonl(fs::path(out2.str()) / "retrieval.jsonl");
    REQUIRE(retrieval2.size() == retrieval.size());
    for (size_t i = 0; i < retrieval.size(); ++i) {
        CHECK(retrieval2[i].at("question_id") == retrieval[i].at("question_id"));
    }
}
