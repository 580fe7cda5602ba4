#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mhts/errors.hpp"
#include "mhts/tree.hpp"
#include "support/testutil.hpp"

using namespace mhts;

namespace {

Claim level0_claim(const std::string& id, const std::string& text, int chunk) {
    Claim c;
    c.id = id;
    c.text = text;
    c.category = ReasoningCategory::one_hop;
    c.source_chunks = {chunk};
    c.level = 0;
    return c;
}

// embeds every text near a single center with a tiny deterministic offset,
// so select_k settles on one cluster
Vec near_constant_embedding(const std::string& text) {
    double jitter = static_cast<double>(fnv1a64(text) % 977) / 977.0 * 0.01;
    return Vec{1.0 + jitter, jitter * jitter};
}

}  // namespace

TEST_CASE("generate_multihop derives parents, provenance, level") {
    Gateway gw = mhts::test::make_fake_gateway(
        [](const std::string& tpl, const std::map<std::string, std::string>&,
           const std::string&) -> std::string {
            REQUIRE(tpl == "multihop_generate");
            return R"([
              {"text": "A relates to C.", "sources": [1, 3]},
              {"text": "Solo claim.", "sources": [2]},
              {"text": "Out of range.", "sources": [1, 9]},
              {"text": "Bad sources.", "sources": ["x", 2]}
            ])";
        });
    std::vector<Claim> cluster{level0_claim("a", "Claim A.", 4), level0_claim("b", "Claim B.", 2),
                               level0_claim("c", "Claim C.", 7)};
    int seq = 0;
    auto fresh = generate_multihop(gw, cluster, {}, &seq);
    REQUIRE(fresh.size() == 1);  // the other three statements are invalid
    CHECK(fresh[0].text == "A relates to C.");
    CHECK(fresh[0].parents == std::vector<std::string>{"a", "c"});
    CHECK(fresh[0].source_chunks == std::vector<int>{4, 7});
    CHECK(fresh[0].level == 1);
    CHECK(fresh[0].category == ReasoningCategory::multi_hop);
    CHECK(fresh[0].id == "mh1_0");

    CHECK_THROWS_AS(generate_multihop(gw, {cluster[0]}, {}, &seq), UsageError);
}

TEST_CASE("generate_multihop level is one past the deepest parent") {
    Gateway gw = mhts::test::make_fake_gateway(
        [](const std::string&, const std::map<std::string, std::string>&, const std::string&) {
            return R"([{"text": "Mixed levels.", "sources": [1, 2]}])";
        });
    Claim deep = level0_claim("deep", "Deep claim.", 1);
    deep.level = 3;
    deep.parents = {"x", "y"};
    deep.source_chunks = {1, 2};
    std::vector<Claim> cluster{deep, level0_claim("shallow", "Shallow claim.", 5)};
    int seq = 0;
    auto fresh = generate_multihop(gw, cluster, {}, &seq);
    REQUIRE(fresh.size() == 1);
    CHECK(fresh[0].level == 4);
    CHECK(fresh[0].source_chunks == std::vector<int>{1, 2, 5});
}

TEST_CASE("build_tree on a hand-traceable 12-claim corpus") {
    // The scripted provider pairs claim t with t + ceil(m/2):
    //   level 1: one cluster of 12 -> statements (1,7), (2,8), (3,9)
    //   level 2: cluster of 3     -> statement (1,3); below min_new_claims -> stop
    GatewaySettings settings;
    settings.mode = ProviderMode::live;
    settings.sleep_in_tests = false;
    Gateway gw(settings, mhts::test::shared_prompts(), std::make_unique<ScriptedChatProvider>(),
               std::make_unique<CallbackEmbedProvider>(near_constant_embedding), nullptr);

    std::vector<Claim> level0;
    for (int i = 0; i < 12; ++i) {
        level0.push_back(level0_claim("c" + std::to_string(i) + "_0",
                                      "Fact number " + std::to_string(i) + " is recorded here.",
                                      i));
    }
    TreeOptions options;
    options.max_levels = 3;
    options.mh_per_cluster = 3;
    options.min_new_claims = 2;
    // the fake embedding keeps every vector nearly parallel; only exact
    // duplicates should count as duplicates here
    options.duplicate_cosine = 1.0;

    MhtsTree tree = build_tree(gw, level0, {}, options, 42);
    REQUIRE(tree.levels.size() == 3);
    CHECK(tree.levels[0].size() == 12);
    CHECK(tree.levels[1].size() == 3);
    CHECK(tree.levels[2].size() == 1);
    CHECK(tree.termination_reason == "below_min_new_claims");

    // edge count: 3 level-1 nodes x 2 parents + 1 level-2 node x 2 parents
    size_t edges = 0;
    for (const auto& [id, node] : tree.nodes) edges += node.parents.size();
    CHECK(edges == 8);
    CHECK(audit_tree(tree).empty());

    // replay determinism at the library level: same inputs, same tree
    MhtsTree again = build_tree(gw, level0, {}, options, 42);
    CHECK(tree_to_json(again) == tree_to_json(tree));
}

TEST_CASE("build_tree stops immediately when clusters are all singletons") {
    Gateway gw = mhts::test::make_fake_gateway(
        [](const std::string&, const std::map<std::string, std::string>&,
           const std::string&) -> std::string {
            FAIL("no generation call expected");
            return "";
        });
    std::vector<Claim> level0{level0_claim("a", "A.", 0), level0_claim("b", "B.", 1)};
    std::vector<std::vector<int>> memberships{{0}, {1}};  // precomputed singletons
    TreeOptions options;
    MhtsTree tree = build_tree(gw, level0, memberships, options, 1);
    CHECK(tree.levels.size() == 1);
    CHECK(tree.termination_reason == "no_multi_claim_clusters");
}

TEST_CASE("build_tree honors max_levels") {
    GatewaySettings settings;
    settings.mode = ProviderMode::live;
    settings.sleep_in_tests = false;
    Gateway gw(settings, mhts::test::shared_prompts(), std::make_unique<ScriptedChatProvider>(),
               std::make_unique<CallbackEmbedProvider>(near_constant_embedding), nullptr);
    std::vector<Claim> level0;
    for (int i = 0; i < 12; ++i) {
        level0.push_back(level0_claim("c" + std::to_string(i) + "_0",
                                      "Another fact number " + std::to_string(i) + " here.", i));
    }
    TreeOptions options;
    options.max_levels = 1;
    options.duplicate_cosine = 1.0;
    MhtsTree tree = build_tree(gw, level0, {}, options, 42);
    CHECK(tree.levels.size() <= 2);
    CHECK(tree.termination_reason == "max_levels_reached");
}

TEST_CASE("near-duplicate statements are suppressed within a level") {
    Gateway gw = mhts::test::make_fake_gateway(
        [](const std::string& tpl, const std::map<std::string, std::string>&,
           const std::string&) -> std::string {
            if (tpl != "multihop_generate") return "";
            return R"([
              {"text": "The very same statement.", "sources": [1, 2]},
              {"text": "The very same statement.", "sources": [2, 3]}
            ])";
        },
        near_constant_embedding);
    std::vector<Claim> level0{level0_claim("a", "A.", 0), level0_claim("b", "B.", 1),
                              level0_claim("c", "C.", 2)};
    std::vector<std::vector<int>> memberships{{0, 1, 2}};
    TreeOptions options;
    options.max_levels = 1;
    options.mh_per_cluster = 3;
    MhtsTree tree = build_tree(gw, level0, memberships, options, 1);
    REQUIRE(tree.levels.size() == 2);
    CHECK(tree.levels[1].size() == 1);  // identical text embeds identically -> dropped
}

TEST_CASE("tree json round-trip and audit catch corruption") {
    Gateway gw = mhts::test::make_fake_gateway(
        [](const std::string&, const std::map<std::string, std::string>&, const std::string&) {
            return R"([{"text": "AB combined.", "sources": [1, 2]}])";
        });
    std::vector<Claim> level0{level0_claim("a", "A.", 0), level0_claim("b", "B.", 1)};
    std::vector<std::vector<int>> memberships{{0, 1}};
    TreeOptions options;
    options.max_levels = 1;
    MhtsTree tree = build_tree(gw, level0, memberships, options, 1);
    MhtsTree back = tree_from_json(tree_to_json(tree));
    CHECK(tree_to_json(back) == tree_to_json(tree));
    CHECK(audit_tree(back).empty());

    back.nodes["mh1_0"].source_chunks = {0};  // break provenance closure
    auto violations = audit_tree(back);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("provenance closure") != std::string::npos);
}

TEST_CASE("carry_forward_unused returns unconsumed claims to the frontier") {
    int generation_calls = 0;
    Gateway gw = mhts::test::make_fake_gateway(
        [&](const std::string& tpl, const std::map<std::string, std::string>&,
            const std::string&) -> std::string {
            if (tpl != "multihop_generate") return "";
            ++generation_calls;
            return R"([{"text": "Round statement )" + std::to_string(generation_calls) +
                   R"(.", "sources": [1, 2]}])";
        },
        near_constant_embedding);
    std::vector<Claim> level0{level0_claim("a", "A.", 0), level0_claim("b", "B.", 1),
                              level0_claim("unused", "C.", 2)};
    std::vector<std::vector<int>> memberships{{0, 1, 2}};

    TreeOptions options;
    options.max_levels = 2;
    options.min_new_claims = 1;
    options.duplicate_cosine = 1.0;

    // default policy: the level-2 frontier is only the new claim -> singleton
    MhtsTree pure = build_tree(gw, level0, memberships, options, 3);
    CHECK(pure.levels.size() == 2);
    CHECK(pure.termination_reason == "no_multi_claim_clusters");

    // carry-forward: "unused" rejoins and can parent a level-2 statement
    options.carry_forward_unused = true;
    MhtsTree carried = build_tree(gw, level0, memberships, options, 3);
    REQUIRE(carried.levels.size() == 3);
    REQUIRE(carried.levels[2].size() == 1);
    const Claim& top = carried.nodes.at(carried.levels[2][0]);
    bool has_unused_parent = false;
    for (const std::string& pid : top.parents) {
        if (pid == "unused") has_unused_parent = true;
    }
    CHECK(has_unused_parent);
    CHECK(audit_tree(carried).empty());
}
