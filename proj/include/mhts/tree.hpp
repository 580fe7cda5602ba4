#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/claims.hpp"
#include "mhts/clustering.hpp"
#include "mhts/gateway.hpp"

namespace mhts {

struct TreeOptions {
    int max_levels = 5;
    int mh_per_cluster = 3;        // statements requested per cluster per round
    int min_new_claims = 2;        // a smaller level ends the recursion
    double duplicate_cosine = 0.95;
    bool carry_forward_unused = false;
    double theta = 0.1;
    int d_prime = 10;
    int k_max = 0;  // 0 = max(2, floor(sqrt(n)))
    double temperature = 0.0;
    int max_output_tokens = 2048;
    GmmOptions gmm;
};

struct MhtsTree {
    std::vector<std::vector<std::string>> levels;  // level -> claim ids
    std::map<std::string, Claim> nodes;
    std::string termination_reason;
    nlohmann::json config;  // the TreeOptions the build ran with
};

nlohmann::json tree_options_to_json(const TreeOptions& options);

// Asks the model to combine claims from one cluster. Each returned statement
// must cite at least two in-range source claims; the rest of the node
// (parents, chunk provenance, level) is derived here, never trusted from the
// model.
std::vector<Claim> generate_multihop(Gateway& gateway, const std::vector<Claim>& cluster_claims,
                                     const TreeOptions& options, int* sequence);

struct ClusterRound {
    int num_clusters = 0;
    std::vector<std::vector<int>> members;  // cluster -> frontier positions
};

// Clusters a frontier of claims by embedding + PCA + GMM soft assignment.
// Small frontiers degrade gracefully (single cluster).
ClusterRound cluster_frontier(Gateway& gateway, const std::vector<Claim>& frontier,
                              const TreeOptions& options, uint64_t seed);

using LevelCallback = std::function<void(const MhtsTree&)>;

// Builds the layered structure: cluster the frontier, synthesize multi-hop
// claims per multi-member cluster, append them as the next level, repeat.
// level0_members, when non-empty, supplies the precomputed level-0
// clustering (one entry per level-0 claim). on_level, when set, runs after
// every completed level so partial progress can be persisted.
MhtsTree build_tree(Gateway& gateway, const std::vector<Claim>& level0,
                    const std::vector<std::vector<int>>& level0_members,
                    const TreeOptions& options, uint64_t seed,
                    const LevelCallback& on_level = nullptr);

nlohmann::json tree_to_json(const MhtsTree& tree);
MhtsTree tree_from_json(const nlohmann::json& j);

// Provenance closure + acyclicity + >=2 parents; returns human-readable
// violations, empty when the tree is sound.
std::vector<std::string> audit_tree(const MhtsTree& tree);

}  // namespace mhts
