#include "mhts/tree.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mhts/errors.hpp"
#include "mhts/log.hpp"
#include "mhts/text.hpp"

namespace mhts {

std::vector<Claim> generate_multihop(Gateway& gateway, const std::vector<Claim>& cluster_claims,
                                     const TreeOptions& options, int* sequence) {
    if (cluster_claims.size() < 2) {
        throw UsageError("generate_multihop: cluster must hold at least 2 claims");
    }

    std::ostringstream numbered;
    for (size_t i = 0; i < cluster_claims.size(); ++i) {
        numbered << (i + 1) << ". " << cluster_claims[i].text << "\n";
    }

    ChatRequest req;
    req.prompt_template_id = "multihop_generate";
    req.variables = {{"claims_numbered", numbered.str()},
                     {"max_statements", std::to_string(options.mh_per_cluster)}};
    req.temperature = options.temperature;
    req.max_output_tokens = options.max_output_tokens;
    std::string response = gateway.chat(req);

    auto arr = extract_first_json_array(response);
    if (!arr) {
        log_warn("multi-hop generation returned no parseable JSON array; cluster skipped");
        return {};
    }

    std::vector<Claim> out;
    for (const nlohmann::json& item : *arr) {
        if (static_cast<int>(out.size()) >= options.mh_per_cluster) break;
        if (!item.is_object() || !item.contains("text") || !item.contains("sources") ||
            !item.at("text").is_string() || !item.at("sources").is_array()) {
            log_warn("dropping malformed multi-hop statement");
            continue;
        }
        std::string text = trim(item.at("text").get<std::string>());
        std::set<int> sources;
        bool valid = !text.empty();
        for (const nlohmann::json& s : item.at("sources")) {
            if (!s.is_number_integer()) {
                valid = false;
                break;
            }
            int local = s.get<int>();
            if (local < 1 || local > static_cast<int>(cluster_claims.size())) {
                log_warn("multi-hop statement cites out-of-range source index " +
                         std::to_string(local) + "; dropped");
                valid = false;
                break;
            }
            sources.insert(local - 1);
        }
        if (!valid || sources.size() < 2) {
            if (valid) log_warn("multi-hop statement cites fewer than 2 sources; dropped");
            continue;
        }

        Claim claim;
        claim.text = text;
        claim.category = ReasoningCategory::multi_hop;
        int max_parent_level = 0;
        std::set<int> chunk_union;
        for (int local : sources) {
            const Claim& parent = cluster_claims[static_cast<size_t>(local)];
            claim.parents.push_back(parent.id);
            max_parent_level = std::max(max_parent_level, parent.level);
            chunk_union.insert(parent.source_chunks.begin(), parent.source_chunks.end());
        }
        std::sort(claim.parents.begin(), claim.parents.end());
        claim.source_chunks.assign(chunk_union.begin(), chunk_union.end());
        claim.level = max_parent_level + 1;
        claim.id = "mh" + std::to_string(claim.level) + "_" + std::to_string((*sequence)++);
        out.push_back(std::move(claim));
    }
    return out;
}

ClusterRound cluster_frontier(Gateway& gateway, const std::vector<Claim>& frontier,
                              const TreeOptions& options, uint64_t seed) {
    ClusterRound round;
    const size_t n = frontier.size();
    if (n == 0) return round;
    if (n == 1) {
        round.num_clusters = 1;
        round.members = {{0}};
        return round;
    }

    std::vector<std::string> texts;
    texts.reserve(n);
    for (const Claim& c : frontier) texts.push_back(c.text);
    std::vector<EmbeddingVector> embedded = gateway.embed(texts);
    std::vector<Vec> vectors;
    vectors.reserve(n);
    for (auto& e : embedded) vectors.push_back(std::move(e.values));

    int d = static_cast<int>(vectors[0].size());
    int d_prime = std::min({options.d_prime, d, static_cast<int>(n) - 1});
    d_prime = std::max(d_prime, 1);
    PcaResult pca = reduce_dims(vectors, d_prime);

    int k_max = options.k_max > 0
                    ? options.k_max
                    : std::max(2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
    k_max = std::min<int>(k_max, static_cast<int>(n));
    int k = select_k(pca.reduced, k_max, seed, options.gmm);
    GmmModel model = fit_gmm(pca.reduced, k, seed, options.gmm);

    round.num_clusters = k;
    round.members.assign(static_cast<size_t>(k), {});
    for (size_t i = 0; i < n; ++i) {
        Vec gamma = posterior(model, pca.reduced[i]);
        for (int cluster : soft_assign(gamma, options.theta)) {
            round.members[static_cast<size_t>(cluster)].push_back(static_cast<int>(i));
        }
    }
    return round;
}

nlohmann::json tree_options_to_json(const TreeOptions& options) {
    return nlohmann::json{{"max_levels", options.max_levels},
                          {"mh_per_cluster", options.mh_per_cluster},
                          {"min_new_claims", options.min_new_claims},
                          {"duplicate_cosine", options.duplicate_cosine},
                          {"carry_forward_unused", options.carry_forward_unused},
                          {"theta", options.theta},
                          {"d_prime", options.d_prime},
                          {"k_max", options.k_max}};
}

MhtsTree build_tree(Gateway& gateway, const std::vector<Claim>& level0,
                    const std::vector<std::vector<int>>& level0_members,
                    const TreeOptions& options, uint64_t seed, const LevelCallback& on_level) {
    if (options.max_levels < 1) throw UsageError("build_tree: max_levels must be >= 1");

    MhtsTree tree;
    tree.config = tree_options_to_json(options);
    tree.levels.emplace_back();
    for (const Claim& c : level0) {
        tree.levels[0].push_back(c.id);
        tree.nodes[c.id] = c;
    }
    if (on_level) on_level(tree);

    std::vector<Claim> frontier = level0;
    int sequence = 0;

    try {
        for (int level = 1; level <= options.max_levels; ++level) {
            ClusterRound round;
            if (level == 1 && !level0_members.empty()) {
                round = ClusterRound{};
                for (const std::vector<int>& members : level0_members) {
                    round.members.push_back(members);
                }
                round.num_clusters = static_cast<int>(level0_members.size());
            } else {
                round = cluster_frontier(gateway, frontier, options,
                                         splitmix64(seed + static_cast<uint64_t>(level)));
            }

            bool any_multi = false;
            for (const auto& members : round.members) {
                if (members.size() >= 2) any_multi = true;
            }
            if (!any_multi) {
                tree.termination_reason = "no_multi_claim_clusters";
                return tree;
            }

            std::vector<Claim> generated;
            std::set<std::string> used_parent_ids;
            for (const std::vector<int>& members : round.members) {
                if (members.size() < 2) continue;
                std::vector<Claim> cluster_claims;
                cluster_claims.reserve(members.size());
                for (int idx : members) cluster_claims.push_back(frontier[static_cast<size_t>(idx)]);
                std::vector<Claim> fresh =
                    generate_multihop(gateway, cluster_claims, options, &sequence);
                for (Claim& c : fresh) {
                    for (const std::string& pid : c.parents) used_parent_ids.insert(pid);
                    generated.push_back(std::move(c));
                }
            }

            // near-duplicate suppression within the new level
            std::vector<Claim> kept;
            if (!generated.empty()) {
                std::vector<std::string> texts;
                for (const Claim& c : generated) texts.push_back(c.text);
                std::vector<EmbeddingVector> embedded = gateway.embed(texts);
                std::vector<size_t> kept_idx;
                for (size_t i = 0; i < generated.size(); ++i) {
                    bool dup = false;
                    for (size_t j : kept_idx) {
                        if (cosine_similarity(embedded[i].values, embedded[j].values) >=
                            options.duplicate_cosine) {
                            dup = true;
                            break;
                        }
                    }
                    if (dup) {
                        log_warn("dropping near-duplicate multi-hop claim " + generated[i].id);
                    } else {
                        kept_idx.push_back(i);
                        kept.push_back(generated[i]);
                    }
                }
            }

            if (kept.empty()) {
                tree.termination_reason = "no_new_claims";
                return tree;
            }

            tree.levels.emplace_back();
            for (const Claim& c : kept) {
                tree.levels.back().push_back(c.id);
                tree.nodes[c.id] = c;
            }
            if (on_level) on_level(tree);

            if (static_cast<int>(kept.size()) < options.min_new_claims) {
                tree.termination_reason = "below_min_new_claims";
                return tree;
            }

            std::vector<Claim> next = kept;
            if (options.carry_forward_unused) {
                for (const Claim& c : frontier) {
                    if (!used_parent_ids.count(c.id)) next.push_back(c);
                }
            }
            frontier = std::move(next);
        }
        tree.termination_reason = "max_levels_reached";
    } catch (...) {
        if (on_level) on_level(tree);  // leave the partial tree behind
        throw;
    }
    return tree;
}

nlohmann::json tree_to_json(const MhtsTree& tree) {
    nlohmann::json nodes = nlohmann::json::object();
    for (const auto& [id, claim] : tree.nodes) {
        nodes[id] = {{"text", claim.text},
                     {"category", to_string(claim.category)},
                     {"level", claim.level},
                     {"parents", claim.parents},
                     {"source_chunks", claim.source_chunks}};
    }
    return nlohmann::json{{"version", 1},
                          {"levels", tree.levels},
                          {"nodes", nodes},
                          {"config", tree.config},
                          {"termination_reason", tree.termination_reason}};
}

MhtsTree tree_from_json(const nlohmann::json& j) {
    MhtsTree tree;
    tree.levels = j.at("levels").get<std::vector<std::vector<std::string>>>();
    tree.termination_reason = j.value("termination_reason", "");
    if (j.contains("config")) tree.config = j.at("config");
    for (const auto& [id, node] : j.at("nodes").items()) {
        Claim c;
        c.id = id;
        c.text = node.at("text").get<std::string>();
        auto cat = parse_category(node.at("category").get<std::string>());
        if (!cat) throw Error("tree node " + id + " carries unknown category");
        c.category = *cat;
        c.level = node.at("level").get<int>();
        c.parents = node.at("parents").get<std::vector<std::string>>();
        c.source_chunks = node.at("source_chunks").get<std::vector<int>>();
        tree.nodes[id] = std::move(c);
    }
    return tree;
}

std::vector<std::string> audit_tree(const MhtsTree& tree) {
    std::vector<std::string> violations;
    for (const auto& [id, claim] : tree.nodes) {
        if (claim.level == 0) {
            if (!claim.parents.empty()) violations.push_back(id + ": level-0 claim has parents");
            if (claim.source_chunks.size() != 1) {
                violations.push_back(id + ": level-0 claim must map to exactly one chunk");
            }
            continue;
        }
        if (claim.parents.size() < 2) {
            violations.push_back(id + ": multi-hop claim has fewer than 2 parents");
        }
        std::set<int> expected;
        for (const std::string& pid : claim.parents) {
            auto it = tree.nodes.find(pid);
            if (it == tree.nodes.end()) {
                violations.push_back(id + ": unknown parent " + pid);
                continue;
            }
            if (it->second.level >= claim.level) {
                violations.push_back(id + ": edge does not descend (parent " + pid + ")");
            }
            expected.insert(it->second.source_chunks.begin(), it->second.source_chunks.end());
        }
        std::set<int> actual(claim.source_chunks.begin(), claim.source_chunks.end());
        if (actual != expected) violations.push_back(id + ": provenance closure violated");
    }
    return violations;
}

}  // namespace mhts
