#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/config.hpp"
#include "mhts/gateway.hpp"

namespace mhts {

struct StageRecord {
    std::string status;  // ok | failed
    std::map<std::string, std::string> artifacts;  // filename -> sha256
    std::string error;
    std::string started_at;
    std::string finished_at;
};

struct RunManifest {
    std::string run_id;
    std::string provider_mode;
    uint64_t seed = 0;
    nlohmann::json config_snapshot;
    std::map<std::string, StageRecord> stages;
    nlohmann::json gateway_stats;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

struct EmitFilters {
    bool keep_flagged = false;
    std::optional<double> min_difficulty;
};

// Orchestrates the stage DAG over persisted artifacts:
//   ingest -> extract -> cluster -> build-tree -> gen-qa -> score
//   -> (evaluate | diversity | emit)
// Each completed stage writes its artifacts plus their hashes into
// <out>/manifest.json (write-temp-then-rename).
class Pipeline {
public:
    explicit Pipeline(Config config, std::string run_id = "");

    // Input paths default to the canonical artifact in the out directory.
    void ingest(const std::string& input_path);
    void extract(const std::string& chunks_path = "");
    void cluster(const std::string& claims_path = "");
    void build_tree_stage(const std::string& claims_path = "",
                          const std::string& clusters_path = "");
    void gen_qa(const std::string& tree_path = "", const std::string& chunks_path = "");
    void score(const std::string& qa_path = "", const std::string& tree_path = "",
               const std::string& chunks_path = "");
    void evaluate(const std::string& qa_path = "", const std::string& difficulty_path = "",
                  const std::string& chunks_path = "", const std::string& tree_path = "");
    void diversity(const std::string& set_a_path, const std::string& set_b_path,
                   const std::string& metric_id = "euclidean");
    void emit(const EmitFilters& filters = {});

    // The end-to-end command: ingest through score, then emit.
    void run_all(const std::string& input_path, const EmitFilters& filters = {});

    // Built on first use; stages that never talk to a model (ingest, emit,
    // diversity) run without prompts or providers configured.
    Gateway& gateway();
    const Config& config() const { return config_; }
    const RunManifest& manifest() const { return manifest_; }
    std::string artifact_path(const std::string& name) const;

private:
    void require_inputs(const std::string& stage, const std::vector<std::string>& artifacts) const;
    void run_stage(const std::string& stage, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs,
                   const std::function<void()>& body);
    void save_manifest();

    Config config_;
    RunManifest manifest_;
    std::once_flag gateway_once_;
    std::shared_ptr<PromptRegistry> prompts_;
    std::unique_ptr<Gateway> gateway_;
};

// Builds a gateway along with its providers from the resolved config.
std::unique_ptr<Gateway> make_gateway(const Config& config,
                                      std::shared_ptr<PromptRegistry> prompts);

}  // namespace mhts
