#include "mhts/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <random>
#include <set>

#include "mhts/claims.hpp"
#include "mhts/clustering.hpp"
#include "mhts/corpus.hpp"
#include "mhts/difficulty.hpp"
#include "mhts/diversity.hpp"
#include "mhts/errors.hpp"
#include "mhts/eval.hpp"
#include "mhts/fsutil.hpp"
#include "mhts/jsonl.hpp"
#include "mhts/log.hpp"
#include "mhts/parallel.hpp"
#include "mhts/qa.hpp"
#include "mhts/sha256.hpp"
#include "mhts/text.hpp"
#include "mhts/tree.hpp"

namespace fs = std::filesystem;

namespace mhts {

namespace {

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", std::gmtime(&t));
    return buf;
}

constexpr const char* kChunks = "chunks.jsonl";
constexpr const char* kClaims = "claims_l0.jsonl";
constexpr const char* kClusters = "clusters.jsonl";
constexpr const char* kGmmModel = "gmm_model.json";
constexpr const char* kClaimEmbeds = "embeddings_claims.jsonl";
constexpr const char* kTree = "tree.json";
constexpr const char* kQaPairs = "qa_pairs.jsonl";
constexpr const char* kChunkEmbeds = "embeddings_chunks.jsonl";
constexpr const char* kQuestionEmbeds = "embeddings_questions.jsonl";
constexpr const char* kDifficulty = "difficulty.jsonl";
constexpr const char* kRetrieval = "retrieval.jsonl";
constexpr const char* kVerdicts = "verdicts.jsonl";
constexpr const char* kWinrateReport = "winrate_report.json";
constexpr const char* kWinratePoints = "winrate_points.csv";
constexpr const char* kDiversityReport = "diversity_report.json";
constexpr const char* kBenchmark = "benchmark.jsonl";

}  // namespace

nlohmann::json RunManifest::to_json() const {
    nlohmann::json stages_json = nlohmann::json::object();
    for (const auto& [name, record] : stages) {
        stages_json[name] = {{"status", record.status},
                             {"artifacts", record.artifacts},
                             {"error", record.error},
                             {"started_at", record.started_at},
                             {"finished_at", record.finished_at}};
    }
    return nlohmann::json{{"version", 1},
                          {"run_id", run_id},
                          {"provider_mode", provider_mode},
                          {"seed", seed},
                          {"config_snapshot", config_snapshot},
                          {"stages", stages_json},
                          {"gateway_stats", gateway_stats}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.run_id = j.value("run_id", "");
    m.provider_mode = j.value("provider_mode", "");
    m.seed = j.value("seed", uint64_t{0});
    if (j.contains("config_snapshot")) m.config_snapshot = j.at("config_snapshot");
    if (j.contains("gateway_stats")) m.gateway_stats = j.at("gateway_stats");
    if (j.contains("stages")) {
        for (const auto& [name, record] : j.at("stages").items()) {
            StageRecord r;
            r.status = record.value("status", "");
            r.error = record.value("error", "");
            r.started_at = record.value("started_at", "");
            r.finished_at = record.value("finished_at", "");
            if (record.contains("artifacts")) {
                r.artifacts =
                    record.at("artifacts").get<std::map<std::string, std::string>>();
            }
            m.stages[name] = std::move(r);
        }
    }
    return m;
}

std::unique_ptr<Gateway> make_gateway(const Config& config,
                                      std::shared_ptr<PromptRegistry> prompts) {
    GatewaySettings settings;
    settings.mode = provider_mode_from_string(config.mode);
    settings.fixtures_dir = config.fixtures_dir;
    settings.max_retries = config.max_retries;
    settings.backoff_base_ms = config.backoff_base_ms;
    settings.requests_per_minute = config.requests_per_minute;
    settings.chat_provider_id = config.chat_provider == "http"
                                    ? "http:" + config.chat_model
                                    : config.chat_provider;
    settings.embed_provider_id = config.embed_provider == "http"
                                     ? "http:" + config.embed_model
                                     : "hash:" + std::to_string(config.hash_dim);
    settings.rerank_provider_id = config.rerank_provider == "http"
                                      ? "http:" + config.rerank_model
                                      : "cosine_fallback";

    std::unique_ptr<ChatProvider> chat;
    std::unique_ptr<EmbedProvider> embed;
    std::unique_ptr<RerankProvider> rerank;

    if (settings.mode != ProviderMode::replay) {
        std::string api_key;
        if (const char* key = std::getenv(config.api_key_env.c_str())) api_key = key;

        if (config.chat_provider == "scripted") {
            chat = std::make_unique<ScriptedChatProvider>();
        } else if (config.chat_provider == "http") {
            HttpProviderConfig http;
            http.endpoint = config.chat_endpoint;
            http.model = config.chat_model;
            http.api_key = api_key;
            chat = std::make_unique<HttpChatProvider>(http);
        } else {
            throw UsageError("unknown chat provider: " + config.chat_provider);
        }

        if (config.embed_provider == "hash") {
            embed = std::make_unique<HashEmbedProvider>(config.hash_dim);
        } else if (config.embed_provider == "http") {
            HttpProviderConfig http;
            http.endpoint = config.embed_endpoint;
            http.model = config.embed_model;
            http.api_key = api_key;
            embed = std::make_unique<HttpEmbedProvider>(http);
        } else {
            throw UsageError("unknown embed provider: " + config.embed_provider);
        }

        if (config.rerank_provider == "cosine_fallback") {
            rerank = nullptr;
        } else if (config.rerank_provider == "http") {
            HttpProviderConfig http;
            http.endpoint = config.rerank_endpoint;
            http.model = config.rerank_model;
            http.api_key = api_key;
            rerank = std::make_unique<HttpRerankProvider>(http);
        } else {
            throw UsageError("unknown rerank provider: " + config.rerank_provider);
        }
    }

    ChatParams defaults;
    defaults.model = config.chat_model;
    defaults.temperature = config.temperature;
    defaults.max_output_tokens = config.max_output_tokens;

    return std::make_unique<Gateway>(settings, std::move(prompts), std::move(chat),
                                     std::move(embed), std::move(rerank), defaults);
}

Pipeline::Pipeline(Config config, std::string run_id) : config_(std::move(config)) {
    ensure_dir(config_.out_dir);

    fs::path manifest_path = fs::path(config_.out_dir) / "manifest.json";
    if (fs::exists(manifest_path)) {
        manifest_ = RunManifest::from_json(read_json_file(manifest_path));
    }
    if (!run_id.empty()) manifest_.run_id = run_id;
    if (manifest_.run_id.empty()) manifest_.run_id = "run-" + timestamp_now();
    manifest_.provider_mode = config_.mode;
    manifest_.seed = config_.seed;
    manifest_.config_snapshot = config_.to_json();

}

Gateway& Pipeline::gateway() {
    std::call_once(gateway_once_, [&]() {
        prompts_ = std::make_shared<PromptRegistry>(config_.prompts_dir);
        gateway_ = make_gateway(config_, prompts_);
    });
    return *gateway_;
}

std::string Pipeline::artifact_path(const std::string& name) const {
    return (fs::path(config_.out_dir) / name).string();
}

void Pipeline::save_manifest() {
    if (gateway_) {
        const GatewayStats& stats = gateway().stats();
        manifest_.gateway_stats = {{"provider_calls", stats.provider_calls},
                                   {"network_calls", stats.network_calls},
                                   {"fixture_hits", stats.fixture_hits},
                                   {"fixtures_written", stats.fixtures_written},
                                   {"cache_hits", stats.cache_hits},
                                   {"retries", stats.retries}};
    }
    write_json_file(fs::path(config_.out_dir) / "manifest.json", manifest_.to_json());
}

void Pipeline::require_inputs(const std::string& stage,
                              const std::vector<std::string>& paths) const {
    for (const std::string& path : paths) {
        if (!fs::exists(path)) {
            throw StageError("stage '" + stage + "' missing input: " +
                             fs::path(path).filename().string());
        }
    }
}

void Pipeline::run_stage(const std::string& stage, const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs,
                         const std::function<void()>& body) {
    require_inputs(stage, inputs);
    StageRecord record;
    record.started_at = timestamp_now();
    log_info("stage " + stage + " started");
    try {
        body();
    } catch (const std::exception& e) {
        record.status = "failed";
        record.error = e.what();
        record.finished_at = timestamp_now();
        manifest_.stages[stage] = record;
        save_manifest();
        log_error("stage " + stage + " failed: " + std::string(e.what()));
        throw;
    }
    record.status = "ok";
    record.finished_at = timestamp_now();
    for (const std::string& name : outputs) {
        record.artifacts[name] = sha256_file_hex(artifact_path(name));
    }
    manifest_.stages[stage] = record;
    save_manifest();
    log_info("stage " + stage + " finished");
}

// ---------------------------------------------------------------------------
// stages

void Pipeline::ingest(const std::string& input_path) {
    run_stage("ingest", {}, {kChunks}, [&]() {
        auto tokenizer = make_tokenizer(config_.tokenizer_id, config_.vocab_path);
        Document doc = load_document(input_path);
        std::vector<Paragraph> paragraphs = split_paragraphs(doc, *tokenizer);
        std::vector<Chunk> chunks = pack_chunks(paragraphs, *tokenizer, config_.max_tokens);
        std::vector<json> records;
        records.reserve(chunks.size());
        for (const Chunk& c : chunks) records.push_back(chunk_to_json(c));
        write_jsonl(artifact_path(kChunks), records);
        log_info("ingest: " + std::to_string(paragraphs.size()) + " paragraphs -> " +
                 std::to_string(chunks.size()) + " chunks");
    });
}

void Pipeline::extract(const std::string& chunks_path) {
    const std::string chunks_in = chunks_path.empty() ? artifact_path(kChunks) : chunks_path;
    run_stage("extract", {chunks_in}, {kClaims}, [&]() {
        std::vector<Chunk> chunks;
        for (const json& j : read_jsonl(chunks_in)) {
            chunks.push_back(chunk_from_json(j));
        }
        ClaimsOptions options;
        options.max_claims_per_chunk = config_.max_claims_per_chunk;
        options.temperature = config_.temperature;
        options.max_output_tokens = config_.max_output_tokens;

        std::vector<std::vector<Claim>> per_chunk(chunks.size());
        parallel_for(chunks.size(), config_.workers, [&](size_t i) {
            per_chunk[i] = extract_claims(gateway(), chunks[i], options);
        });

        std::vector<json> records;
        size_t flagged = 0;
        for (size_t i = 0; i < per_chunk.size(); ++i) {
            for (const Claim& c : per_chunk[i]) {
                ClaimValidationReport validation = validate_claim(c, chunks[i]);
                if (!validation.ok()) {
                    ++flagged;
                    std::string flags;
                    for (const std::string& f : validation.flags) flags += " " + f;
                    log_warn("claim " + c.id + " flagged:" + flags);
                }
                records.push_back(claim_to_json(c));
            }
        }
        if (flagged > 0) {
            log_info("extract: " + std::to_string(flagged) + " claims carry advisory flags");
        }
        write_jsonl(artifact_path(kClaims), records);
        log_info("extract: " + std::to_string(records.size()) + " claims");
    });
}

void Pipeline::cluster(const std::string& claims_path) {
    const std::string claims_in = claims_path.empty() ? artifact_path(kClaims) : claims_path;
    run_stage("cluster", {claims_in}, {kClusters, kGmmModel, kClaimEmbeds}, [&]() {
        std::vector<Claim> claims;
        for (const json& j : read_jsonl(claims_in)) {
            claims.push_back(claim_from_json(j));
        }
        if (claims.empty()) throw StageError("cluster: no claims to cluster");

        std::vector<std::string> texts;
        texts.reserve(claims.size());
        for (const Claim& c : claims) texts.push_back(c.text);
        std::vector<EmbeddingVector> embedded = gateway().embed(texts);

        std::vector<LabeledEmbedding> claim_embeds;
        for (size_t i = 0; i < claims.size(); ++i) {
            claim_embeds.push_back({"claim_l0", claims[i].id, embedded[i].values});
        }
        export_embeddings(claim_embeds, artifact_path(kClaimEmbeds));

        std::vector<Vec> vectors;
        vectors.reserve(claims.size());
        for (auto& e : embedded) vectors.push_back(std::move(e.values));

        GmmOptions gmm_options;
        gmm_options.tol = config_.em_tol;
        gmm_options.max_iter = config_.em_max_iter;
        gmm_options.var_floor = config_.var_floor;
        gmm_options.n_init = config_.em_n_init;

        std::vector<json> cluster_records;
        json model_json;
        if (claims.size() < 2) {
            // degenerate corpus: one cluster, trivial model
            cluster_records.push_back(soft_assignment_to_json(
                SoftAssignment{claims[0].id, Vec{1.0}, std::vector<int>{0}}));
            model_json = json{{"num_components", 1}, {"degenerate", true}};
        } else {
            int d = static_cast<int>(vectors[0].size());
            int d_prime = std::clamp(config_.d_prime, 1,
                                     std::min(d, static_cast<int>(claims.size()) - 1));
            PcaResult pca = reduce_dims(vectors, d_prime);
            int k_max = config_.k_max > 0
                            ? config_.k_max
                            : std::max(2, static_cast<int>(std::floor(
                                              std::sqrt(static_cast<double>(claims.size())))));
            k_max = std::min<int>(k_max, static_cast<int>(claims.size()));
            int k = select_k(pca.reduced, k_max, config_.seed, gmm_options);
            GmmModel model = fit_gmm(pca.reduced, k, config_.seed, gmm_options);
            for (size_t i = 0; i < claims.size(); ++i) {
                Vec gamma = posterior(model, pca.reduced[i]);
                SoftAssignment assignment;
                assignment.claim_id = claims[i].id;
                assignment.posteriors = gamma;
                assignment.member_of = soft_assign(gamma, config_.theta);
                cluster_records.push_back(soft_assignment_to_json(assignment));
            }
            model_json = gmm_model_to_json(model, pca.projection, config_.theta);
            model_json["fit_options"] = {{"tol", gmm_options.tol},
                                         {"max_iter", gmm_options.max_iter},
                                         {"var_floor", gmm_options.var_floor},
                                         {"n_init", gmm_options.n_init},
                                         {"d_prime", d_prime},
                                         {"k_max", k_max}};
            log_info("cluster: K=" + std::to_string(k) + " over " +
                     std::to_string(claims.size()) + " claims");
        }
        write_jsonl(artifact_path(kClusters), cluster_records);
        write_json_file(artifact_path(kGmmModel), model_json);
    });
}

void Pipeline::build_tree_stage(const std::string& claims_path,
                                const std::string& clusters_path) {
    const std::string claims_in = claims_path.empty() ? artifact_path(kClaims) : claims_path;
    const std::string clusters_in =
        clusters_path.empty() ? artifact_path(kClusters) : clusters_path;
    run_stage("build-tree", {claims_in, clusters_in}, {kTree}, [&]() {
        std::vector<Claim> claims;
        for (const json& j : read_jsonl(claims_in)) {
            claims.push_back(claim_from_json(j));
        }
        std::map<std::string, size_t> position;
        for (size_t i = 0; i < claims.size(); ++i) position[claims[i].id] = i;

        // translate persisted level-0 memberships into per-cluster member lists
        std::map<int, std::vector<int>> members_by_cluster;
        for (const json& j : read_jsonl(clusters_in)) {
            SoftAssignment a = soft_assignment_from_json(j);
            auto it = position.find(a.claim_id);
            if (it == position.end()) {
                throw StageError("build-tree: cluster record for unknown claim " + a.claim_id);
            }
            for (int cluster : a.member_of) {
                members_by_cluster[cluster].push_back(static_cast<int>(it->second));
            }
        }
        std::vector<std::vector<int>> level0_members;
        for (auto& [cluster, members] : members_by_cluster) {
            std::sort(members.begin(), members.end());
            level0_members.push_back(members);
        }

        TreeOptions options;
        options.max_levels = config_.max_levels;
        options.mh_per_cluster = config_.mh_per_cluster;
        options.min_new_claims = config_.min_new_claims;
        options.duplicate_cosine = config_.duplicate_cosine;
        options.carry_forward_unused = config_.carry_forward_unused;
        options.theta = config_.theta;
        options.d_prime = config_.d_prime;
        options.k_max = config_.k_max;
        options.temperature = config_.temperature;
        options.max_output_tokens = config_.max_output_tokens;
        options.gmm.tol = config_.em_tol;
        options.gmm.max_iter = config_.em_max_iter;
        options.gmm.var_floor = config_.var_floor;
        options.gmm.n_init = config_.em_n_init;

        auto persist = [&](const MhtsTree& tree) {
            write_json_file(artifact_path(kTree), tree_to_json(tree));
        };
        MhtsTree tree = build_tree(gateway(), claims, level0_members, options, config_.seed,
                                   persist);
        persist(tree);
        log_info("build-tree: " + std::to_string(tree.levels.size()) + " levels, " +
                 std::to_string(tree.nodes.size()) + " nodes, stopped: " +
                 tree.termination_reason);
    });
}

void Pipeline::gen_qa(const std::string& tree_path, const std::string& chunks_path) {
    const std::string tree_in = tree_path.empty() ? artifact_path(kTree) : tree_path;
    const std::string chunks_in = chunks_path.empty() ? artifact_path(kChunks) : chunks_path;
    run_stage("gen-qa", {tree_in, chunks_in}, {kQaPairs, kChunkEmbeds, kQuestionEmbeds}, [&]() {
        MhtsTree tree = tree_from_json(read_json_file(tree_in));
        std::vector<Chunk> chunks;
        for (const json& j : read_jsonl(chunks_in)) {
            chunks.push_back(chunk_from_json(j));
        }

        std::vector<std::string> chunk_texts;
        chunk_texts.reserve(chunks.size());
        for (const Chunk& c : chunks) chunk_texts.push_back(c.text);
        std::vector<EmbeddingVector> chunk_embedded = gateway().embed(chunk_texts);
        std::vector<Vec> chunk_embeddings;
        std::vector<LabeledEmbedding> chunk_embeds;
        for (size_t i = 0; i < chunks.size(); ++i) {
            chunk_embeds.push_back(
                {"chunk", std::to_string(chunks[i].index), chunk_embedded[i].values});
            chunk_embeddings.push_back(std::move(chunk_embedded[i].values));
        }
        export_embeddings(chunk_embeds, artifact_path(kChunkEmbeds));

        // eligible claims, stable order by id
        std::vector<const Claim*> eligible;
        for (const auto& [id, claim] : tree.nodes) {
            if (claim.level >= config_.min_level && !claim.source_chunks.empty()) {
                eligible.push_back(&claim);
            }
        }
        if (config_.max_pairs > 0 && eligible.size() > static_cast<size_t>(config_.max_pairs)) {
            std::mt19937_64 rng(splitmix64(config_.seed ^ 0x9a5f));
            for (size_t i = 0; i < static_cast<size_t>(config_.max_pairs); ++i) {
                size_t j = i + static_cast<size_t>(rng() % (eligible.size() - i));
                std::swap(eligible[i], eligible[j]);
            }
            eligible.resize(static_cast<size_t>(config_.max_pairs));
            std::sort(eligible.begin(), eligible.end(),
                      [](const Claim* a, const Claim* b) { return a->id < b->id; });
        }

        std::vector<QaPair> pairs(eligible.size());
        parallel_for(eligible.size(), config_.workers, [&](size_t i) {
            const Claim& claim = *eligible[i];
            QaPair qa;
            qa.id = "qa_" + claim.id;
            qa.claim_id = claim.id;
            qa.question = generate_question(gateway(), claim, config_.temperature);
            qa.question_embedding = gateway().embed_one(qa.question).values;
            qa.context_chunks = assemble_context(qa.question_embedding, claim, chunk_embeddings);
            std::vector<std::string> context_texts;
            for (int idx : qa.context_chunks) {
                context_texts.push_back(chunks[static_cast<size_t>(idx)].text);
            }
            qa.answer = decontextualize_answer(gateway(), claim, qa.question, context_texts,
                                               config_.temperature);
            pairs[i] = std::move(qa);
        });

        std::vector<json> qa_records;
        std::vector<LabeledEmbedding> question_embeds;
        for (const QaPair& qa : pairs) {
            qa_records.push_back(qa_pair_to_json(qa));
            question_embeds.push_back({"question", qa.id, qa.question_embedding});
        }
        write_jsonl(artifact_path(kQaPairs), qa_records);
        export_embeddings(question_embeds, artifact_path(kQuestionEmbeds));
        log_info("gen-qa: " + std::to_string(pairs.size()) + " qa pairs");
    });
}

void Pipeline::score(const std::string& qa_path, const std::string& tree_path,
                     const std::string& chunks_path) {
    const std::string qa_in = qa_path.empty() ? artifact_path(kQaPairs) : qa_path;
    const std::string tree_in = tree_path.empty() ? artifact_path(kTree) : tree_path;
    const std::string chunks_in = chunks_path.empty() ? artifact_path(kChunks) : chunks_path;
    run_stage("score", {qa_in, tree_in, chunks_in}, {kDifficulty}, [&]() {
        MhtsTree tree = tree_from_json(read_json_file(tree_in));
        std::vector<Chunk> chunks;
        for (const json& j : read_jsonl(chunks_in)) {
            chunks.push_back(chunk_from_json(j));
        }
        std::vector<std::string> chunk_texts;
        for (const Chunk& c : chunks) chunk_texts.push_back(c.text);
        std::vector<Vec> chunk_embeddings;
        for (EmbeddingVector& e : gateway().embed(chunk_texts)) {
            chunk_embeddings.push_back(std::move(e.values));
        }
        std::vector<QaPair> pairs;
        for (const json& j : read_jsonl(qa_in)) {
            pairs.push_back(qa_pair_from_json(j));
        }

        std::vector<DifficultyReport> reports(pairs.size());
        parallel_for(pairs.size(), config_.workers, [&](size_t i) {
            const QaPair& qa = pairs[i];
            auto node = tree.nodes.find(qa.claim_id);
            if (node == tree.nodes.end()) {
                throw StageError("score: qa pair " + qa.id + " references unknown claim");
            }
            const Claim& claim = node->second;

            DifficultyReport report;
            report.qa_id = qa.id;
            report.lambda = config_.lambda;
            report.evidences = decompose_claim(gateway(), claim, config_.temperature);

            std::vector<Chunk> candidates;
            for (int idx : claim.source_chunks) {
                candidates.push_back(chunks.at(static_cast<size_t>(idx)));
            }
            for (Evidence& evidence : report.evidences) {
                evidence.supporting_chunks =
                    map_evidence(gateway(), evidence, candidates, config_.temperature);
            }
            classify_support(report.evidences, config_.adjacent_only);
            SimilarityResult sim =
                compute_similarity(qa.question_embedding, report.evidences, chunk_embeddings);
            for (size_t e = 0; e < report.evidences.size(); ++e) {
                report.evidences[e].similarity = sim.per_evidence[e];
            }
            report.hop_count = hop_count(report.evidences);
            report.similarity = sim.mean_similarity;
            report.no_support = sim.no_support;
            report.difficulty =
                difficulty_score(report.hop_count, report.similarity, report.lambda);
            reports[i] = std::move(report);
        });

        std::vector<json> records;
        for (const DifficultyReport& r : reports) records.push_back(difficulty_report_to_json(r));
        write_jsonl(artifact_path(kDifficulty), records);
        log_info("score: " + std::to_string(records.size()) + " difficulty reports");
    });
}

void Pipeline::evaluate(const std::string& qa_path, const std::string& difficulty_path,
                        const std::string& chunks_path, const std::string& tree_path) {
    const std::string qa_in = qa_path.empty() ? artifact_path(kQaPairs) : qa_path;
    const std::string difficulty_in =
        difficulty_path.empty() ? artifact_path(kDifficulty) : difficulty_path;
    const std::string chunks_in = chunks_path.empty() ? artifact_path(kChunks) : chunks_path;
    const std::string tree_in = tree_path.empty() ? artifact_path(kTree) : tree_path;
    run_stage("evaluate", {qa_in, difficulty_in, chunks_in, tree_in},
              {kRetrieval, kVerdicts, kWinrateReport, kWinratePoints}, [&]() {
        MhtsTree tree = tree_from_json(read_json_file(tree_in));
        std::vector<Chunk> chunks;
        for (const json& j : read_jsonl(chunks_in)) {
            chunks.push_back(chunk_from_json(j));
        }
        std::vector<std::string> chunk_texts;
        for (const Chunk& c : chunks) chunk_texts.push_back(c.text);
        std::vector<Vec> chunk_embeddings;
        for (EmbeddingVector& e : gateway().embed(chunk_texts)) {
            chunk_embeddings.push_back(std::move(e.values));
        }
        std::vector<QaPair> pairs;
        for (const json& j : read_jsonl(qa_in)) {
            pairs.push_back(qa_pair_from_json(j));
        }
        std::map<std::string, QaDifficultyKey> difficulty_by_qa;
        std::vector<DifficultyReport> difficulty_reports;
        for (const json& j : read_jsonl(difficulty_in)) {
            DifficultyReport r = difficulty_report_from_json(j);
            difficulty_by_qa[r.qa_id] = QaDifficultyKey{r.hop_count, r.difficulty};
            difficulty_reports.push_back(std::move(r));
        }

        // optionally judge only a seeded, difficulty-stratified sample
        if (config_.samples_per_bucket > 0) {
            auto buckets = bucket_by_difficulty(difficulty_reports, config_.n_buckets,
                                                config_.samples_per_bucket, config_.seed);
            std::set<std::string> keep;
            for (const auto& bucket : buckets) keep.insert(bucket.begin(), bucket.end());
            std::vector<QaPair> sampled;
            for (QaPair& qa : pairs) {
                if (keep.count(qa.id)) sampled.push_back(std::move(qa));
            }
            log_info("evaluate: judging " + std::to_string(sampled.size()) + " of " +
                     std::to_string(pairs.size()) + " qa pairs (" +
                     std::to_string(config_.samples_per_bucket) + " per bucket)");
            pairs = std::move(sampled);
        }

        std::unique_ptr<Judge> judge;
        if (config_.judge == "gateway") {
            judge = std::make_unique<GatewayJudge>(gateway(), config_.temperature);
        } else if (config_.judge.rfind("synthetic:", 0) == 0) {
            judge = std::make_unique<SyntheticJudge>(
                std::stoull(config_.judge.substr(std::string("synthetic:").size())));
        } else {
            throw UsageError("unknown judge: " + config_.judge +
                             " (expected gateway or synthetic:<seed>)");
        }

        struct PerQa {
            json retrieval;
            std::vector<JudgeVerdict> verdicts;
        };
        std::vector<PerQa> results(pairs.size());
        parallel_for(pairs.size(), config_.workers, [&](size_t i) {
            const QaPair& qa = pairs[i];
            auto node = tree.nodes.find(qa.claim_id);
            if (node == tree.nodes.end()) {
                throw StageError("evaluate: qa pair " + qa.id + " references unknown claim");
            }
            auto dkey = difficulty_by_qa.find(qa.id);
            if (dkey == difficulty_by_qa.end()) {
                throw StageError("evaluate: qa pair " + qa.id + " missing difficulty report");
            }

            RetrievalResult retrieval = retrieve_baseline(
                gateway(), qa.question_embedding, chunk_embeddings, qa.question, chunk_texts);
            retrieval.question_id = qa.id;

            std::vector<std::string> stage2_texts;
            for (int idx : retrieval.stage2) {
                stage2_texts.push_back(chunk_texts.at(static_cast<size_t>(idx)));
            }
            std::string rag_answer =
                answer_with_rag(gateway(), qa.question, stage2_texts, config_.temperature);
            std::vector<int> gt_context = build_gt_context(qa.question_embedding, node->second,
                                                           retrieval, chunk_embeddings);

            JudgeContext ctx;
            ctx.question_id = qa.id;
            ctx.difficulty = dkey->second.difficulty;
            for (JudgeMetric metric : all_judge_metrics()) {
                results[i].verdicts.push_back(
                    swap_aggregate(*judge, qa.question, qa.answer, rag_answer, metric, ctx));
            }
            results[i].retrieval = json{{"question_id", qa.id},
                                        {"stage1", retrieval.stage1},
                                        {"stage2", retrieval.stage2},
                                        {"gt_context", gt_context},
                                        {"rag_answer", rag_answer}};
        });

        std::vector<json> retrieval_records, verdict_records;
        std::vector<JudgeVerdict> all_verdicts;
        for (const PerQa& r : results) {
            retrieval_records.push_back(r.retrieval);
            for (const JudgeVerdict& v : r.verdicts) {
                verdict_records.push_back(judge_verdict_to_json(v));
                all_verdicts.push_back(v);
            }
        }
        write_jsonl(artifact_path(kRetrieval), retrieval_records);
        write_jsonl(artifact_path(kVerdicts), verdict_records);

        WinrateBucketing bucketing = config_.bucketing == "by_hop"
                                         ? WinrateBucketing::by_hop
                                         : WinrateBucketing::by_difficulty_quantile;
        int effective_buckets = config_.n_buckets;
        if (bucketing == WinrateBucketing::by_difficulty_quantile) {
            effective_buckets =
                std::min<int>(effective_buckets, static_cast<int>(pairs.size()));
            effective_buckets = std::max(effective_buckets, 2);
        }
        CorrelationReport report =
            winrate_table(all_verdicts, difficulty_by_qa, bucketing, effective_buckets);
        write_json_file(artifact_path(kWinrateReport), correlation_report_to_json(report));
        write_file_atomic(artifact_path(kWinratePoints), correlation_report_to_csv(report));
        log_info("evaluate: " + std::to_string(all_verdicts.size()) + " verdicts");
    });
}

void Pipeline::diversity(const std::string& set_a_path, const std::string& set_b_path,
                         const std::string& metric_id) {
    run_stage("diversity", {set_a_path, set_b_path}, {kDiversityReport}, [&]() {
        std::vector<LabeledEmbedding> a = import_embeddings(set_a_path);
        std::vector<LabeledEmbedding> b = import_embeddings(set_b_path);
        if (a.empty() || b.empty()) throw StageError("diversity: empty embedding set");
        std::vector<Vec> va, vb;
        for (auto& item : a) va.push_back(std::move(item.vector));
        for (auto& item : b) vb.push_back(std::move(item.vector));
        DiversityOptions options;
        options.metric = distance_metric_from_string(metric_id);
        options.seed = config_.seed;
        auto [ra, rb] = compare_sets(std::move(va), std::move(vb),
                                     a.empty() ? "set_a" : a[0].label,
                                     b.empty() ? "set_b" : b[0].label, options);
        write_json_file(artifact_path(kDiversityReport),
                        json{{"set_a", diversity_report_to_json(ra)},
                             {"set_b", diversity_report_to_json(rb)}});
    });
}

void Pipeline::emit(const EmitFilters& filters) {
    run_stage("emit", {artifact_path(kQaPairs), artifact_path(kDifficulty)}, {kBenchmark}, [&]() {
        std::map<std::string, DifficultyReport> by_qa;
        for (const json& j : read_jsonl(artifact_path(kDifficulty))) {
            DifficultyReport r = difficulty_report_from_json(j);
            by_qa[r.qa_id] = std::move(r);
        }
        std::vector<json> records;
        size_t dropped = 0;
        for (const json& j : read_jsonl(artifact_path(kQaPairs))) {
            QaPair qa = qa_pair_from_json(j);
            auto it = by_qa.find(qa.id);
            if (it == by_qa.end()) {
                throw StageError("emit: qa pair " + qa.id + " missing from difficulty output");
            }
            const DifficultyReport& r = it->second;
            if (r.no_support && !filters.keep_flagged) {
                ++dropped;
                continue;
            }
            if (filters.min_difficulty && r.difficulty < *filters.min_difficulty) {
                ++dropped;
                continue;
            }
            json evidences = json::array();
            for (const Evidence& e : r.evidences) {
                evidences.push_back({{"text", e.text},
                                     {"etype", to_string(e.etype)},
                                     {"status", to_string(e.status)},
                                     {"supporting_chunks", e.supporting_chunks},
                                     {"similarity", e.similarity}});
            }
            records.push_back(json{{"version", 1},
                                   {"id", qa.id},
                                   {"question", qa.question},
                                   {"answer", qa.answer},
                                   {"context_chunks", qa.context_chunks},
                                   {"h", r.hop_count},
                                   {"s", r.similarity},
                                   {"lambda", r.lambda},
                                   {"D", r.difficulty},
                                   {"evidences", evidences}});
        }
        write_jsonl(artifact_path(kBenchmark), records);
        log_info("emit: " + std::to_string(records.size()) + " benchmark records (" +
                 std::to_string(dropped) + " filtered)");
    });
}

void Pipeline::run_all(const std::string& input_path, const EmitFilters& filters) {
    ingest(input_path);
    extract();
    cluster();
    build_tree_stage();
    gen_qa();
    score();
    emit(filters);
}

}  // namespace mhts
