#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "mhts/gateway.hpp"
#include "mhts/providers.hpp"

namespace mhts::test {

inline std::string repo_dir() { return MHTS_REPO_DIR; }
inline std::string prompts_dir() { return repo_dir() + "/data/prompts"; }

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "mhts") {
        static std::atomic<uint64_t> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline std::shared_ptr<PromptRegistry> shared_prompts() {
    static std::shared_ptr<PromptRegistry> registry =
        std::make_shared<PromptRegistry>(prompts_dir());
    return registry;
}

// Live-mode gateway around test-provided fakes; no fixtures involved.
inline Gateway make_fake_gateway(CallbackChatProvider::Fn chat_fn,
                                 CallbackEmbedProvider::Fn embed_fn = nullptr) {
    GatewaySettings settings;
    settings.mode = ProviderMode::live;
    settings.sleep_in_tests = false;
    std::unique_ptr<EmbedProvider> embed;
    if (embed_fn) {
        embed = std::make_unique<CallbackEmbedProvider>(std::move(embed_fn));
    } else {
        embed = std::make_unique<HashEmbedProvider>(32);
    }
    return Gateway(settings, shared_prompts(),
                   std::make_unique<CallbackChatProvider>(std::move(chat_fn)), std::move(embed),
                   nullptr);
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mhts::test
