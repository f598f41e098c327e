#include "kds/artifact_store.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <system_error>

#include "kds/errors.hpp"

namespace kds {

namespace fs = std::filesystem;

std::string_view stage_name(Stage stage) {
    switch (stage) {
        case Stage::Responses: return "responses";
        case Stage::Nli: return "nli";
        case Stage::Quality: return "quality";
        case Stage::Embeddings: return "embeddings";
        case Stage::Scores: return "scores";
        case Stage::Selection: return "selection";
    }
    return "unknown";
}

ArtifactStore::ArtifactStore(fs::path workdir) : workdir_(std::move(workdir)) {
    std::error_code ec;
    fs::create_directories(workdir_, ec);
    if (ec) {
        throw_io("cannot create workdir " + workdir_.string() + ": " + ec.message());
    }
}

fs::path ArtifactStore::artifact_path(Stage stage, const std::string& key) const {
    if (key.size() < 2) {
        throw_io("artifact key too short: " + key);
    }
    return workdir_ / stage_name(stage) / key.substr(0, 2) / (key + ".json");
}

void ArtifactStore::store(Stage stage, const std::string& key,
                          const std::string& payload) {
    const fs::path target = artifact_path(stage, key);

    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) {
        throw_io("cannot create " + target.parent_path().string() + ": " +
                 ec.message());
    }

    // Unique temp name per writer, then an atomic rename onto the target.
    static std::atomic<std::uint64_t> counter{0};
    const fs::path tmp =
        target.parent_path() /
        (key + ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1)));

    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw_io("cannot open temp file " + tmp.string());
        }
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw_io("write failed: " + tmp.string());
        }
    }

    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw_io("rename failed for " + target.string() + ": " + ec.message());
    }
}

std::optional<std::string> ArtifactStore::load(Stage stage,
                                               const std::string& key) const {
    const fs::path target = artifact_path(stage, key);
    std::ifstream in(target, std::ios::binary);
    if (!in) return std::nullopt;
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw_io("read failed: " + target.string());
    }
    return payload;
}

bool ArtifactStore::exists(Stage stage, const std::string& key) const {
    std::error_code ec;
    return fs::exists(artifact_path(stage, key), ec);
}

} // namespace kds
