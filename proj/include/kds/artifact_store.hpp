#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace kds {

// Pipeline stages that persist artifacts. The store layout is stable so
// external tools can inspect caches:
//   <workdir>/<stage>/<first 2 hex of key>/<key>.json
enum class Stage {
    Responses,
    Nli,
    Quality,
    Embeddings,
    Scores,
    Selection,
};

std::string_view stage_name(Stage stage);

// Content-addressed artifact store. Keys are 64-char hex content hashes of
// the request that produced the payload, so identical requests are stored
// once and reruns become cache hits.
//
// Writes are atomic (temp file + rename): a crashed write never leaves a
// partial artifact readable. Concurrent writers to distinct keys are safe;
// same-key writers are last-writer-wins.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path workdir);

    void store(Stage stage, const std::string& key, const std::string& payload);
    std::optional<std::string> load(Stage stage, const std::string& key) const;
    bool exists(Stage stage, const std::string& key) const;

    const std::filesystem::path& workdir() const { return workdir_; }
    std::filesystem::path artifact_path(Stage stage, const std::string& key) const;

private:
    std::filesystem::path workdir_;
};

} // namespace kds
