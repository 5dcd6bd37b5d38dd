#pragma once

#include <filesystem>

#include "mdsum/corpus.hpp"
#include "mdsum/model.hpp"

namespace mdsum {

/// Self-describing structured-text checkpoint: a manifest (format tag,
/// version, dims, vocabulary) plus one record per named parameter with its
/// shape and flat 64-bit float values. Doubles round-trip exactly.
void save_checkpoint(const Model& m, const Vocabulary& vocab,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
    Model model;
    Vocabulary vocab;
};

/// Throws ConfigError on version mismatch, malformed content, or parameter
/// shapes inconsistent with the stored dims.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mdsum
