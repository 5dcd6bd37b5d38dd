#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mdsum/attention.hpp"
#include "mdsum/decoder.hpp"
#include "mdsum/encoder.hpp"
#include "mdsum/training.hpp"

namespace mdsum {

/// Resolved run configuration: the config file merged with command-line
/// overrides. Every key has a default; unknown keys are rejected with a
/// diagnostic naming them.
class RunConfig {
  public:
    RunConfig();

    /// Parses an INI-style file: [section] headers, key=value lines, comments
    /// with '#' or ';'.
    void load_file(const std::filesystem::path& path);

    /// Applies one "section.key=value" override.
    void set(const std::string& assignment);

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// The full key=value state, rendered as an INI file; re-loading the echo
    /// reproduces the run.
    std::string echo() const;
    void write_echo(const std::filesystem::path& dir) const;

    // typed views over the well-known sections
    ModelDims model_dims() const;
    std::size_t vocab_max_size() const;
    std::size_t vocab_min_freq() const;
    AttentionConfig attention() const;
    DocsetWeightMode docset_mode() const;
    GenerationConfig generation() const;
    TrainConfig train(TrainConfig::Mode mode) const;
    int workers() const;
    int intermediate_budget() const;

  private:
    std::map<std::string, std::string> values_;     // "section.key" -> value
    std::vector<std::string> ordered_keys_;         // declaration order for echo
    void set_checked(const std::string& key, const std::string& value,
                     const std::string& where);
};

}  // namespace mdsum
