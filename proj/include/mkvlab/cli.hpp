#pragma once

#include "mkvlab/model_io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mkvlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdictFail = 2;

struct RunOptions {
    std::string config_path;
    /// Dotted-path assignments "a.b.c=value"; the value is parsed as JSON, else taken as a string.
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    /// 0 means MKVLAB_THREADS or hardware concurrency.
    std::size_t threads = 0;
};

/// Load, validate and execute one experiment; returns the process exit code.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Execute an in-memory configuration (same semantics as run after loading).
int run_config(Json config, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Apply one "a.b.c=value" override in place.
void apply_override(Json& config, const std::string& assignment);

struct CatalogEntry {
    std::string id;
    std::string description;
    /// Model in the config schema.
    Json model;
    /// Suggested initial law in the config schema.
    Json xi;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(const std::string& id);

/// Full command-line entry point (subcommands run, list-models, show-model).
int main_entry(int argc, char** argv);

}  // namespace mkvlab::cli
