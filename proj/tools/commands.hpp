#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsk/error.hpp"
#include "nsk/io.hpp"

namespace nsk::cli {

/// Raised for anything the user can fix in the manifest or on the command line.
class UsageError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

struct RunManifest {
    std::string command;
    std::filesystem::path source;
    std::filesystem::path params_file;
    PhysParams params;
    json grid_overrides = json::object();
    std::uint64_t seed = 1;
    std::filesystem::path output_dir;
    json body;  ///< the whole manifest, for command-specific sections
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output;
    int jobs = 1;
    bool resume = false;
};

/// Reads and checks the manifest; command-line values take precedence.
RunManifest load_manifest(const std::filesystem::path& path, const std::string& command, const Overrides& o);

struct Verdict {
    std::string check;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string note;
};

/// Runs the manifest's command and returns the process exit status.
int run(const RunManifest& m, const Overrides& o);

inline constexpr int exit_ok = 0;
inline constexpr int exit_verdict_failed = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_model_failure = 3;

}  // namespace nsk::cli
