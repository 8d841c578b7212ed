// Config-driven runs: validation, action execution, artifacts and manifest.

#ifndef BIRKHOFF_TOOLS_RUNNER_HPP
#define BIRKHOFF_TOOLS_RUNNER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/config.hpp"
#include "birkhoff/flow.hpp"

namespace birkhoff::cli {

/// Rejected configuration. Nothing has been written when this is thrown.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string file, std::optional<int> line, std::string where, const std::string &what);
    [[nodiscard]] const std::string &file() const noexcept { return file_; }
    [[nodiscard]] std::optional<int> line() const noexcept { return line_; }
    [[nodiscard]] const std::string &where() const noexcept { return where_; }

private:
    std::string file_;
    std::optional<int> line_;
    std::string where_;
};

/// Command-line overrides; unset fields keep the config values.
struct RunSettings {
    std::optional<std::string> backend;
    std::optional<unsigned> precision_bits;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> profile;
    std::optional<int> order;
    std::optional<std::uint64_t> seed;
    bool parallel = false;
};

struct RunInput {
    json config;
    std::filesystem::path base_dir;
    /// Every file read, top-level first.
    std::vector<std::filesystem::path> files;
    /// Text of the top-level file, for line lookup.
    std::string text;
    /// Key path of the top-level file's root inside `config` ("" for run
    /// configs, "models.model" for a bare model file).
    std::string root_path;
    std::string stem = "run";
};

RunInput load_run_config(const std::filesystem::path &path);
/// Wraps a bare model file as models.model of an otherwise empty config.
RunInput load_model_file(const std::filesystem::path &path);

struct Artifact {
    std::string path;
    std::string format;
    std::size_t bytes = 0;
    std::string sha256;
};

struct ActionOutcome {
    int index = 0;
    std::string type;
    std::string dir;
    std::string status;
    std::string error;
    std::vector<Verdict> verdicts;
    json summary = json::object();
};

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<Artifact> artifacts;
    std::vector<ActionOutcome> actions;
    int exit_code = 0;
};

/// Output root: $BIRKHOFF_OUT, else ./birkhoff-out.
std::filesystem::path default_output_root();

/// Validates everything, then runs the actions and writes the artifacts and
/// manifest.json. Throws ValidationError before touching the file system.
RunResult run(const RunInput &input, const RunSettings &settings = {});

/// Line (1-based) of the key path `where` in `text`, when it can be found.
std::optional<int> locate_line(const std::string &text, const std::string &where);

std::string sha256_hex(const std::string &data);

} // namespace birkhoff::cli

#endif
