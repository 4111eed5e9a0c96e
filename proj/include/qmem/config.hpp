#pragma once

#include "qmem/dynamics.hpp"
#include "qmem/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qmem {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class Command { Simulate, IvCurve, Equilibria, Bifurcations, Sweep, Amplitude, Scan, Spectrum };
std::string_view to_string(Command c);
/// Throws ConfigError for unknown names.
Command parse_command(std::string_view name);

enum class ParamKind { Number, Integer, Text };

struct ParamInfo {
    std::string_view key;
    ParamKind kind;
    std::string_view default_value;
    std::string_view help;
};

/// Every accepted key with its default.
std::span<const ParamInfo> parameter_table();

struct RunSpec {
    Command command = Command::Simulate;
    std::map<std::string, std::string> values;  ///< every key, canonical text
    std::filesystem::path output_dir;
    static constexpr bool deterministic = true;

    double number(std::string_view key) const;
    long integer(std::string_view key) const;
    const std::string& text(std::string_view key) const;

    DeviceParams device() const;
    CircuitParams circuit() const;
    State initial_state() const;
    IntegrateOptions integrate_options() const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses "key = value" lines ('#' starts a comment). Overrides win over the file, the file
/// over defaults. The command comes from a "command" key in either place. Throws ParseError
/// naming the offending line (0 for overrides).
RunSpec parse_config(std::string_view text, const Overrides& overrides = {});

/// Rebuilds the run described by a *.meta.json sidecar. Overrides apply on top.
RunSpec runspec_from_sidecar(const std::filesystem::path& sidecar, const Overrides& overrides = {});

/// Runs the analysis and writes CSV artifacts plus JSON sidecars into spec.output_dir.
/// Returns 0 on success; on error writes a diagnostic to err and returns nonzero.
int execute(const RunSpec& spec, std::ostream& log, std::ostream& err);

}  // namespace qmem
