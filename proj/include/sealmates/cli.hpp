// Command-line front door: serve, simulate, replay, analyze.
//
// Exit codes: 0 success, 1 runtime failure (one diagnostic line on stderr),
// 2 usage error.

#pragma once

#include "sealmates/analytics.hpp"
#include "sealmates/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sealmates::cli {

struct Serve {
    std::string config;
};

struct Simulate {
    std::string scenario;
    std::uint64_t seed = 1;
    Policy policy = Policy::BehaviorDriven;
    std::optional<std::int64_t> buckets;
    std::string out;
    std::optional<std::string> config;
};

struct Replay {
    std::string log;
    std::string out;
};

struct Analyze {
    std::string log;
    std::optional<std::string> out;
    ReportFormat format = ReportFormat::Csv;
    RasDenominator ras = RasDenominator::Union;
    std::optional<double> dispersion;
    std::optional<int> min_fix_ms;
};

using Command = std::variant<Serve, Simulate, Replay, Analyze>;

/// Help requested or bad usage; `text` goes to stdout for exit code 0 and
/// stderr otherwise.
struct Usage {
    int exit_code = 2;
    std::string text;
};

using ParseResult = std::variant<Command, Usage>;

/// `args` excludes the program name. `env_config` is SEALMATES_CONFIG, the
/// fallback for `serve --config`.
ParseResult parse_args(const std::vector<std::string>& args, std::optional<std::string> env_config = std::nullopt);

/// Full help: the top-level summary followed by every subcommand's flags.
std::string help_text();

int run(const Command& command, std::ostream& out, std::ostream& err);

/// parse_args + run, reading SEALMATES_CONFIG from the environment.
int main(int argc, char** argv);

} // namespace sealmates::cli
