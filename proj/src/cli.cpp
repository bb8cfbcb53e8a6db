#include "sealmates/cli.hpp"

#include "sealmates/gateway.hpp"
#include "sealmates/log_io.hpp"
#include "sealmates/session.hpp"
#include "sealmates/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace sealmates::cli {

namespace {

struct Raw {
    std::string config;
    std::string scenario;
    std::uint64_t seed = 1;
    std::string policy = "behavior";
    std::int64_t buckets = 0;
    std::string out;
    std::string log;
    std::string format = "csv";
    std::string ras = "union";
    double dispersion = 0.0;
    int min_fix_ms = 0;
};

struct Parser {
    CLI::App app{"Engagement-scored avatar mediation for small video meetings.", "sealmates"};
    CLI::App* serve = nullptr;
    CLI::App* simulate = nullptr;
    CLI::App* replay = nullptr;
    CLI::App* analyze = nullptr;
    CLI::Option* serve_config = nullptr;
    CLI::Option* sim_buckets = nullptr;
    CLI::Option* sim_config = nullptr;
    CLI::Option* an_out = nullptr;
    CLI::Option* an_dispersion = nullptr;
    CLI::Option* an_min_fix = nullptr;
    Raw raw;

    Parser()
    {
        app.require_subcommand(1);
        app.set_help_all_flag("--help-all", "Print help for every subcommand");

        serve = app.add_subcommand("serve", "Host one live session (UDP ingest, TCP state stream)");
        serve_config = serve->add_option("--config", raw.config, "Session config JSON (fallback: SEALMATES_CONFIG)");

        simulate = app.add_subcommand("simulate", "Run a scripted triad and write its session log");
        simulate->add_option("--scenario", raw.scenario, "Built-in scenario name or scenario JSON path")->required();
        simulate->add_option("--seed", raw.seed, "Seed for every random draw")->required();
        simulate->add_option("--policy", raw.policy, "Avatar policy")
            ->check(CLI::IsMember({"behavior", "random", "none"}))
            ->default_str("behavior");
        sim_buckets = simulate->add_option("--buckets", raw.buckets, "Minute buckets to simulate (default: scenario's)")
                          ->check(CLI::PositiveNumber);
        simulate->add_option("--out", raw.out, "Output session log path")->required();
        sim_config = simulate->add_option("--config", raw.config, "Base session config JSON");

        replay = app.add_subcommand("replay", "Re-run a log's raw samples and check its scores and states");
        replay->add_option("--log", raw.log, "Session log to replay")->required();
        replay->add_option("--out", raw.out, "Where to write the replayed log")->required();

        analyze = app.add_subcommand("analyze", "Fixation and participation features of a session log");
        analyze->add_option("--log", raw.log, "Session log to analyze")->required();
        an_out = analyze->add_option("--out", raw.out, "Report path (default: standard output)");
        analyze->add_option("--format", raw.format, "Report format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->default_str("csv");
        analyze->add_option("--ras-denominator", raw.ras, "Eq. 1 denominator")
            ->check(CLI::IsMember({"union", "total"}))
            ->default_str("union");
        an_dispersion = analyze->add_option("--dispersion", raw.dispersion, "I-DT dispersion threshold (normalized)")
                            ->check(CLI::PositiveNumber);
        an_min_fix = analyze->add_option("--min-fix-ms", raw.min_fix_ms, "Minimum fixation duration in ms")
                         ->check(CLI::PositiveNumber);
    }
};

std::string one_line(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    while (!s.empty() && s.back() == ' ') {
        s.pop_back();
    }
    return s;
}

std::atomic<Gateway*> g_live{nullptr};

extern "C" void on_interrupt(int)
{
    if (auto* g = g_live.load()) {
        g->stop();
    }
}

int run_serve(const Serve& cmd, std::ostream& out)
{
    auto cfg = load_config(cmd.config);
    Gateway gateway(cfg);
    gateway.start();
    out << "serving session '" << gateway.config().session << "' udp " << gateway.udp_port() << " stream "
        << gateway.stream_port() << std::endl;
    g_live.store(&gateway);
    auto prev_int = std::signal(SIGINT, on_interrupt);
    auto prev_term = std::signal(SIGTERM, on_interrupt);
    gateway.run();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    g_live.store(nullptr);
    const auto log = gateway.finish();
    const auto s = gateway.stats();
    out << "frames " << log.frames.size() << " buckets " << log.complete_buckets() << " accepted " << s.accepted
        << " rejected " << (s.malformed + s.unknown_session + s.unknown_participant + s.unsupported_type)
        << " log " << gateway.log_path().string() << std::endl;
    return 0;
}

int run_simulate(const Simulate& cmd)
{
    SessionConfig cfg = cmd.config ? load_config(*cmd.config) : SessionConfig{};
    const auto scenario = resolve_scenario(cmd.scenario, cfg);
    cfg.policy = cmd.policy;
    const auto log = run_scenario(scenario, cfg, cmd.seed, cmd.buckets);
    save_log(cmd.out, log);
    return 0;
}

int run_replay(const Replay& cmd, std::ostream& err)
{
    const auto original = load_log(cmd.log);
    const auto replayed = replay_log(original);
    save_log(cmd.out, replayed);
    if (serialize_log(original) != serialize_log(replayed)) {
        const auto problems = validate_log(original);
        err << "error: replay: replayed log differs from " << cmd.log;
        if (!problems.empty()) {
            err << " (" << one_line(problems.front()) << ")";
        }
        err << '\n';
        return 1;
    }
    return 0;
}

int run_analyze(const Analyze& cmd, std::ostream& out)
{
    const auto log = load_log(cmd.log);
    auto options = AnalyticsOptions::from_config(log.config);
    options.ras = cmd.ras;
    if (cmd.dispersion) {
        options.fixation.dispersion = *cmd.dispersion;
    }
    if (cmd.min_fix_ms) {
        options.fixation.min_duration_ms = *cmd.min_fix_ms;
    }
    const auto report = feature_report(log, options);
    if (cmd.out) {
        emit_report(report, cmd.format, std::filesystem::path(*cmd.out));
    } else {
        emit_report(report, cmd.format, out);
    }
    return 0;
}

const char* command_name(const Command& c)
{
    static constexpr const char* names[] = {"serve", "simulate", "replay", "analyze"};
    return names[c.index()];
}

} // namespace

ParseResult parse_args(const std::vector<std::string>& args, std::optional<std::string> env_config)
{
    Parser p;
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        p.app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream er;
        const int code = p.app.exit(e, o, er);
        if (code == 0) {
            return Usage{0, o.str()};
        }
        return Usage{2, er.str()};
    }

    const auto& r = p.raw;
    if (p.serve->parsed()) {
        Serve s;
        if (*p.serve_config) {
            s.config = r.config;
        } else if (env_config && !env_config->empty()) {
            s.config = *env_config;
        } else {
            return Usage{2, "serve: --config is required (or set SEALMATES_CONFIG)\n" + p.serve->help()};
        }
        return Command{s};
    }
    if (p.simulate->parsed()) {
        Simulate s;
        s.scenario = r.scenario;
        s.seed = r.seed;
        s.policy = policy_from_string(r.policy);
        if (*p.sim_buckets) {
            s.buckets = r.buckets;
        }
        s.out = r.out;
        if (*p.sim_config) {
            s.config = r.config;
        }
        return Command{s};
    }
    if (p.replay->parsed()) {
        if (r.log == r.out) {
            return Usage{2, "replay: --out must differ from --log\n"};
        }
        return Command{Replay{r.log, r.out}};
    }
    Analyze a;
    a.log = r.log;
    if (*p.an_out) {
        a.out = r.out;
    }
    a.format = report_format_from_string(r.format);
    a.ras = ras_denominator_from_string(r.ras);
    if (*p.an_dispersion) {
        a.dispersion = r.dispersion;
    }
    if (*p.an_min_fix) {
        a.min_fix_ms = r.min_fix_ms;
    }
    return Command{a};
}

std::string help_text()
{
    Parser p;
    return p.app.help("", CLI::AppFormatMode::All);
}

int run(const Command& command, std::ostream& out, std::ostream& err)
{
    try {
        return std::visit(
            [&](const auto& c) -> int {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, Serve>) {
                    return run_serve(c, out);
                } else if constexpr (std::is_same_v<T, Simulate>) {
                    return run_simulate(c);
                } else if constexpr (std::is_same_v<T, Replay>) {
                    return run_replay(c, err);
                } else {
                    return run_analyze(c, out);
                }
            },
            command);
    } catch (const std::exception& e) {
        err << "error: " << command_name(command) << ": " << one_line(e.what()) << '\n';
        return 1;
    }
}

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    std::optional<std::string> env;
    if (const char* v = std::getenv("SEALMATES_CONFIG")) {
        env = v;
    }
    const auto parsed = parse_args(args, env);
    if (const auto* u = std::get_if<Usage>(&parsed)) {
        (u->exit_code == 0 ? std::cout : std::cerr) << u->text;
        return u->exit_code;
    }
    return run(std::get<Command>(parsed), std::cout, std::cerr);
}

} // namespace sealmates::cli
