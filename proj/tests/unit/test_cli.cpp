#include "../support/oracles.hpp"

#include "sealmates/cli.hpp"
#include "sealmates/log_io.hpp"
#include "sealmates/simulator.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace sealmates;

namespace {

int usage_code(const std::vector<std::string>& args, std::optional<std::string> env = std::nullopt)
{
    const auto r = cli::parse_args(args, std::move(env));
    REQUIRE(std::holds_alternative<cli::Usage>(r));
    return std::get<cli::Usage>(r).exit_code;
}

template <typename T>
T command(const std::vector<std::string>& args, std::optional<std::string> env = std::nullopt)
{
    const auto r = cli::parse_args(args, std::move(env));
    REQUIRE(std::holds_alternative<cli::Command>(r));
    const auto& c = std::get<cli::Command>(r);
    REQUIRE(std::holds_alternative<T>(c));
    return std::get<T>(c);
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::vector<std::string>& args)
{
    const auto r = cli::parse_args(args);
    REQUIRE(std::holds_alternative<cli::Command>(r));
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(std::get<cli::Command>(r), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("parsing the documented invocations")
{
    const auto sim = command<cli::Simulate>(
        {"simulate", "--scenario", "neglected-c", "--seed", "7", "--policy", "random", "--buckets", "3", "--out", "x.jsonl"});
    CHECK(sim.scenario == "neglected-c");
    CHECK(sim.seed == 7);
    CHECK(sim.policy == Policy::Random);
    CHECK(sim.buckets == 3);
    CHECK(sim.out == "x.jsonl");
    CHECK_FALSE(sim.config.has_value());

    const auto dflt = command<cli::Simulate>({"simulate", "--scenario", "balanced", "--seed", "1", "--out", "y"});
    CHECK(dflt.policy == Policy::BehaviorDriven);
    CHECK_FALSE(dflt.buckets.has_value());

    const auto an = command<cli::Analyze>(
        {"analyze", "--log", "l.jsonl", "--format", "json", "--ras-denominator", "total", "--min-fix-ms", "200"});
    CHECK(an.log == "l.jsonl");
    CHECK(an.format == ReportFormat::Json);
    CHECK(an.ras == RasDenominator::Total);
    CHECK(an.min_fix_ms == 200);
    CHECK_FALSE(an.dispersion.has_value());
    CHECK_FALSE(an.out.has_value());

    const auto rp = command<cli::Replay>({"replay", "--log", "a", "--out", "b"});
    CHECK(rp.log == "a");
    CHECK(rp.out == "b");

    CHECK(command<cli::Serve>({"serve", "--config", "c.json"}).config == "c.json");
    CHECK(command<cli::Serve>({"serve"}, "env.json").config == "env.json");
    CHECK(command<cli::Serve>({"serve", "--config", "c.json"}, "env.json").config == "c.json");
}

TEST_CASE("usage errors exit 2")
{
    CHECK(usage_code({}) == 2);
    CHECK(usage_code({"teleport"}) == 2);
    CHECK(usage_code({"simulate", "--scenario", "balanced", "--seed", "1", "--policy", "sideways", "--out", "x"}) == 2);
    CHECK(usage_code({"simulate", "--scenario", "balanced", "--out", "x"}) == 2);
    CHECK(usage_code({"simulate", "--scenario", "balanced", "--seed", "-3", "--out", "x"}) == 2);
    CHECK(usage_code({"simulate", "--scenario", "balanced", "--seed", "1", "--buckets", "0", "--out", "x"}) == 2);
    CHECK(usage_code({"analyze", "--log", "l", "--colour", "red"}) == 2);
    CHECK(usage_code({"analyze", "--log", "l", "--format", "xml"}) == 2);
    CHECK(usage_code({"analyze", "--log", "l", "--dispersion", "0"}) == 2);
    CHECK(usage_code({"replay", "--log", "same", "--out", "same"}) == 2);
    CHECK(usage_code({"serve"}) == 2);
}

TEST_CASE("help")
{
    CHECK(usage_code({"--help"}) == 0);
    CHECK(usage_code({"--help-all"}) == 0);
    CHECK(usage_code({"analyze", "--help"}) == 0);
    const auto r = cli::parse_args({"--help-all"});
    CHECK(std::get<cli::Usage>(r).text == cli::help_text());
    CHECK(cli::help_text() == slurp(std::filesystem::path(SEALMATES_GOLDEN_DIR) / "help.txt"));
}

TEST_CASE("runtime errors exit 1 with one line on stderr")
{
    const auto dir = oracle::temp_dir("cli-err");
    const auto missing = (dir / "missing.jsonl").string();
    auto o = run({"analyze", "--log", missing});
    CHECK(o.code == 1);
    CHECK(o.err.rfind("error: analyze: ", 0) == 0);
    CHECK(std::count(o.err.begin(), o.err.end(), '\n') == 1);
    CHECK(o.out.empty());

    o = run({"simulate", "--scenario", "no-such-scenario", "--seed", "1", "--out", (dir / "x").string()});
    CHECK(o.code == 1);
    CHECK(o.err.rfind("error: simulate: ", 0) == 0);

    std::ofstream(dir / "bad.jsonl") << "{not json\n";
    o = run({"replay", "--log", (dir / "bad.jsonl").string(), "--out", (dir / "r.jsonl").string()});
    CHECK(o.code == 1);
    CHECK(o.err.rfind("error: replay: ", 0) == 0);

    o = run({"serve", "--config", missing});
    CHECK(o.code == 1);
    CHECK(o.err.rfind("error: serve: ", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("simulate, replay and analyze end to end")
{
    const auto dir = oracle::temp_dir("cli");
    const auto a = (dir / "a.jsonl").string();
    const auto b = (dir / "b.jsonl").string();
    REQUIRE(run({"simulate", "--scenario", "chatty-a", "--seed", "3", "--buckets", "2", "--out", a}).code == 0);
    REQUIRE(run({"simulate", "--scenario", "chatty-a", "--seed", "3", "--buckets", "2", "--out", b}).code == 0);
    CHECK(slurp(a) == slurp(b));
    const auto log = load_log(a);
    CHECK(log.complete_buckets() == 2);
    CHECK(log.source == "simulator:chatty-a");

    const auto r = (dir / "r.jsonl").string();
    const auto rep = run({"replay", "--log", a, "--out", r});
    CHECK(rep.code == 0);
    CHECK(slurp(r) == slurp(a));

    const auto csv = run({"analyze", "--log", a});
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("viewer,aoi,rfd,rafd,rfc,rafc\n", 0) == 0);

    const auto json_path = dir / "report.json";
    CHECK(run({"analyze", "--log", a, "--format", "json", "--out", json_path.string()}).code == 0);
    const auto report = report_from_json(nlohmann::json::parse(slurp(json_path)));
    CHECK(report == feature_report(log, AnalyticsOptions::from_config(log.config)));

    const auto total = run({"analyze", "--log", a, "--ras-denominator", "total", "--format", "json"});
    CHECK(nlohmann::json::parse(total.out).at("ras_denominator") == "total");
    std::filesystem::remove_all(dir);
}

TEST_CASE("replay flags a log whose recorded scores were altered")
{
    const auto dir = oracle::temp_dir("cli-tamper");
    SessionConfig cfg;
    auto log = run_scenario(builtin_scenario("balanced"), cfg, 2, 1);
    log.scores[0].total_percent += 1.0;
    std::ofstream(dir / "t.jsonl", std::ios::binary) << serialize_log(log);
    const auto o = run({"replay", "--log", (dir / "t.jsonl").string(), "--out", (dir / "r.jsonl").string()});
    CHECK(o.code == 1);
    CHECK(o.err.rfind("error: replay: ", 0) == 0);
    std::filesystem::remove_all(dir);
}
