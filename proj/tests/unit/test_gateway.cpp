#include "../support/builders.hpp"
#include "../support/net.hpp"
#include "../support/oracles.hpp"

#include "sealmates/analytics.hpp"
#include "sealmates/datagram.hpp"
#include "sealmates/gateway.hpp"
#include "sealmates/log_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace sealmates;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

SessionConfig gateway_config(const std::string& session, Policy policy, std::int64_t buckets)
{
    SessionConfig cfg;
    cfg.session = session;
    cfg.policy = policy;
    cfg.buckets = buckets;
    cfg.udp_port = 0;
    cfg.stream_port = 0;
    return cfg;
}

GatewayOptions manual(bool write_log = false)
{
    GatewayOptions o;
    o.clock = GatewayOptions::Clock::Manual;
    o.write_log = write_log;
    return o;
}

struct PixelSample {
    std::optional<RawGazeDatagram> gaze;
    std::optional<RawAudioDatagram> audio;
};

/// A pixel-level sample stream with held gaze points, random drops and
/// graded audio levels.
std::vector<std::vector<PixelSample>> pixel_stream(const std::string& session, std::int64_t frames, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<PixelSample>> out(static_cast<std::size_t>(frames), std::vector<PixelSample>(3));
    std::array<std::int64_t, 3> hx{}, hy{};
    std::int64_t seq = 0;
    for (std::int64_t f = 0; f < frames; ++f) {
        for (int p = 0; p < 3; ++p) {
            auto& s = out[static_cast<std::size_t>(f)][static_cast<std::size_t>(p)];
            if (u(gen) < 0.05) {
                hx[static_cast<std::size_t>(p)] = static_cast<std::int64_t>(u(gen) * 1920);
                hy[static_cast<std::size_t>(p)] = static_cast<std::int64_t>(u(gen) * 1080);
            }
            if (u(gen) < 0.9) {
                s.gaze = RawGazeDatagram{session, p, ++seq, f * 16, hx[static_cast<std::size_t>(p)] + static_cast<std::int64_t>(u(gen) * 4),
                                         hy[static_cast<std::size_t>(p)], 1920, 1080, u(gen) < 0.97};
            }
            if (u(gen) < 0.9) {
                s.audio = RawAudioDatagram{session, p, ++seq, f * 16, std::floor(u(gen) * 100) / 1000.0};
            }
        }
    }
    return out;
}

SessionLog through_gateway(const SessionConfig& cfg, const std::vector<std::vector<PixelSample>>& stream)
{
    Gateway gw(cfg, manual());
    for (std::size_t f = 0; f < stream.size(); ++f) {
        gw.advance_to(static_cast<std::int64_t>(f));
        for (const auto& s : stream[f]) {
            if (s.gaze) {
                gw.handle_datagram(encode_datagram(*s.gaze));
            }
            if (s.audio) {
                gw.handle_datagram(encode_datagram(*s.audio));
            }
        }
    }
    gw.advance_to(static_cast<std::int64_t>(stream.size()) + 10);
    return gw.finish();
}

SessionLog through_engine(SessionConfig cfg, const std::vector<std::vector<PixelSample>>& stream)
{
    cfg.finalize();
    SessionEngine engine(cfg, "x", "y");
    for (const auto& frame : stream) {
        auto in = FrameInput::empty(3);
        for (std::size_t p = 0; p < 3; ++p) {
            if (frame[p].gaze) {
                in.gaze[p] = remap(*frame[p].gaze);
            }
            if (frame[p].audio) {
                in.level[p] = frame[p].audio->level;
            }
        }
        engine.step(in);
    }
    return engine.finish();
}

} // namespace

TEST_CASE("manual clock: one bucket of datagrams becomes a scored log on disk")
{
    const auto dir = oracle::temp_dir("gateway");
    auto cfg = gateway_config("g1", Policy::BehaviorDriven, 1);
    cfg.log_dir = dir.string();
    Gateway gw(cfg, manual(true));
    for (std::int64_t f = 0; f < 3600; ++f) {
        gw.advance_to(f);
        for (int p = 0; p < 3; ++p) {
            // everyone looks at A's tile (pixel 480,240 is inside it); only A speaks
            gw.handle_datagram(encode_datagram(RawGazeDatagram{"g1", p, f, f * 16, 480, 240, 1920, 1080, true}));
            gw.handle_datagram(encode_datagram(RawAudioDatagram{"g1", p, f, f * 16, p == 0 ? 0.8 : 0.01}));
        }
    }
    gw.handle_datagram(encode_datagram(RawAudioDatagram{"g1", 0, 0, 0, 0.8}));   // duplicate for frame 3599
    gw.handle_datagram(R"({"v":1,"type":"audio","session":"nope","p":0,"seq":0,"t_ms":0,"level":0.1})");
    gw.advance_to(3610);
    const auto log = gw.finish();

    REQUIRE(log.frames.size() == 3600);
    REQUIRE(log.scores.size() == 3);
    // 100 * (1 + 1) / 2 for A, nothing for B and C
    CHECK(log.scores[0].total_percent == 100.0);
    CHECK(log.scores[1].total_percent == 0.0);
    CHECK(log.scores[2].total_percent == 0.0);
    const auto st = gw.stats();
    CHECK(st.accepted == 6u * 3600u);
    CHECK(st.duplicates == 1);
    CHECK(st.unknown_session == 1);
    CHECK(st.frames_processed == 3600);

    REQUIRE(std::filesystem::exists(dir / "g1.slog.jsonl"));
    CHECK(gw.log_path() == dir / "g1.slog.jsonl");
    const auto disk = load_log(dir / "g1.slog.jsonl");
    CHECK(disk.frames == log.frames);
    CHECK(validate_log(disk).empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("loss robustness: dropped datagrams never push scores out of range")
{
    auto cfg = gateway_config("loss", Policy::Random, 2);
    auto stream = pixel_stream("loss", 2 * 3600, 17);
    std::mt19937_64 gen(3);
    for (auto& frame : stream) {
        for (auto& s : frame) {
            if (gen() % 3 == 0) {
                s.gaze.reset();
            }
            if (gen() % 4 == 0) {
                s.audio.reset();
            }
        }
    }
    const auto log = through_gateway(cfg, stream);
    REQUIRE(log.scores.size() == 6);
    for (const auto& s : log.scores) {
        CHECK(s.aps >= 0.0);
        CHECK(s.aps <= 1.0);
        CHECK(s.collective_vps >= 0.0);
        CHECK(s.collective_vps <= 1.0);
    }
    CHECK(validate_log(log).empty());
}

TEST_CASE("insensitivity: gateway and in-process logs of one sample stream agree")
{
    const auto cfg = gateway_config("same", Policy::BehaviorDriven, 2);
    const auto stream = pixel_stream("same", 2 * 3600, 99);
    const auto via_gateway = through_gateway(cfg, stream);
    const auto direct = through_engine(cfg, stream);
    CHECK(via_gateway.frames == direct.frames);
    CHECK(via_gateway.scores == direct.scores);
    const auto opts = AnalyticsOptions::from_config(direct.config);
    CHECK(feature_report(via_gateway, opts) == feature_report(direct, opts));
}

TEST_CASE("live sockets: UDP ingest and per-viewer state stream")
{
    auto cfg = gateway_config("live", Policy::BehaviorDriven, 2);
    Gateway gw(cfg, manual());
    gw.start();
    REQUIRE(gw.udp_port() != 0);
    REQUIRE(gw.stream_port() != 0);

    net::StreamClient viewer(gw.stream_port());
    viewer.subscribe(1);
    REQUIRE(net::wait_for([&] { return gw.hub().subscriber_count() == 1; }));

    net::UdpSender udp(gw.udp_port());
    udp.send(encode_datagram(RawAudioDatagram{"live", 1, 1, 0, 0.9}));
    udp.send("garbage");
    REQUIRE(net::wait_for([&] { return gw.stats().received == 2; }));
    CHECK(gw.stats().malformed == 1);

    gw.advance_to(3);   // frame 0 is processed
    const auto first = viewer.read(2000ms);
    REQUIRE(first.has_value());
    const auto j = json::parse(*first);
    CHECK(j.at("type") == "avatar_state");
    CHECK(j.at("viewer") == 1);
    CHECK(j.at("frame") == 0);
    CHECK(j.at("phase") == "idle1");
    CHECK(j.at("rgb") == json::array({0, 0, 255}));

    // the boundary brings a score summary followed by states of the new bucket
    gw.advance_to(3600 + 5);
    bool summary = false;
    std::optional<std::int64_t> precursor;
    while (auto m = viewer.read(500ms)) {
        const auto mj = json::parse(*m);
        if (mj.at("type") == "score_summary") {
            summary = true;
            CHECK(mj.at("bucket") == 0);
            CHECK(mj.at("scores").size() == 3);
        } else if (mj.at("phase") == "precursor1" && !precursor) {
            precursor = mj.at("frame").get<std::int64_t>();
        }
    }
    CHECK(summary);
    // the phase change is never coalesced away
    CHECK(precursor == 3300);

    const auto log = gw.finish();
    CHECK(log.frames[0].participants[1].level == 0.9);
    CHECK(log.frames[0].participants[1].audio_active);
}

TEST_CASE("a reconnecting viewer receives the current state at once")
{
    auto cfg = gateway_config("recon", Policy::BehaviorDriven, 1);
    Gateway gw(cfg, manual());
    gw.start();
    gw.advance_to(50);
    {
        net::StreamClient first(gw.stream_port());
        first.subscribe(2);
        REQUIRE(first.read(2000ms).has_value());
    }
    REQUIRE(net::wait_for([&] { return gw.hub().subscriber_count() == 0; }));
    net::StreamClient again(gw.stream_port());
    again.subscribe(2);
    const auto snap = again.read(2000ms);
    REQUIRE(snap.has_value());
    CHECK(json::parse(*snap).at("frame") == 47);
    gw.finish();
}

TEST_CASE("bad subscribe handshakes are dropped")
{
    auto cfg = gateway_config("hs", Policy::BehaviorDriven, 1);
    Gateway gw(cfg, manual());
    gw.start();
    net::StreamClient c(gw.stream_port());
    c.subscribe(7);   // no such viewer
    CHECK_FALSE(c.read(1000ms).has_value());
    CHECK(gw.hub().subscriber_count() == 0);
    gw.finish();
}

TEST_CASE("policy None sends nothing on the stream")
{
    auto cfg = gateway_config("quiet", Policy::None, 1);
    Gateway gw(cfg, manual());
    gw.start();
    net::StreamClient c(gw.stream_port());
    c.subscribe(0);
    REQUIRE(net::wait_for([&] { return gw.hub().subscriber_count() == 1; }));
    gw.advance_to(3600 + 5);
    CHECK_FALSE(c.read(300ms).has_value());
    const auto log = gw.finish();
    CHECK(log.scores.size() == 3);
}

TEST_CASE("steady clock runs until stopped")
{
    GatewayOptions no_log;
    no_log.write_log = false;
    Gateway quiet(gateway_config("steady2", Policy::BehaviorDriven, 0), no_log);
    quiet.start();
    std::thread stopper([&] {
        std::this_thread::sleep_for(200ms);
        quiet.stop();
    });
    quiet.run();
    stopper.join();
    const auto log = quiet.finish();
    // roughly 12 frames in 200 ms at 60 Hz, minus the processing latency
    CHECK(log.frames.size() >= 5);
    CHECK(log.frames.size() <= 30);
    CHECK_THROWS_AS(quiet.advance_to(1), ContractViolation);
}
