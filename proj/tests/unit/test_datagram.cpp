#include "sealmates/datagram.hpp"

#include <doctest.h>

using namespace sealmates;

namespace {

const IngestFilter kFilter{"s1", 3};

IngestErrorKind error_of(std::string_view payload)
{
    const auto r = ingest_datagram(payload, kFilter);
    REQUIRE(std::holds_alternative<IngestError>(r));
    return std::get<IngestError>(r).kind;
}

} // namespace

TEST_CASE("well-formed gaze datagram")
{
    const auto r = ingest_datagram(
        R"({"v":1,"type":"gaze","session":"s1","p":2,"seq":7,"t_ms":1000,"x_px":960,"y_px":270,"w":1920,"h":1080,"valid":true,"extra":[1,2]})",
        kFilter);
    REQUIRE(std::holds_alternative<Datagram>(r));
    const auto& g = std::get<RawGazeDatagram>(std::get<Datagram>(r));
    CHECK(g.participant == 2);
    CHECK(g.seq == 7);
    CHECK(g.t_ms == 1000);
    const auto pt = remap(g);
    CHECK(pt.valid);
    CHECK(pt.x == 0.5);
    CHECK(pt.y == 0.25);
}

TEST_CASE("audio datagram level is clamped")
{
    auto level = [](const char* text) {
        const auto r = ingest_datagram(text, kFilter);
        REQUIRE(std::holds_alternative<Datagram>(r));
        return std::get<RawAudioDatagram>(std::get<Datagram>(r)).level;
    };
    CHECK(level(R"({"v":1,"type":"audio","session":"s1","p":0,"seq":1,"t_ms":5,"level":0.25})") == 0.25);
    CHECK(level(R"({"v":1,"type":"audio","session":"s1","p":0,"seq":1,"t_ms":5,"level":7})") == 1.0);
    CHECK(level(R"({"v":1,"type":"audio","session":"s1","p":0,"seq":1,"t_ms":5,"level":-2.5})") == 0.0);
}

TEST_CASE("rejection classes")
{
    CHECK(error_of("") == IngestErrorKind::MalformedDatagram);
    CHECK(error_of("[1,2]") == IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":2,"type":"audio","session":"s1","p":0,"seq":1,"t_ms":5,"level":0.1})") ==
          IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":1,"type":"audio","session":"s1","p":0,"t_ms":5,"level":0.1})") ==
          IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":1,"type":"audio","session":"s1","p":0,"seq":1,"t_ms":5,"level":"loud"})") ==
          IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":1,"type":"gaze","session":"s1","p":0,"seq":1,"t_ms":5,"x_px":1,"y_px":1,"w":0,"h":10,"valid":true})") ==
          IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":1,"type":"gaze","session":"s1","p":0,"seq":1,"t_ms":5,"x_px":1.5,"y_px":1,"w":10,"h":10,"valid":true})") ==
          IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":1,"type":"audio","session":"s1","p":99999999999999999999,"seq":1,"t_ms":5,"level":0.1})") ==
          IngestErrorKind::MalformedDatagram);
    CHECK(error_of(R"({"v":1,"type":"audio","session":"other","p":0,"seq":1,"t_ms":5,"level":0.1})") ==
          IngestErrorKind::UnknownSession);
    CHECK(error_of(R"({"v":1,"type":"audio","session":"s1","p":3,"seq":1,"t_ms":5,"level":0.1})") ==
          IngestErrorKind::UnknownParticipant);
    CHECK(error_of(R"({"v":1,"type":"audio","session":"s1","p":-1,"seq":1,"t_ms":5,"level":0.1})") ==
          IngestErrorKind::UnknownParticipant);
    CHECK(error_of(R"({"v":1,"type":"video","session":"s1","p":0,"seq":1,"t_ms":5})") ==
          IngestErrorKind::UnsupportedType);
    CHECK(std::string(to_string(IngestErrorKind::UnknownSession)) == "UnknownSession");
}

TEST_CASE("encoding round-trips")
{
    RawGazeDatagram g{"s1", 1, 42, 99, 100, 200, 1280, 720, false};
    auto r = ingest_datagram(encode_datagram(g), kFilter);
    REQUIRE(std::holds_alternative<Datagram>(r));
    CHECK(std::get<RawGazeDatagram>(std::get<Datagram>(r)) == g);

    RawAudioDatagram a{"s1", 2, 3, 4, 0.125};
    r = ingest_datagram(encode_datagram(a), kFilter);
    REQUIRE(std::holds_alternative<Datagram>(r));
    CHECK(std::get<RawAudioDatagram>(std::get<Datagram>(r)) == a);
}

TEST_CASE("pixel remapping")
{
    RawGazeDatagram g{"s1", 0, 0, 0, 0, 0, 100, 100, true};
    CHECK(remap(g) == NormPoint::at(0.0, 0.0));
    g.x_px = 100;   // right edge is off screen
    CHECK_FALSE(remap(g).valid);
    g.x_px = -1;
    CHECK_FALSE(remap(g).valid);
    g.x_px = 50;
    g.valid = false;
    CHECK_FALSE(remap(g).valid);
}

TEST_CASE("frame clock")
{
    using namespace std::chrono;
    const auto t0 = steady_clock::time_point{} + seconds(100);
    FrameClock clock(t0, 60);
    CHECK_FALSE(clock.frame_at(t0 - nanoseconds(1)).has_value());
    CHECK(clock.frame_at(t0) == 0);
    CHECK(clock.frame_at(t0 + milliseconds(16)) == 0);
    CHECK(clock.frame_at(t0 + milliseconds(17)) == 1);
    CHECK(clock.frame_at(t0 + seconds(60)) == 3600);
    for (std::int64_t f : {0, 1, 2, 59, 60, 3599, 3600, 54000}) {
        CHECK(clock.frame_at(clock.frame_start(f)) == f);
        if (f > 0) {
            CHECK(clock.frame_at(clock.frame_start(f) - nanoseconds(1)) == f - 1);
        }
    }
}

TEST_CASE("frame assembly: first sample wins, late samples are refused")
{
    FrameAssembler a(3);
    CHECK(a.add_gaze(0, 1, NormPoint::at(0.1, 0.1)) == FrameAssembler::Outcome::Stored);
    CHECK(a.add_gaze(0, 1, NormPoint::at(0.9, 0.9)) == FrameAssembler::Outcome::Duplicate);
    CHECK(a.add_audio(2, 0, 0.5) == FrameAssembler::Outcome::Stored);
    CHECK(a.pending_frames() == 2);

    auto s0 = a.take(0);
    CHECK(s0.gaze[1] == NormPoint::at(0.1, 0.1));
    CHECK_FALSE(s0.gaze[0].has_value());
    CHECK_FALSE(s0.level[1].has_value());
    CHECK(a.add_audio(0, 2, 0.3) == FrameAssembler::Outcome::Late);

    auto s1 = a.take(1);
    CHECK(s1.gaze.size() == 3);
    CHECK_FALSE(s1.level[0].has_value());
    CHECK_THROWS_AS(a.take(5), ContractViolation);
    CHECK(a.take(2).level[0] == 0.5);
    CHECK(a.next_frame() == 3);
}
