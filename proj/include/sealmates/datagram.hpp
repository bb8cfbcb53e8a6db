// Ingest wire format: one UTF-8 JSON object per UDP datagram.
//
//   {"v":1, "type":"gaze",  "session":str, "p":int, "seq":int, "t_ms":int,
//    "x_px":int, "y_px":int, "w":int, "h":int, "valid":bool}
//   {"v":1, "type":"audio", "session":str, "p":int, "seq":int, "t_ms":int,
//    "level":number}
//
// Unknown extra fields are ignored.

#pragma once

#include "sealmates/core.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sealmates {

struct RawGazeDatagram {
    std::string session;
    int participant = 0;
    std::int64_t seq = 0;
    std::int64_t t_ms = 0;
    std::int64_t x_px = 0;
    std::int64_t y_px = 0;
    std::int64_t screen_w = 1;
    std::int64_t screen_h = 1;
    bool valid = true;

    friend bool operator==(const RawGazeDatagram&, const RawGazeDatagram&) = default;
};

struct RawAudioDatagram {
    std::string session;
    int participant = 0;
    std::int64_t seq = 0;
    std::int64_t t_ms = 0;
    double level = 0.0;   // clamped to [0,1] on ingest

    friend bool operator==(const RawAudioDatagram&, const RawAudioDatagram&) = default;
};

using Datagram = std::variant<RawGazeDatagram, RawAudioDatagram>;

enum class IngestErrorKind { MalformedDatagram, UnknownSession, UnknownParticipant, UnsupportedType };

const char* to_string(IngestErrorKind kind);

struct IngestError {
    IngestErrorKind kind;
    std::string detail;
};

/// What the receiving session accepts.
struct IngestFilter {
    std::string session;
    int participant_count = 3;
};

using IngestResult = std::variant<Datagram, IngestError>;

/// Parse and schema-check one datagram. Never throws.
IngestResult ingest_datagram(std::span<const std::byte> payload, const IngestFilter& filter);
IngestResult ingest_datagram(std::string_view payload, const IngestFilter& filter);

std::string encode_datagram(const RawGazeDatagram& d);
std::string encode_datagram(const RawAudioDatagram& d);

/// Pixel gaze to normalized screen point; off-screen or flagged-invalid
/// samples become invalid points.
NormPoint remap(const RawGazeDatagram& raw);

/// Maps gateway arrival times to 60 Hz (or configured rate) frame indices.
class FrameClock {
public:
    using time_point = std::chrono::steady_clock::time_point;

    FrameClock(time_point start, int sample_rate_hz) : start_(start), rate_(sample_rate_hz) {}

    /// floor((arrival - start) * rate); absent for arrivals before start.
    std::optional<std::int64_t> frame_at(time_point arrival) const;
    /// Start time of `frame`.
    time_point frame_start(std::int64_t frame) const;

    time_point start() const { return start_; }

private:
    time_point start_;
    int rate_;
};

/// Buffers samples per frame until the frame is processed. First arrival
/// wins per (participant, frame, kind); missing slots stay empty.
class FrameAssembler {
public:
    enum class Outcome { Stored, Duplicate, Late };

    explicit FrameAssembler(int participant_count) : n_(participant_count) {}

    Outcome add_gaze(std::int64_t frame, int participant, NormPoint point);
    Outcome add_audio(std::int64_t frame, int participant, double level);

    /// Removes and returns the samples of `frame`. Frames must be taken in
    /// order; anything later offered for a taken frame is Late.
    struct Slots {
        std::vector<std::optional<NormPoint>> gaze;
        std::vector<std::optional<double>> level;
    };
    Slots take(std::int64_t frame);

    std::int64_t next_frame() const { return next_; }
    std::size_t pending_frames() const { return pending_.size(); }

private:
    Slots& slots_for(std::int64_t frame);

    int n_;
    std::int64_t next_ = 0;
    std::map<std::int64_t, Slots> pending_;
};

} // namespace sealmates
