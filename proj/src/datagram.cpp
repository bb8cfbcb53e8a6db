#include "sealmates/datagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace sealmates {

using nlohmann::json;

const char* to_string(IngestErrorKind kind)
{
    switch (kind) {
    case IngestErrorKind::MalformedDatagram: return "MalformedDatagram";
    case IngestErrorKind::UnknownSession: return "UnknownSession";
    case IngestErrorKind::UnknownParticipant: return "UnknownParticipant";
    case IngestErrorKind::UnsupportedType: break;
    }
    return "UnsupportedType";
}

namespace {

IngestError malformed(std::string detail)
{
    return {IngestErrorKind::MalformedDatagram, std::move(detail)};
}

std::optional<std::int64_t> int_field(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end()) {
        return std::nullopt;
    }
    if (it->is_number_unsigned()) {
        const auto v = it->get<std::uint64_t>();
        if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            return std::nullopt;
        }
        return static_cast<std::int64_t>(v);
    }
    if (it->is_number_integer()) {
        return it->get<std::int64_t>();
    }
    return std::nullopt;
}

} // namespace

IngestResult ingest_datagram(std::string_view payload, const IngestFilter& filter)
{
    const json j = json::parse(payload.begin(), payload.end(), nullptr, false);
    if (j.is_discarded()) {
        return malformed("not valid JSON");
    }
    if (!j.is_object()) {
        return malformed("not a JSON object");
    }
    const auto v = int_field(j, "v");
    if (!v || *v != 1) {
        return malformed("missing or unsupported version");
    }
    const auto type_it = j.find("type");
    if (type_it == j.end() || !type_it->is_string()) {
        return malformed("missing type");
    }
    const auto session_it = j.find("session");
    if (session_it == j.end() || !session_it->is_string()) {
        return malformed("missing session");
    }
    const auto p = int_field(j, "p");
    const auto seq = int_field(j, "seq");
    const auto t_ms = int_field(j, "t_ms");
    if (!p || !seq || !t_ms) {
        return malformed("missing p, seq or t_ms");
    }

    const auto& type = type_it->get_ref<const std::string&>();
    if (type != "gaze" && type != "audio") {
        return IngestError{IngestErrorKind::UnsupportedType, "type '" + type + "'"};
    }

    std::string session = session_it->get<std::string>();
    if (session != filter.session) {
        return IngestError{IngestErrorKind::UnknownSession, "session '" + session + "'"};
    }
    if (*p < 0 || *p >= filter.participant_count) {
        return IngestError{IngestErrorKind::UnknownParticipant, "participant " + std::to_string(*p)};
    }

    if (type == "gaze") {
        const auto x = int_field(j, "x_px");
        const auto y = int_field(j, "y_px");
        const auto w = int_field(j, "w");
        const auto h = int_field(j, "h");
        const auto valid_it = j.find("valid");
        if (!x || !y || !w || !h || valid_it == j.end() || !valid_it->is_boolean()) {
            return malformed("gaze needs x_px, y_px, w, h, valid");
        }
        if (*w <= 0 || *h <= 0) {
            return malformed("screen size must be positive");
        }
        RawGazeDatagram d;
        d.session = std::move(session);
        d.participant = static_cast<int>(*p);
        d.seq = *seq;
        d.t_ms = *t_ms;
        d.x_px = *x;
        d.y_px = *y;
        d.screen_w = *w;
        d.screen_h = *h;
        d.valid = valid_it->get<bool>();
        return Datagram{std::move(d)};
    }

    const auto level_it = j.find("level");
    if (level_it == j.end() || !level_it->is_number()) {
        return malformed("audio needs a numeric level");
    }
    const double level = level_it->get<double>();
    if (!std::isfinite(level)) {
        return malformed("level is not finite");
    }
    RawAudioDatagram d;
    d.session = std::move(session);
    d.participant = static_cast<int>(*p);
    d.seq = *seq;
    d.t_ms = *t_ms;
    d.level = std::clamp(level, 0.0, 1.0);
    return Datagram{std::move(d)};
}

IngestResult ingest_datagram(std::span<const std::byte> payload, const IngestFilter& filter)
{
    return ingest_datagram(std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size()),
                           filter);
}

std::string encode_datagram(const RawGazeDatagram& d)
{
    return json{{"v", 1},          {"type", "gaze"},   {"session", d.session}, {"p", d.participant},
                {"seq", d.seq},    {"t_ms", d.t_ms},   {"x_px", d.x_px},       {"y_px", d.y_px},
                {"w", d.screen_w}, {"h", d.screen_h},  {"valid", d.valid}}
        .dump();
}

std::string encode_datagram(const RawAudioDatagram& d)
{
    return json{{"v", 1},       {"type", "audio"}, {"session", d.session}, {"p", d.participant},
                {"seq", d.seq}, {"t_ms", d.t_ms},  {"level", d.level}}
        .dump();
}

NormPoint remap(const RawGazeDatagram& raw)
{
    if (!raw.valid || raw.screen_w <= 0 || raw.screen_h <= 0) {
        return NormPoint::invalid();
    }
    const double x = static_cast<double>(raw.x_px) / static_cast<double>(raw.screen_w);
    const double y = static_cast<double>(raw.y_px) / static_cast<double>(raw.screen_h);
    if (!(x >= 0.0 && x < 1.0 && y >= 0.0 && y < 1.0)) {
        return NormPoint::invalid();
    }
    return NormPoint::at(x, y);
}

std::optional<std::int64_t> FrameClock::frame_at(time_point arrival) const
{
    if (arrival < start_) {
        return std::nullopt;
    }
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(arrival - start_).count();
    // ns * rate fits comfortably for sessions shorter than ~4 years at 60 Hz
    return static_cast<std::int64_t>(ns) * rate_ / 1'000'000'000LL;
}

FrameClock::time_point FrameClock::frame_start(std::int64_t frame) const
{
    // ceil so that frame_at(frame_start(f)) == f
    const auto ns = (frame * 1'000'000'000LL + rate_ - 1) / rate_;
    return start_ + std::chrono::nanoseconds(ns);
}

FrameAssembler::Slots& FrameAssembler::slots_for(std::int64_t frame)
{
    auto [it, inserted] = pending_.try_emplace(frame);
    if (inserted) {
        it->second.gaze.resize(static_cast<std::size_t>(n_));
        it->second.level.resize(static_cast<std::size_t>(n_));
    }
    return it->second;
}

FrameAssembler::Outcome FrameAssembler::add_gaze(std::int64_t frame, int participant, NormPoint point)
{
    if (frame < next_) {
        return Outcome::Late;
    }
    auto& slot = slots_for(frame).gaze.at(static_cast<std::size_t>(participant));
    if (slot) {
        return Outcome::Duplicate;
    }
    slot = point;
    return Outcome::Stored;
}

FrameAssembler::Outcome FrameAssembler::add_audio(std::int64_t frame, int participant, double level)
{
    if (frame < next_) {
        return Outcome::Late;
    }
    auto& slot = slots_for(frame).level.at(static_cast<std::size_t>(participant));
    if (slot) {
        return Outcome::Duplicate;
    }
    slot = level;
    return Outcome::Stored;
}

FrameAssembler::Slots FrameAssembler::take(std::int64_t frame)
{
    if (frame != next_) {
        throw ContractViolation("frames must be taken in order");
    }
    ++next_;
    auto node = pending_.extract(frame);
    if (node.empty()) {
        Slots empty;
        empty.gaze.resize(static_cast<std::size_t>(n_));
        empty.level.resize(static_cast<std::size_t>(n_));
        return empty;
    }
    return std::move(node.mapped());
}

} // namespace sealmates
