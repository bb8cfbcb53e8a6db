#include "sealmates/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sealmates {

std::string to_string(Policy p)
{
    switch (p) {
    case Policy::BehaviorDriven: return "behavior";
    case Policy::Random: return "random";
    case Policy::None: break;
    }
    return "none";
}

Policy policy_from_string(const std::string& s)
{
    if (s == "behavior") {
        return Policy::BehaviorDriven;
    }
    if (s == "random") {
        return Policy::Random;
    }
    if (s == "none") {
        return Policy::None;
    }
    throw std::invalid_argument("unknown policy '" + s + "'");
}

std::int64_t SessionConfig::precursor_frames() const
{
    return std::llround(precursor_seconds * sample_rate_hz);
}

std::int64_t SessionConfig::move_frames() const
{
    return std::llround(move_seconds * sample_rate_hz);
}

Layout SessionConfig::viewer_layout(ParticipantId viewer) const
{
    Layout l;
    l.viewer = viewer;
    l.tiles = viewer_tiles.empty() ? tiles : viewer_tiles.at(static_cast<std::size_t>(viewer.ordinal));
    return l;
}

void SessionConfig::finalize()
{
    const int n = participant_count();
    if (n < 2) {
        throw ContractViolation("a session needs at least two participants");
    }
    if (sample_rate_hz <= 0) {
        throw ContractViolation("sample_rate_hz must be positive");
    }
    if (bucket_frames != static_cast<std::int64_t>(sample_rate_hz) * 60) {
        throw ContractViolation("bucket_frames must equal sample_rate_hz * 60");
    }
    if (buckets < 0) {
        throw ContractViolation("buckets must be non-negative");
    }
    if (!(audio_threshold > 0.0 && audio_threshold <= 1.0)) {
        throw ContractViolation("audio_threshold must lie in (0,1]");
    }
    if (fixation_min_ms <= 0 || !(fixation_dispersion > 0.0)) {
        throw ContractViolation("fixation thresholds must be positive");
    }
    if (!(avatar_sprite_size.width > 0.0 && avatar_sprite_size.height > 0.0)) {
        throw ContractViolation("avatar sprite size must be positive");
    }
    if (!(precursor_seconds > 0.0 && move_seconds > 0.0) ||
        precursor_frames() + move_frames() > bucket_frames) {
        throw ContractViolation("precursor and move phases must fit inside one bucket");
    }
    for (const auto& rgb : {color_low, color_high}) {
        for (int c : rgb) {
            if (c < 0 || c > 255) {
                throw ContractViolation("colour channel outside 0..255");
            }
        }
    }
    if (tiles.empty()) {
        tiles = default_tiles(n);
    }
    validate_layout(Layout{{0}, tiles, std::nullopt}, n);
    if (!viewer_tiles.empty()) {
        if (static_cast<int>(viewer_tiles.size()) != n) {
            throw ContractViolation("viewer_tiles needs one layout per participant");
        }
        for (int v = 0; v < n; ++v) {
            validate_layout(viewer_layout({v}), n);
        }
    }
}

nlohmann::json tiles_to_json(const std::vector<AoiBox>& tiles)
{
    auto arr = nlohmann::json::array();
    for (const auto& t : tiles) {
        arr.push_back({t.x0, t.y0, t.x1, t.y1});
    }
    return arr;
}

std::vector<AoiBox> tiles_from_json(const nlohmann::json& j)
{
    std::vector<AoiBox> tiles;
    int i = 0;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 4) {
            throw std::invalid_argument("tile must be [x0, y0, x1, y1]");
        }
        AoiBox b;
        b.key = AoiKey::participant({i++});
        b.x0 = row[0].get<double>();
        b.y0 = row[1].get<double>();
        b.x1 = row[2].get<double>();
        b.y1 = row[3].get<double>();
        tiles.push_back(b);
    }
    return tiles;
}

nlohmann::json to_json(const SessionConfig& c)
{
    nlohmann::json j;
    j["session"] = c.session;
    j["participants"] = c.labels;
    j["sample_rate_hz"] = c.sample_rate_hz;
    j["bucket_frames"] = c.bucket_frames;
    j["buckets"] = c.buckets;
    j["audio_threshold"] = c.audio_threshold;
    j["fixation_min_ms"] = c.fixation_min_ms;
    j["fixation_dispersion"] = c.fixation_dispersion;
    j["avatar_sprite_size"] = {c.avatar_sprite_size.width, c.avatar_sprite_size.height};
    j["policy"] = to_string(c.policy);
    j["rng_seed"] = c.rng_seed;
    j["precursor_seconds"] = c.precursor_seconds;
    j["move_seconds"] = c.move_seconds;
    j["color_low"] = c.color_low;
    j["color_high"] = c.color_high;
    j["tiles"] = tiles_to_json(c.tiles);
    if (!c.viewer_tiles.empty()) {
        auto per = nlohmann::json::array();
        for (const auto& t : c.viewer_tiles) {
            per.push_back(tiles_to_json(t));
        }
        j["viewer_tiles"] = per;
    }
    j["bind_address"] = c.bind_address;
    j["udp_port"] = c.udp_port;
    j["stream_port"] = c.stream_port;
    j["log_dir"] = c.log_dir;
    return j;
}

SessionConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }
    SessionConfig c;
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            field = j.at(key).get<std::decay_t<decltype(field)>>();
        }
    };
    take("session", c.session);
    take("participants", c.labels);
    take("sample_rate_hz", c.sample_rate_hz);
    if (j.contains("sample_rate_hz") && !j.contains("bucket_frames")) {
        c.bucket_frames = static_cast<std::int64_t>(c.sample_rate_hz) * 60;
    }
    take("bucket_frames", c.bucket_frames);
    take("buckets", c.buckets);
    take("audio_threshold", c.audio_threshold);
    take("fixation_min_ms", c.fixation_min_ms);
    take("fixation_dispersion", c.fixation_dispersion);
    if (j.contains("avatar_sprite_size")) {
        const auto& s = j.at("avatar_sprite_size");
        c.avatar_sprite_size = {s.at(0).get<double>(), s.at(1).get<double>()};
    }
    if (j.contains("policy")) {
        c.policy = policy_from_string(j.at("policy").get<std::string>());
    }
    take("rng_seed", c.rng_seed);
    take("precursor_seconds", c.precursor_seconds);
    take("move_seconds", c.move_seconds);
    take("color_low", c.color_low);
    take("color_high", c.color_high);
    if (j.contains("tiles")) {
        c.tiles = tiles_from_json(j.at("tiles"));
    }
    if (j.contains("viewer_tiles")) {
        for (const auto& t : j.at("viewer_tiles")) {
            c.viewer_tiles.push_back(tiles_from_json(t));
        }
    }
    take("bind_address", c.bind_address);
    take("udp_port", c.udp_port);
    take("stream_port", c.stream_port);
    take("log_dir", c.log_dir);
    c.finalize();
    return c;
}

SessionConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    return config_from_json(nlohmann::json::parse(in));
}

} // namespace sealmates
