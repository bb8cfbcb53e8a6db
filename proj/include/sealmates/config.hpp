#pragma once

#include "sealmates/core.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace sealmates {

enum class Policy { BehaviorDriven, Random, None };

std::string to_string(Policy p);
/// Accepts "behavior", "random", "none"; throws std::invalid_argument otherwise.
Policy policy_from_string(const std::string& s);

using Rgb = std::array<int, 3>;

struct SessionConfig {
    std::string session = "session";
    std::vector<std::string> labels = {"A", "B", "C"};
    int sample_rate_hz = 60;
    std::int64_t bucket_frames = 3600;
    /// Fixed duration in buckets; 0 means open-ended (closed explicitly).
    std::int64_t buckets = 15;
    double audio_threshold = 0.05;
    int fixation_min_ms = 150;
    double fixation_dispersion = 0.03;
    SpriteSize avatar_sprite_size{0.1, 0.1};
    Policy policy = Policy::BehaviorDriven;
    std::uint64_t rng_seed = 1;

    double precursor_seconds = 5.0;
    double move_seconds = 10.0;
    Rgb color_low{0, 0, 255};
    Rgb color_high{255, 255, 0};

    /// Canonical tiles, shared by the avatar controller. Empty → default_tiles.
    std::vector<AoiBox> tiles;
    /// Optional per-viewer tiles for gaze classification; empty → canonical.
    std::vector<std::vector<AoiBox>> viewer_tiles;

    // gateway only
    std::string bind_address = "127.0.0.1";
    int udp_port = 47800;
    int stream_port = 47801;
    std::string log_dir = ".";

    int participant_count() const { return static_cast<int>(labels.size()); }
    std::int64_t precursor_frames() const;
    std::int64_t move_frames() const;

    const std::vector<AoiBox>& canonical_tiles() const { return tiles; }
    /// Layout used to classify `viewer`'s gaze (no avatar box).
    Layout viewer_layout(ParticipantId viewer) const;

    /// Fills defaults (tiles) and throws ContractViolation on any broken
    /// invariant.
    void finalize();
};

nlohmann::json to_json(const SessionConfig& cfg);
/// Missing keys keep their defaults. Result is finalized.
SessionConfig config_from_json(const nlohmann::json& j);
SessionConfig load_config(const std::filesystem::path& path);

nlohmann::json tiles_to_json(const std::vector<AoiBox>& tiles);
std::vector<AoiBox> tiles_from_json(const nlohmann::json& j);

} // namespace sealmates
