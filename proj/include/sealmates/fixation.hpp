// Dispersion-threshold (I-DT) fixation detection over per-frame gaze.

#pragma once

#include "sealmates/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sealmates {

struct FixationParams {
    int sample_rate_hz = 60;
    int min_duration_ms = 150;
    /// Bound on (max x - min x) + (max y - min y) over the window.
    double dispersion = 0.03;

    /// Smallest window length (frames) whose duration reaches min_duration_ms.
    std::int64_t min_frames() const;
    double frames_to_ms(std::int64_t frames) const;
};

struct FixationEvent {
    ParticipantId viewer;
    std::int64_t start_frame = 0;
    std::int64_t end_frame = 0;   // one past the last frame
    double duration_ms = 0.0;
    NormPoint centroid;
    AoiKey aoi = AoiKey::nothing();
    bool avatar_present = false;

    std::int64_t frames() const { return end_frame - start_frame; }

    friend bool operator==(const FixationEvent&, const FixationEvent&) = default;
};

/// Greedy left-to-right I-DT. A window starts once `min_frames` consecutive
/// valid points fit the dispersion bound, then grows while the bound still
/// holds; the grown window is one fixation and scanning resumes after it.
/// Invalid points break any window. `aoi` and `avatar_present` are left at
/// their defaults; see attribute_fixations.
std::vector<FixationEvent> detect_fixations(std::span<const NormPoint> gaze, const FixationParams& params,
                                            ParticipantId viewer = {});

} // namespace sealmates
