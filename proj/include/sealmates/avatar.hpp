// Avatar controller: the once-per-bucket decision loop and its fixed
// animation timeline.
//
// Timeline for each bucket of B frames (P precursor frames, M move frames):
//
//   [bB, bB+M)        Moving, only if a move was decided at frame bB
//   [.., (b+1)B - P)  Idle
//   [(b+1)B - P, (b+1)B)  Precursor
//
// At every boundary frame bB (b >= 1) the scores of bucket b-1 arrive and
// the policy decides whether and where to move.

#pragma once

#include "sealmates/config.hpp"
#include "sealmates/core.hpp"
#include "sealmates/rng.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sealmates {

enum class PhaseKind : std::uint8_t { Idle = 0, Precursor = 1, Moving = 2 };

struct AnimationPhase {
    PhaseKind kind = PhaseKind::Idle;
    int variant = 1;   // 1 or 2

    /// "idle1", "precursor2", "move1", ...
    std::string name() const;
    static AnimationPhase from_name(const std::string& name);

    friend bool operator==(const AnimationPhase&, const AnimationPhase&) = default;
};

/// Last variant used per phase kind. Starts at 2 so variant 1 is used first.
struct VariantHistory {
    std::array<int, 3> last{2, 2, 2};

    friend bool operator==(const VariantHistory&, const VariantHistory&) = default;
};

/// The variant not used most recently for `kind`.
int next_phase_variant(const VariantHistory& history, PhaseKind kind);

struct AvatarState {
    NormPoint position;
    AnimationPhase phase;
    NormPoint move_from;
    NormPoint move_to;
    std::int64_t move_start_frame = -1;
    std::int64_t current_bucket = 0;
    std::int64_t frame = -1;   // last ticked frame
    VariantHistory history;

    bool moving() const { return phase.kind == PhaseKind::Moving; }

    friend bool operator==(const AvatarState&, const AvatarState&) = default;
};

struct ViewerRenderState {
    ParticipantId viewer;
    NormPoint position;
    AnimationPhase phase;
    Rgb color{};

    friend bool operator==(const ViewerRenderState&, const ViewerRenderState&) = default;
};

NormPoint interpolate_position(const NormPoint& from, const NormPoint& to, double progress);

/// Per-channel linear blend from `low` to `high`, rounded half up.
Rgb avatar_color(double viewer_aps, const Rgb& low = {0, 0, 255}, const Rgb& high = {255, 255, 0});

/// Where the avatar should go next, or nothing to stay put.
///
/// BehaviorDriven picks the centre of the lowest-scoring participant's tile
/// (lowest ordinal on ties) and declines when the sprite centre already sits
/// in that tile. Random picks a tile uniformly, then a uniform point inset
/// by half the sprite. None never moves.
std::optional<NormPoint> decide_target(Policy policy, std::span<const double> total_percent,
                                       std::span<const AoiBox> tiles, const AvatarState& state,
                                       SpriteSize sprite, Rng& rng);

class AvatarController {
public:
    /// `config` must be finalized and its policy must not be None.
    AvatarController(const SessionConfig& config, Rng rng);

    /// Advance to `frame`, which must be exactly one past the previous tick.
    /// `scores` must be given at every boundary frame (multiple of the bucket
    /// length, excluding 0) and only there.
    const AvatarState& tick(std::int64_t frame,
                            std::optional<std::span<const ParticipationScore>> scores = std::nullopt);

    const AvatarState& state() const { return state_; }

    /// One render state per viewer; colours from each viewer's own APS.
    std::vector<ViewerRenderState> render(std::span<const double> viewer_aps) const;

    /// Targets decided so far, one entry per boundary (absent when skipped).
    const std::vector<std::optional<NormPoint>>& decisions() const { return decisions_; }

private:
    void enter(PhaseKind kind);

    SessionConfig config_;
    Rng rng_;
    AvatarState state_;
    std::vector<std::optional<NormPoint>> decisions_;
};

} // namespace sealmates
