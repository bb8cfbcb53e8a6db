#include "sealmates/avatar.hpp"

#include <algorithm>
#include <cmath>

namespace sealmates {

namespace {

const char* kind_name(PhaseKind k)
{
    switch (k) {
    case PhaseKind::Idle: return "idle";
    case PhaseKind::Precursor: return "precursor";
    case PhaseKind::Moving: break;
    }
    return "move";
}

} // namespace

std::string AnimationPhase::name() const
{
    return kind_name(kind) + std::to_string(variant);
}

AnimationPhase AnimationPhase::from_name(const std::string& name)
{
    for (auto k : {PhaseKind::Idle, PhaseKind::Precursor, PhaseKind::Moving}) {
        for (int v : {1, 2}) {
            AnimationPhase p{k, v};
            if (p.name() == name) {
                return p;
            }
        }
    }
    throw std::invalid_argument("unknown animation phase '" + name + "'");
}

int next_phase_variant(const VariantHistory& history, PhaseKind kind)
{
    return history.last[static_cast<std::size_t>(kind)] == 1 ? 2 : 1;
}

NormPoint interpolate_position(const NormPoint& from, const NormPoint& to, double progress)
{
    if (!(progress >= 0.0 && progress <= 1.0)) {
        throw ContractViolation("interpolation progress outside [0,1]");
    }
    return NormPoint::at(from.x + (to.x - from.x) * progress, from.y + (to.y - from.y) * progress);
}

Rgb avatar_color(double viewer_aps, const Rgb& low, const Rgb& high)
{
    const double t = std::clamp(viewer_aps, 0.0, 1.0);
    Rgb out{};
    for (std::size_t c = 0; c < 3; ++c) {
        const double v = low[c] + (high[c] - low[c]) * t;
        out[c] = static_cast<int>(std::floor(v + 0.5));
    }
    return out;
}

std::optional<NormPoint> decide_target(Policy policy, std::span<const double> total_percent,
                                       std::span<const AoiBox> tiles, const AvatarState& state,
                                       SpriteSize sprite, Rng& rng)
{
    switch (policy) {
    case Policy::None:
        return std::nullopt;

    case Policy::BehaviorDriven: {
        if (total_percent.size() != tiles.size() || tiles.empty()) {
            throw ContractViolation("behaviour-driven decision needs one score per participant");
        }
        std::size_t lowest = 0;
        for (std::size_t i = 1; i < total_percent.size(); ++i) {
            if (total_percent[i] < total_percent[lowest]) {
                lowest = i;
            }
        }
        const auto& tile = tiles[lowest];
        if (tile.contains(state.position)) {
            return std::nullopt;
        }
        return tile.center();
    }

    case Policy::Random: {
        if (tiles.empty()) {
            throw ContractViolation("random decision needs at least one tile");
        }
        const auto& tile = tiles[rng.below(tiles.size())];
        auto axis = [&](double lo, double hi, double extent) {
            const double a = lo + extent / 2.0;
            const double b = hi - extent / 2.0;
            // a tile narrower than the sprite collapses to its centre line
            return a < b ? rng.uniform(a, b) : (lo + hi) / 2.0;
        };
        const double x = axis(tile.x0, tile.x1, sprite.width);
        const double y = axis(tile.y0, tile.y1, sprite.height);
        return NormPoint::at(x, y);
    }
    }
    return std::nullopt;
}

AvatarController::AvatarController(const SessionConfig& config, Rng rng)
    : config_(config), rng_(std::move(rng))
{
    if (config.policy == Policy::None) {
        throw ContractViolation("no avatar controller under the None policy");
    }
    state_.position = tiles_centroid(config.canonical_tiles());
    state_.move_from = state_.position;
    state_.move_to = state_.position;
    enter(PhaseKind::Idle);
}

void AvatarController::enter(PhaseKind kind)
{
    const int v = next_phase_variant(state_.history, kind);
    state_.history.last[static_cast<std::size_t>(kind)] = v;
    state_.phase = {kind, v};
}

const AvatarState& AvatarController::tick(std::int64_t frame,
                                          std::optional<std::span<const ParticipationScore>> scores)
{
    if (frame != state_.frame + 1) {
        throw ContractViolation("avatar tick out of order: expected frame " +
                                std::to_string(state_.frame + 1) + ", got " + std::to_string(frame));
    }
    const auto bucket_frames = config_.bucket_frames;
    const auto offset = frame % bucket_frames;
    const bool boundary = frame > 0 && offset == 0;
    if (boundary != scores.has_value()) {
        throw ContractViolation(boundary ? "scores missing at bucket boundary"
                                         : "scores supplied away from a bucket boundary");
    }
    state_.frame = frame;
    state_.current_bucket = frame / bucket_frames;

    if (boundary) {
        const auto n = static_cast<std::size_t>(config_.participant_count());
        if (scores->size() != n) {
            throw ContractViolation("boundary needs one score per participant");
        }
        std::vector<double> totals(n);
        for (const auto& s : *scores) {
            totals.at(static_cast<std::size_t>(s.participant.ordinal)) = s.total_percent;
        }
        auto target = decide_target(config_.policy, totals, config_.canonical_tiles(), state_,
                                    config_.avatar_sprite_size, rng_);
        decisions_.push_back(target);
        if (target) {
            state_.move_from = state_.position;
            state_.move_to = *target;
            state_.move_start_frame = frame;
            enter(PhaseKind::Moving);
        } else {
            enter(PhaseKind::Idle);
        }
    } else if (state_.moving() && frame - state_.move_start_frame >= config_.move_frames()) {
        state_.position = state_.move_to;
        enter(PhaseKind::Idle);
    }

    if (offset == bucket_frames - config_.precursor_frames()) {
        enter(PhaseKind::Precursor);
    }

    if (state_.moving()) {
        const double progress = static_cast<double>(frame - state_.move_start_frame) /
                                static_cast<double>(config_.move_frames());
        state_.position = interpolate_position(state_.move_from, state_.move_to, progress);
    }
    return state_;
}

std::vector<ViewerRenderState> AvatarController::render(std::span<const double> viewer_aps) const
{
    std::vector<ViewerRenderState> out;
    out.reserve(viewer_aps.size());
    for (std::size_t v = 0; v < viewer_aps.size(); ++v) {
        out.push_back({{static_cast<int>(v)},
                       state_.position,
                       state_.phase,
                       avatar_color(viewer_aps[v], config_.color_low, config_.color_high)});
    }
    return out;
}

} // namespace sealmates
