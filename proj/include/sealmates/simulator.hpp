// Synthetic triads: scripted gaze/speech agents driving an in-process
// session, producing logs with the same schema as the live gateway.

#pragma once

#include "sealmates/avatar.hpp"
#include "sealmates/config.hpp"
#include "sealmates/rng.hpp"
#include "sealmates/session.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sealmates {

struct AgentModel {
    double base_speech_prob = 0.2;
    /// One weight per participant tile, then Nothing; sums to 1.
    std::vector<double> gaze_bias;
    /// Chance of looking at the tile the avatar currently sits in.
    double avatar_attraction = 0.0;
    /// Speech probability multiplier while the avatar is on the agent's tile.
    double speech_boost_when_visited = 1.0;
    /// Mean gaze dwell in frames (geometric). 1 re-draws the target every
    /// frame; larger values hold a point so fixations form.
    double gaze_dwell_frames = 1.0;
    /// Half-width of the per-frame jitter around a held gaze point.
    double gaze_jitter = 0.004;

    /// Throws ContractViolation on out-of-range parameters.
    void validate(int participant_count) const;
};

struct Scenario {
    std::string name;
    std::vector<AgentModel> agents;
    std::int64_t duration_buckets = 15;
    std::vector<AoiBox> tiles;   // empty: the config's canonical tiles
};

std::vector<std::string> builtin_scenario_names();
/// balanced, chatty-a, neglected-c, self-focus-c (three participants).
Scenario builtin_scenario(const std::string& name);

/// {"name", "duration_buckets", "tiles"?, "agents":[...], "config"?:{...}}
Scenario scenario_from_json(const nlohmann::json& j);
/// Built-in name or path to a scenario JSON file. A file's "config" block
/// is applied on top of `base`.
Scenario resolve_scenario(const std::string& name_or_path, SessionConfig& base);

struct AgentSample {
    NormPoint gaze;
    double level = 0.0;
};

/// One scripted participant. Every step draws the same number of random
/// values whatever the avatar does, so agents' substreams stay aligned.
class Agent {
public:
    Agent(ParticipantId self, AgentModel model, Layout layout, Rng rng);

    /// Sample for `frame` given the avatar as last rendered (absent under
    /// the None policy).
    AgentSample step(const AvatarState* avatar, std::int64_t frame);

    const AgentModel& model() const { return model_; }

private:

    ParticipantId self_;
    AgentModel model_;
    Layout layout_;
    Rng rng_;
    std::optional<ParticipantId> target_;
    NormPoint anchor_;
    bool has_anchor_ = false;
};

/// Run a whole session frame by frame. All randomness derives from `seed`
/// (it also replaces config.rng_seed); config.buckets is taken from the
/// scenario unless already set by the caller via `buckets`.
SessionLog run_scenario(const Scenario& scenario, SessionConfig config, std::uint64_t seed,
                        std::optional<std::int64_t> buckets = std::nullopt);

} // namespace sealmates
