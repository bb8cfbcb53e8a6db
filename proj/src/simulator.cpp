#include "sealmates/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sealmates {

using nlohmann::json;

void AgentModel::validate(int participant_count) const
{
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(base_speech_prob) || !prob(avatar_attraction)) {
        throw ContractViolation("agent probabilities must lie in [0,1]");
    }
    if (static_cast<int>(gaze_bias.size()) != participant_count + 1) {
        throw ContractViolation("gaze_bias needs one weight per tile plus Nothing");
    }
    double sum = 0.0;
    for (double w : gaze_bias) {
        if (!prob(w)) {
            throw ContractViolation("gaze_bias weights must lie in [0,1]");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ContractViolation("gaze_bias must sum to 1");
    }
    if (!(speech_boost_when_visited >= 0.0) || !(gaze_dwell_frames >= 1.0) || !(gaze_jitter >= 0.0)) {
        throw ContractViolation("agent boost, dwell or jitter out of range");
    }
}

namespace {

AgentModel model(double speech, std::vector<double> bias, double attraction, double boost, double dwell)
{
    AgentModel m;
    m.base_speech_prob = speech;
    m.gaze_bias = std::move(bias);
    m.avatar_attraction = attraction;
    m.speech_boost_when_visited = boost;
    m.gaze_dwell_frames = dwell;
    return m;
}

constexpr double kDwell = 20.0;

} // namespace

std::vector<std::string> builtin_scenario_names()
{
    return {"balanced", "chatty-a", "neglected-c", "self-focus-c"};
}

Scenario builtin_scenario(const std::string& name)
{
    Scenario s;
    s.name = name;
    // gaze_bias order: A, B, C, Nothing
    if (name == "balanced") {
        for (int i = 0; i < 3; ++i) {
            s.agents.push_back(model(0.25, {0.3, 0.3, 0.3, 0.1}, 0.05, 1.2, kDwell));
        }
    } else if (name == "chatty-a") {
        s.agents.push_back(model(0.6, {0.3, 0.3, 0.3, 0.1}, 0.1, 1.0, kDwell));
        s.agents.push_back(model(0.05, {0.3, 0.3, 0.3, 0.1}, 0.1, 2.0, kDwell));
        s.agents.push_back(model(0.05, {0.3, 0.3, 0.3, 0.1}, 0.1, 2.0, kDwell));
    } else if (name == "neglected-c") {
        // A and B talk to each other; C is silent and watches themselves
        s.agents.push_back(model(0.35, {0.2, 0.7, 0.0, 0.1}, 0.15, 1.0, kDwell));
        s.agents.push_back(model(0.35, {0.7, 0.2, 0.0, 0.1}, 0.15, 1.0, kDwell));
        s.agents.push_back(model(0.02, {0.0, 0.0, 0.85, 0.15}, 0.05, 3.0, kDwell));
    } else if (name == "self-focus-c") {
        s.agents.push_back(model(0.3, {0.3, 0.3, 0.3, 0.1}, 0.1, 1.0, kDwell));
        s.agents.push_back(model(0.3, {0.3, 0.3, 0.3, 0.1}, 0.1, 1.0, kDwell));
        s.agents.push_back(model(0.05, {0.1, 0.1, 0.7, 0.1}, 0.1, 2.0, kDwell));
    } else {
        throw std::invalid_argument("unknown scenario '" + name + "'");
    }
    return s;
}

Scenario scenario_from_json(const json& j)
{
    Scenario s;
    s.name = j.value("name", std::string("custom"));
    s.duration_buckets = j.value("duration_buckets", std::int64_t{15});
    if (j.contains("tiles")) {
        s.tiles = tiles_from_json(j.at("tiles"));
    }
    for (const auto& a : j.at("agents")) {
        AgentModel m;
        m.base_speech_prob = a.value("base_speech_prob", m.base_speech_prob);
        m.gaze_bias = a.at("gaze_bias").get<std::vector<double>>();
        m.avatar_attraction = a.value("avatar_attraction", m.avatar_attraction);
        m.speech_boost_when_visited = a.value("speech_boost_when_visited", m.speech_boost_when_visited);
        m.gaze_dwell_frames = a.value("gaze_dwell_frames", m.gaze_dwell_frames);
        m.gaze_jitter = a.value("gaze_jitter", m.gaze_jitter);
        s.agents.push_back(std::move(m));
    }
    return s;
}

Scenario resolve_scenario(const std::string& name_or_path, SessionConfig& base)
{
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
        return builtin_scenario(name_or_path);
    }
    std::ifstream in(name_or_path);
    if (!in) {
        throw std::runtime_error("unknown scenario '" + name_or_path + "' (not built in, no such file)");
    }
    const auto j = json::parse(in);
    if (j.contains("config")) {
        auto merged = to_json(base);
        merged.merge_patch(j.at("config"));
        if (j.at("config").contains("participants") && !j.at("config").contains("tiles")) {
            merged.erase("tiles");
        }
        base = config_from_json(merged);
    }
    return scenario_from_json(j);
}

Agent::Agent(ParticipantId self, AgentModel model, Layout layout, Rng rng)
    : self_(self), model_(std::move(model)), layout_(std::move(layout)), rng_(std::move(rng))
{
}

AgentSample Agent::step(const AvatarState* avatar, std::int64_t /*frame*/)
{
    const double u_resample = rng_.uniform();
    const double u_attract = rng_.uniform();
    const double u_target = rng_.uniform();
    const double u_x = rng_.uniform();
    const double u_y = rng_.uniform();
    const double u_jx = rng_.uniform();
    const double u_jy = rng_.uniform();
    const double u_speech = rng_.uniform();

    const auto avatar_tile = avatar ? layout_.tile_at(avatar->position) : std::nullopt;

    const bool resample = !has_anchor_ || u_resample < 1.0 / model_.gaze_dwell_frames;
    if (resample) {
        if (avatar_tile && u_attract < model_.avatar_attraction) {
            target_ = avatar_tile;
        } else {
            const auto n = layout_.tiles.size();
            std::size_t pick = n;   // Nothing
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += model_.gaze_bias[i];
                if (u_target < cum) {
                    pick = i;
                    break;
                }
            }
            target_ = pick < n ? std::optional<ParticipantId>(ParticipantId{static_cast<int>(pick)}) : std::nullopt;
        }
        if (target_) {
            const auto& t = layout_.tile(*target_);
            anchor_ = NormPoint::at(t.x0 + (t.x1 - t.x0) * u_x, t.y0 + (t.y1 - t.y0) * u_y);
        }
        has_anchor_ = true;
    }

    AgentSample out;
    if (target_) {
        out.gaze = anchor_;
        if (!resample) {
            const auto& t = layout_.tile(*target_);
            const double j = model_.gaze_jitter;
            out.gaze.x = std::clamp(anchor_.x + (2.0 * u_jx - 1.0) * j, t.x0, std::nextafter(t.x1, t.x0));
            out.gaze.y = std::clamp(anchor_.y + (2.0 * u_jy - 1.0) * j, t.y0, std::nextafter(t.y1, t.y0));
        }
    }

    double p = model_.base_speech_prob;
    if (avatar_tile && *avatar_tile == self_) {
        p *= model_.speech_boost_when_visited;
    }
    out.level = u_speech < std::min(1.0, p) ? 1.0 : 0.0;
    return out;
}

SessionLog run_scenario(const Scenario& scenario, SessionConfig config, std::uint64_t seed,
                        std::optional<std::int64_t> buckets)
{
    if (!scenario.tiles.empty()) {
        config.tiles = scenario.tiles;
    }
    config.rng_seed = seed;
    config.buckets = buckets.value_or(scenario.duration_buckets);
    if (config.buckets <= 0) {
        throw ContractViolation("a simulated session needs at least one bucket");
    }
    config.finalize();
    const int n = config.participant_count();
    if (static_cast<int>(scenario.agents.size()) != n) {
        throw ContractViolation("scenario has " + std::to_string(scenario.agents.size()) + " agents but the config has " +
                                std::to_string(n) + " participants");
    }

    std::vector<Agent> agents;
    for (int i = 0; i < n; ++i) {
        const auto& m = scenario.agents[static_cast<std::size_t>(i)];
        m.validate(n);
        agents.emplace_back(ParticipantId{i}, m, config.viewer_layout({i}),
                            Rng(substream_seed(seed, static_cast<std::uint64_t>(i))));
    }

    SessionEngine engine(config, "1970-01-01T00:00:00Z", "simulator:" + scenario.name);
    while (!engine.done()) {
        const AvatarState* avatar = engine.avatar() ? &engine.avatar()->state() : nullptr;
        const auto frame = engine.next_frame();
        auto in = FrameInput::empty(n);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const auto s = agents[i].step(avatar, frame);
            in.gaze[i] = s.gaze;
            in.level[i] = s.level;
        }
        engine.step(in);
    }
    return engine.finish();
}

} // namespace sealmates
