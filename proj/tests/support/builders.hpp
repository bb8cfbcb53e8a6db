// Small constructors for hand-built sessions.

#pragma once

#include "sealmates/session.hpp"

#include <functional>

namespace build {

using namespace sealmates;

inline SessionConfig config(std::int64_t buckets, Policy policy = Policy::None)
{
    SessionConfig cfg;
    cfg.buckets = buckets;
    cfg.policy = policy;
    cfg.finalize();
    return cfg;
}

/// Runs `frames` frames through an engine; `fill(frame, input)` sets samples.
inline SessionLog run(const SessionConfig& cfg, std::int64_t frames,
                      const std::function<void(std::int64_t, FrameInput&)>& fill)
{
    SessionEngine engine(cfg, "1970-01-01T00:00:00Z", "test");
    for (std::int64_t f = 0; f < frames && !engine.done(); ++f) {
        auto in = FrameInput::empty(cfg.participant_count());
        fill(f, in);
        engine.step(in);
    }
    return engine.finish();
}

inline NormPoint centre_of(const SessionConfig& cfg, int participant)
{
    return cfg.canonical_tiles().at(static_cast<std::size_t>(participant)).center();
}

} // namespace build
