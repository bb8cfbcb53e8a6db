// Frame-by-frame session processing shared by the live gateway, the
// simulator and log replay.
//
// The engine consumes one FrameInput per frame in order. Missing samples
// are absent optionals and count as Nothing / inactive. At each bucket
// boundary the finished bucket is scored before the avatar ticks, so the
// controller sees the fresh scores on the boundary frame itself.

#pragma once

#include "sealmates/avatar.hpp"
#include "sealmates/config.hpp"
#include "sealmates/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sealmates {

struct ParticipantFrame {
    std::optional<NormPoint> gaze;   // absent: no sample arrived
    std::optional<double> level;     // absent: no sample arrived
    GazeAttribution attribution;
    bool audio_active = false;

    friend bool operator==(const ParticipantFrame&, const ParticipantFrame&) = default;
};

struct AvatarFrame {
    NormPoint position;
    AnimationPhase phase;
    std::vector<Rgb> colors;   // per viewer

    friend bool operator==(const AvatarFrame&, const AvatarFrame&) = default;
};

struct FrameRecord {
    std::int64_t frame = 0;
    std::int64_t bucket = 0;
    bool moving = false;
    std::vector<ParticipantFrame> participants;
    std::optional<AvatarFrame> avatar;   // absent under the None policy

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct SessionLog {
    SessionConfig config;
    std::string start_time;
    std::string source;
    std::vector<FrameRecord> frames;
    std::vector<ParticipationScore> scores;   // bucket-major, participant-minor

    std::int64_t complete_buckets() const
    {
        return static_cast<std::int64_t>(frames.size()) / config.bucket_frames;
    }
    /// Scores of one bucket, in participant order.
    std::span<const ParticipationScore> bucket_scores(std::int64_t bucket) const;
};

struct FrameInput {
    std::vector<std::optional<NormPoint>> gaze;
    std::vector<std::optional<double>> level;

    static FrameInput empty(int participants);
};

class SessionEngine {
public:
    using ScoresCallback = std::function<void(std::int64_t bucket, const std::vector<ParticipationScore>&)>;

    SessionEngine(SessionConfig config, std::string start_time, std::string source);

    /// Processes frame `next_frame()`.
    const FrameRecord& step(const FrameInput& input);

    std::int64_t next_frame() const { return static_cast<std::int64_t>(log_.frames.size()); }
    /// True once a fixed-duration session has seen all its frames.
    bool done() const;

    const SessionConfig& config() const { return log_.config; }
    const std::optional<AvatarController>& avatar() const { return avatar_; }
    /// Current per-viewer render states; empty under the None policy.
    std::vector<ViewerRenderState> render() const;
    /// Each viewer's APS from the most recently completed bucket (0 before).
    const std::vector<double>& viewer_aps() const { return last_aps_; }

    void on_scores(ScoresCallback cb) { on_scores_ = std::move(cb); }

    /// Scores the final bucket if it is complete and returns the log.
    /// A partial final bucket stays in the log unscored.
    SessionLog finish();

    const SessionLog& log() const { return log_; }

private:
    std::vector<ParticipationScore> close_bucket(std::int64_t bucket);

    SessionLog log_;
    std::vector<Layout> layouts_;
    std::optional<AvatarController> avatar_;
    BucketCounts counts_;
    std::vector<double> last_aps_;
    ScoresCallback on_scores_;
    bool finished_ = false;
};

/// Re-run a log's raw samples through a fresh engine.
SessionLog replay_log(const SessionLog& log);

/// Structural validation shared by gateway and simulator logs: contiguous
/// frames, bucket indices, per-participant shapes, score counts and ranges,
/// and stored scores equal to a recount of the frame records. Returns the
/// list of problems (empty when valid).
std::vector<std::string> validate_log(const SessionLog& log);

} // namespace sealmates
