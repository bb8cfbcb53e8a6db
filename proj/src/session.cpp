#include "sealmates/session.hpp"

#include "sealmates/kernels.hpp"
#include "sealmates/rng.hpp"

#include <cmath>
#include <memory>

namespace sealmates {

namespace {

constexpr std::uint64_t kAvatarStream = 0xA5A7A2ULL;

} // namespace

std::span<const ParticipationScore> SessionLog::bucket_scores(std::int64_t bucket) const
{
    const auto n = static_cast<std::size_t>(config.participant_count());
    const auto begin = static_cast<std::size_t>(bucket) * n;
    if (begin + n > scores.size()) {
        throw ContractViolation("no scores for bucket " + std::to_string(bucket));
    }
    return std::span<const ParticipationScore>(scores).subspan(begin, n);
}

FrameInput FrameInput::empty(int participants)
{
    FrameInput in;
    in.gaze.resize(static_cast<std::size_t>(participants));
    in.level.resize(static_cast<std::size_t>(participants));
    return in;
}

SessionEngine::SessionEngine(SessionConfig config, std::string start_time, std::string source)
{
    config.finalize();
    const int n = config.participant_count();
    for (int v = 0; v < n; ++v) {
        layouts_.push_back(config.viewer_layout({v}));
    }
    if (config.policy != Policy::None) {
        avatar_.emplace(config, Rng(substream_seed(config.rng_seed, kAvatarStream)));
    }
    counts_ = BucketCounts(n, config.bucket_frames);
    last_aps_.assign(static_cast<std::size_t>(n), 0.0);
    log_.config = std::move(config);
    log_.start_time = std::move(start_time);
    log_.source = std::move(source);
}

bool SessionEngine::done() const
{
    return log_.config.buckets > 0 && next_frame() >= log_.config.buckets * log_.config.bucket_frames;
}

std::vector<ParticipationScore> SessionEngine::close_bucket(std::int64_t bucket)
{
    auto scores = score_bucket(counts_, bucket);
    for (const auto& s : scores) {
        last_aps_[static_cast<std::size_t>(s.participant.ordinal)] = s.aps;
    }
    log_.scores.insert(log_.scores.end(), scores.begin(), scores.end());
    counts_ = BucketCounts(log_.config.participant_count(), log_.config.bucket_frames);
    if (on_scores_) {
        on_scores_(bucket, scores);
    }
    return scores;
}

const FrameRecord& SessionEngine::step(const FrameInput& input)
{
    if (finished_) {
        throw ContractViolation("session already finished");
    }
    const auto& cfg = log_.config;
    const auto n = static_cast<std::size_t>(cfg.participant_count());
    if (input.gaze.size() != n || input.level.size() != n) {
        throw ContractViolation("frame input must carry one slot per participant");
    }
    const std::int64_t frame = next_frame();
    const std::int64_t bucket = frame / cfg.bucket_frames;
    const bool boundary = frame > 0 && frame % cfg.bucket_frames == 0;

    std::optional<std::vector<ParticipationScore>> closed;
    if (boundary) {
        closed = close_bucket(bucket - 1);
    }

    FrameRecord rec;
    rec.frame = frame;
    rec.bucket = bucket;

    std::optional<AoiBox> sprite;
    if (avatar_) {
        const auto& st = closed ? avatar_->tick(frame, std::span<const ParticipationScore>(*closed))
                                : avatar_->tick(frame);
        rec.moving = st.moving();
        sprite = avatar_box(st.position, cfg.avatar_sprite_size);
    }

    rec.participants.resize(n);
    std::vector<GazeAttribution> attributions(n);
    // vector<bool> has no contiguous storage for span
    auto audio = std::make_unique<bool[]>(n);
    for (std::size_t p = 0; p < n; ++p) {
        auto& pf = rec.participants[p];
        pf.gaze = input.gaze[p];
        pf.level = input.level[p];
        auto& layout = layouts_[p];
        layout.avatar = sprite;
        pf.attribution = classify_gaze(pf.gaze.value_or(NormPoint::invalid()), layout);
        pf.audio_active = pf.level.has_value() && audio_active(*pf.level, cfg.audio_threshold);
        attributions[p] = pf.attribution;
        audio[p] = pf.audio_active;
    }
    counts_.add_frame(attributions, std::span<const bool>(audio.get(), n));

    if (avatar_) {
        AvatarFrame af;
        af.position = avatar_->state().position;
        af.phase = avatar_->state().phase;
        for (const auto& r : avatar_->render(last_aps_)) {
            af.colors.push_back(r.color);
        }
        rec.avatar = std::move(af);
    }

    log_.frames.push_back(std::move(rec));
    return log_.frames.back();
}

std::vector<ViewerRenderState> SessionEngine::render() const
{
    if (!avatar_) {
        return {};
    }
    return avatar_->render(last_aps_);
}

SessionLog SessionEngine::finish()
{
    if (!finished_) {
        const auto frames = next_frame();
        if (frames > 0 && frames % log_.config.bucket_frames == 0) {
            close_bucket(frames / log_.config.bucket_frames - 1);
        }
        finished_ = true;
    }
    return log_;
}

SessionLog replay_log(const SessionLog& log)
{
    SessionEngine engine(log.config, log.start_time, log.source);
    const int n = log.config.participant_count();
    for (const auto& rec : log.frames) {
        auto in = FrameInput::empty(n);
        for (std::size_t p = 0; p < rec.participants.size() && p < in.gaze.size(); ++p) {
            in.gaze[p] = rec.participants[p].gaze;
            in.level[p] = rec.participants[p].level;
        }
        engine.step(in);
    }
    return engine.finish();
}

std::vector<std::string> validate_log(const SessionLog& log)
{
    std::vector<std::string> problems;
    auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };

    const auto& cfg = log.config;
    const auto n = static_cast<std::size_t>(cfg.participant_count());
    bool shapes_ok = true;
    for (std::size_t i = 0; i < log.frames.size(); ++i) {
        const auto& rec = log.frames[i];
        const auto where = "frame " + std::to_string(i) + ": ";
        if (rec.frame != static_cast<std::int64_t>(i)) {
            fail(where + "frame index " + std::to_string(rec.frame) + " out of sequence");
        }
        if (rec.bucket != rec.frame / cfg.bucket_frames) {
            fail(where + "wrong bucket index");
        }
        if (rec.participants.size() != n) {
            fail(where + "wrong participant count");
            shapes_ok = false;
            continue;
        }
        for (const auto& pf : rec.participants) {
            if (pf.gaze && pf.gaze->valid && !(pf.gaze->x >= 0.0 && pf.gaze->x < 1.0 && pf.gaze->y >= 0.0 &&
                                               pf.gaze->y < 1.0)) {
                fail(where + "valid gaze point off screen");
            }
            if (pf.level && !(*pf.level >= 0.0 && *pf.level <= 1.0)) {
                fail(where + "audio level outside [0,1]");
            }
            if (pf.audio_active != (pf.level && audio_active(*pf.level, cfg.audio_threshold))) {
                fail(where + "audio flag disagrees with level");
            }
        }
        if ((cfg.policy == Policy::None) == rec.avatar.has_value()) {
            fail(where + "avatar presence disagrees with policy");
        } else if (rec.avatar && rec.avatar->colors.size() != n) {
            fail(where + "wrong colour count");
        }
        if (rec.moving != (rec.avatar && rec.avatar->phase.kind == PhaseKind::Moving)) {
            fail(where + "moving flag disagrees with phase");
        }
    }

    const auto buckets = log.complete_buckets();
    if (log.scores.size() != static_cast<std::size_t>(buckets) * n) {
        fail("expected " + std::to_string(buckets * static_cast<std::int64_t>(n)) + " scores, found " +
             std::to_string(log.scores.size()));
        return problems;
    }
    for (std::size_t i = 0; i < log.scores.size(); ++i) {
        const auto& s = log.scores[i];
        if (s.bucket != static_cast<std::int64_t>(i / n) ||
            s.participant.ordinal != static_cast<int>(i % n)) {
            fail("score " + std::to_string(i) + " out of order");
        }
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        bool ok = in01(s.aps) && in01(s.collective_vps) && in01(s.nothing_fraction) &&
                  s.total_percent >= 0.0 && s.total_percent <= 100.0;
        for (double v : s.self_vps_row) {
            ok = ok && in01(v);
        }
        if (!ok) {
            fail("score " + std::to_string(i) + " out of range");
        }
    }
    if (shapes_ok && problems.empty()) {
        const auto recount = kernels::rescore_buckets(log.frames, cfg.participant_count(), cfg.bucket_frames);
        for (std::int64_t b = 0; b < buckets; ++b) {
            const auto stored = log.bucket_scores(b);
            const auto& fresh = recount[static_cast<std::size_t>(b)];
            for (std::size_t p = 0; p < n; ++p) {
                if (!(stored[p] == fresh[p])) {
                    fail("bucket " + std::to_string(b) + " participant " + std::to_string(p) +
                         ": stored score differs from recount");
                }
            }
        }
    }
    return problems;
}

} // namespace sealmates
