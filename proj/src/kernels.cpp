#include "sealmates/kernels.hpp"

#include <memory>

namespace sealmates::kernels {

namespace {

std::vector<ParticipationScore> rescore_one(std::span<const FrameRecord> frames, int n, std::int64_t bucket_frames,
                                            std::int64_t bucket)
{
    BucketCounts counts(n, bucket_frames);
    const auto un = static_cast<std::size_t>(n);
    std::vector<GazeAttribution> att(un);
    auto audio = std::make_unique<bool[]>(un);
    const auto begin = static_cast<std::size_t>(bucket * bucket_frames);
    for (std::size_t f = begin; f < begin + static_cast<std::size_t>(bucket_frames); ++f) {
        const auto& rec = frames[f];
        for (std::size_t p = 0; p < un; ++p) {
            att[p] = rec.participants[p].attribution;
            audio[p] = rec.participants[p].audio_active;
        }
        counts.add_frame(att, std::span<const bool>(audio.get(), un));
    }
    return score_bucket(counts, bucket);
}

} // namespace

std::vector<std::vector<ParticipationScore>> rescore_buckets(std::span<const FrameRecord> frames,
                                                             int participant_count, std::int64_t bucket_frames)
{
    const auto buckets = static_cast<std::int64_t>(frames.size()) / bucket_frames;
    std::vector<std::vector<ParticipationScore>> out(static_cast<std::size_t>(buckets));
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < buckets; ++b) {
        out[static_cast<std::size_t>(b)] = rescore_one(frames, participant_count, bucket_frames, b);
    }
    return out;
}

std::vector<std::vector<ParticipationScore>> rescore_buckets_serial(std::span<const FrameRecord> frames,
                                                                    int participant_count,
                                                                    std::int64_t bucket_frames)
{
    const auto buckets = static_cast<std::int64_t>(frames.size()) / bucket_frames;
    std::vector<std::vector<ParticipationScore>> out;
    out.reserve(static_cast<std::size_t>(buckets));
    for (std::int64_t b = 0; b < buckets; ++b) {
        out.push_back(rescore_one(frames, participant_count, bucket_frames, b));
    }
    return out;
}

std::vector<std::vector<FixationEvent>> detect_fixations_batch(std::span<const GazeTrace> traces,
                                                               const FixationParams& params)
{
    const auto count = static_cast<std::int64_t>(traces.size());
    std::vector<std::vector<FixationEvent>> out(traces.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) {
        const auto& t = traces[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = detect_fixations(t.points, params, t.viewer);
    }
    return out;
}

std::vector<std::vector<FixationEvent>> detect_fixations_batch_serial(std::span<const GazeTrace> traces,
                                                                      const FixationParams& params)
{
    std::vector<std::vector<FixationEvent>> out;
    out.reserve(traces.size());
    for (const auto& t : traces) {
        out.push_back(detect_fixations(t.points, params, t.viewer));
    }
    return out;
}

std::vector<GazeTrace> gaze_traces(const SessionLog& log)
{
    const int n = log.config.participant_count();
    std::vector<GazeTrace> traces(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        auto& t = traces[static_cast<std::size_t>(v)];
        t.viewer = {v};
        t.points.reserve(log.frames.size());
        for (const auto& rec : log.frames) {
            t.points.push_back(rec.participants.at(static_cast<std::size_t>(v)).gaze.value_or(NormPoint::invalid()));
        }
    }
    return traces;
}

} // namespace sealmates::kernels
