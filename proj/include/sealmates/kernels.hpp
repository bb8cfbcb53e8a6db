// Batch kernels over whole logs. Each has an OpenMP driver and a serial
// reference; both run the same per-item body, and the tests require their
// outputs to match exactly.

#pragma once

#include "sealmates/core.hpp"
#include "sealmates/fixation.hpp"
#include "sealmates/session.hpp"

#include <span>
#include <vector>

namespace sealmates::kernels {

/// Recount every complete bucket of `frames` from the recorded attributions
/// and audio flags. result[b] holds bucket b's scores in participant order.
std::vector<std::vector<ParticipationScore>> rescore_buckets(std::span<const FrameRecord> frames,
                                                             int participant_count, std::int64_t bucket_frames);
std::vector<std::vector<ParticipationScore>> rescore_buckets_serial(std::span<const FrameRecord> frames,
                                                                    int participant_count,
                                                                    std::int64_t bucket_frames);

struct GazeTrace {
    ParticipantId viewer;
    std::vector<NormPoint> points;
};

std::vector<std::vector<FixationEvent>> detect_fixations_batch(std::span<const GazeTrace> traces,
                                                               const FixationParams& params);
std::vector<std::vector<FixationEvent>> detect_fixations_batch_serial(std::span<const GazeTrace> traces,
                                                                      const FixationParams& params);

/// Per-viewer gaze traces of a log, missing samples as invalid points.
std::vector<GazeTrace> gaze_traces(const SessionLog& log);

} // namespace sealmates::kernels
