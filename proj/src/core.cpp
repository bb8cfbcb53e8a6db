#include "sealmates/core.hpp"

#include <algorithm>
#include <cmath>

namespace sealmates {

AoiKey AoiKey::from_code(int code)
{
    if (code >= 0) {
        return participant({code});
    }
    if (code == -2) {
        return avatar();
    }
    if (code == -1) {
        return nothing();
    }
    throw ContractViolation("unknown AoI code " + std::to_string(code));
}

std::string AoiKey::to_string() const
{
    switch (kind_) {
    case Kind::Participant: return "p" + std::to_string(ordinal_);
    case Kind::Avatar: return "avatar";
    case Kind::Nothing: break;
    }
    return "nothing";
}

AoiBox avatar_box(const NormPoint& center, SpriteSize size)
{
    AoiBox box;
    box.key = AoiKey::avatar();
    box.x0 = std::max(0.0, center.x - size.width / 2.0);
    box.x1 = std::min(1.0, center.x + size.width / 2.0);
    box.y0 = std::max(0.0, center.y - size.height / 2.0);
    box.y1 = std::min(1.0, center.y + size.height / 2.0);
    return box;
}

std::optional<ParticipantId> Layout::tile_at(const NormPoint& p) const
{
    for (const auto& t : tiles) {
        if (t.contains(p)) {
            return t.key.participant_id();
        }
    }
    return std::nullopt;
}

void validate_layout(const Layout& layout, int n)
{
    if (static_cast<int>(layout.tiles.size()) != n) {
        throw ContractViolation("layout must have exactly " + std::to_string(n) + " tiles");
    }
    for (int i = 0; i < n; ++i) {
        const auto& t = layout.tiles[static_cast<std::size_t>(i)];
        if (!t.key.is_participant() || t.key.participant_id().ordinal != i) {
            throw ContractViolation("tile " + std::to_string(i) + " has the wrong key");
        }
        if (!(t.x0 < t.x1 && t.y0 < t.y1)) {
            throw ContractViolation("tile " + std::to_string(i) + " is empty or inverted");
        }
        if (t.x0 < 0.0 || t.y0 < 0.0 || t.x1 > 1.0 || t.y1 > 1.0) {
            throw ContractViolation("tile " + std::to_string(i) + " leaves the screen");
        }
        for (int j = 0; j < i; ++j) {
            if (t.overlaps(layout.tiles[static_cast<std::size_t>(j)])) {
                throw ContractViolation("tiles " + std::to_string(j) + " and " + std::to_string(i) +
                                        " overlap");
            }
        }
    }
}

std::vector<AoiBox> default_tiles(int n, double margin)
{
    if (n < 1) {
        throw ContractViolation("default_tiles needs at least one participant");
    }
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = (n + cols - 1) / cols;
    const double cw = 1.0 / cols;
    const double ch = 1.0 / rows;

    std::vector<AoiBox> tiles;
    tiles.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int row = i / cols;
        const int in_row = std::min(cols, n - row * cols);
        const int col = i % cols;
        // centre a short last row
        const double offset = (cols - in_row) * cw / 2.0;
        AoiBox box;
        box.key = AoiKey::participant({i});
        box.x0 = offset + col * cw + margin;
        box.x1 = offset + (col + 1) * cw - margin;
        box.y0 = row * ch + margin;
        box.y1 = (row + 1) * ch - margin;
        tiles.push_back(box);
    }
    return tiles;
}

NormPoint tiles_centroid(std::span<const AoiBox> tiles)
{
    if (tiles.empty()) {
        throw ContractViolation("centroid of an empty layout");
    }
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& t : tiles) {
        const auto c = t.center();
        sx += c.x;
        sy += c.y;
    }
    const auto n = static_cast<double>(tiles.size());
    return NormPoint::at(sx / n, sy / n);
}

GazeAttribution classify_gaze(const NormPoint& point, const Layout& layout)
{
    GazeAttribution out;
    if (!point.valid) {
        return out;
    }
    if (auto id = layout.tile_at(point)) {
        out.target = AoiKey::participant(*id);
    }
    out.avatar_overlap = layout.avatar.has_value() && layout.avatar->contains(point);
    return out;
}

bool audio_active(double level, double threshold)
{
    return level > threshold;
}

double compute_aps(std::int64_t active_frame_count, std::int64_t bucket_frames)
{
    if (bucket_frames <= 0) {
        throw ContractViolation("bucket_frames must be positive");
    }
    if (active_frame_count < 0 || active_frame_count > bucket_frames) {
        throw ContractViolation("active frame count outside [0, bucket_frames]");
    }
    return static_cast<double>(active_frame_count) / static_cast<double>(bucket_frames);
}

double compute_self_vps(std::span<const GazeAttribution> attributions, ParticipantId target,
                        std::int64_t bucket_frames)
{
    if (static_cast<std::int64_t>(attributions.size()) != bucket_frames) {
        throw ContractViolation("self VPS needs exactly one attribution per bucket frame");
    }
    const auto key = AoiKey::participant(target);
    const auto hits = std::count_if(attributions.begin(), attributions.end(),
                                    [&](const GazeAttribution& a) { return a.target == key; });
    return compute_aps(hits, bucket_frames);
}

double compute_collective_vps(std::span<const double> self_vps_on_target, int participant_count)
{
    if (static_cast<int>(self_vps_on_target.size()) != participant_count) {
        throw ContractViolation("collective VPS needs one self VPS per viewer");
    }
    double sum = 0.0;
    for (double v : self_vps_on_target) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ContractViolation("self VPS outside [0,1]");
        }
        sum += v;
    }
    return sum / static_cast<double>(participant_count);
}

double participation_score(double aps, double collective_vps)
{
    return 100.0 * (aps + collective_vps) / 2.0;
}

double ideal_score(int participant_count)
{
    if (participant_count < 2) {
        throw ContractViolation("ideal score needs at least two participants");
    }
    return 1.0 / static_cast<double>(participant_count);
}

BucketCounts::BucketCounts(int n, std::int64_t frames)
    : participant_count(n), bucket_frames(frames), active(static_cast<std::size_t>(n), 0),
      gaze(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(n) + 1, 0)),
      avatar_overlap(static_cast<std::size_t>(n), 0)
{
}

void BucketCounts::add_frame(std::span<const GazeAttribution> per_viewer, std::span<const bool> audio)
{
    const auto n = static_cast<std::size_t>(participant_count);
    if (per_viewer.size() != n || audio.size() != n) {
        throw ContractViolation("frame must carry one entry per participant");
    }
    if (frames_seen_ >= bucket_frames) {
        throw ContractViolation("bucket already holds bucket_frames frames");
    }
    for (std::size_t v = 0; v < n; ++v) {
        const auto& a = per_viewer[v];
        const auto column = a.target.is_participant() ? static_cast<std::size_t>(a.target.code()) : n;
        ++gaze[v].at(column);
        if (a.avatar_overlap) {
            ++avatar_overlap[v];
        }
        if (audio[v]) {
            ++active[v];
        }
    }
    ++frames_seen_;
}

std::vector<ParticipationScore> score_bucket(const BucketCounts& counts, std::int64_t bucket)
{
    const int n = counts.participant_count;
    const auto un = static_cast<std::size_t>(n);
    const auto frames = counts.bucket_frames;
    if (counts.frames_seen() != frames) {
        throw ContractViolation("scoring an incomplete bucket");
    }

    std::vector<ParticipationScore> out(un);
    for (std::size_t p = 0; p < un; ++p) {
        auto& s = out[p];
        s.participant = {static_cast<int>(p)};
        s.bucket = bucket;
        s.active_frames = counts.active[p];
        s.aps = compute_aps(counts.active[p], frames);
        s.gaze_counts = counts.gaze[p];
        s.avatar_overlap_frames = counts.avatar_overlap[p];
        s.self_vps_row.resize(un);
        for (std::size_t t = 0; t < un; ++t) {
            s.self_vps_row[t] = compute_aps(counts.gaze[p][t], frames);
        }
        s.nothing_fraction = compute_aps(counts.gaze[p][un], frames);
    }
    std::vector<double> column(un);
    for (std::size_t target = 0; target < un; ++target) {
        for (std::size_t viewer = 0; viewer < un; ++viewer) {
            column[viewer] = out[viewer].self_vps_row[target];
        }
        auto& s = out[target];
        s.collective_vps = compute_collective_vps(column, n);
        s.total_percent = participation_score(s.aps, s.collective_vps);
    }
    return out;
}

} // namespace sealmates
