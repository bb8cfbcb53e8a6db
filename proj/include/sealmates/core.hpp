// Engagement core: screen geometry, gaze/audio classification and the
// per-bucket participation scoring maths.
//
// Everything here is a pure function over values. Scores are built from
// integer frame counts; ratios only appear at the API boundary.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sealmates {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ParticipantId {
    int ordinal = 0;

    friend auto operator<=>(const ParticipantId&, const ParticipantId&) = default;
};

struct Participant {
    ParticipantId id;
    std::string label;
};

/// Normalized screen point. Valid points lie in [0,1)^2.
struct NormPoint {
    double x = 0.0;
    double y = 0.0;
    bool valid = false;

    static NormPoint invalid() { return {}; }
    static NormPoint at(double x, double y) { return {x, y, true}; }

    friend bool operator==(const NormPoint&, const NormPoint&) = default;
};

/// Area-of-interest key: a participant tile, the avatar sprite, or nothing.
class AoiKey {
public:
    enum class Kind : std::uint8_t { Participant, Avatar, Nothing };

    static AoiKey participant(ParticipantId id) { return AoiKey(Kind::Participant, id.ordinal); }
    static AoiKey avatar() { return AoiKey(Kind::Avatar, -1); }
    static AoiKey nothing() { return AoiKey(Kind::Nothing, -1); }

    Kind kind() const { return kind_; }
    bool is_participant() const { return kind_ == Kind::Participant; }
    bool is_nothing() const { return kind_ == Kind::Nothing; }
    /// Only meaningful for participant keys.
    ParticipantId participant_id() const { return {ordinal_}; }

    /// Compact integer code: ordinal for participants, -1 Nothing, -2 Avatar.
    int code() const
    {
        switch (kind_) {
        case Kind::Participant: return ordinal_;
        case Kind::Avatar: return -2;
        case Kind::Nothing: break;
        }
        return -1;
    }
    static AoiKey from_code(int code);

    std::string to_string() const;

    friend bool operator==(const AoiKey&, const AoiKey&) = default;

private:
    AoiKey(Kind kind, int ordinal) : kind_(kind), ordinal_(ordinal) {}

    Kind kind_;
    int ordinal_;
};

/// Half-open rectangle [x0,x1) x [y0,y1) in normalized coordinates.
struct AoiBox {
    AoiKey key = AoiKey::nothing();
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    bool contains(const NormPoint& p) const
    {
        return p.valid && p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1;
    }
    NormPoint center() const { return NormPoint::at((x0 + x1) / 2.0, (y0 + y1) / 2.0); }
    bool overlaps(const AoiBox& other) const
    {
        return x0 < other.x1 && other.x0 < x1 && y0 < other.y1 && other.y0 < y1;
    }
};

struct SpriteSize {
    double width = 0.1;
    double height = 0.1;
};

/// Sprite box centered on `center`, clamped to the unit screen.
AoiBox avatar_box(const NormPoint& center, SpriteSize size);

/// One viewer's screen: N participant tiles plus the (optional) avatar box.
struct Layout {
    ParticipantId viewer;
    std::vector<AoiBox> tiles;          // tiles[i].key == Participant(i)
    std::optional<AoiBox> avatar;       // absent when no avatar is shown

    const AoiBox& tile(ParticipantId id) const { return tiles.at(static_cast<std::size_t>(id.ordinal)); }
    /// Tile containing the point, if any.
    std::optional<ParticipantId> tile_at(const NormPoint& p) const;
};

/// Throws ContractViolation unless the layout has `n` ordered, well-formed,
/// pairwise disjoint participant tiles.
void validate_layout(const Layout& layout, int n);

/// Default tiling for n participants: a near-square grid with the last row
/// centred, each cell inset by `margin`. The tile centres' centroid falls in
/// the gutter between tiles for n = 2, 3, 4.
std::vector<AoiBox> default_tiles(int n, double margin = 0.02);

/// Centroid of the tile centres; the avatar's starting position.
NormPoint tiles_centroid(std::span<const AoiBox> tiles);

struct GazeAttribution {
    AoiKey target = AoiKey::nothing();   // Participant or Nothing
    bool avatar_overlap = false;

    friend bool operator==(const GazeAttribution&, const GazeAttribution&) = default;
};

GazeAttribution classify_gaze(const NormPoint& point, const Layout& layout);

/// Strict `level > threshold`.
bool audio_active(double level, double threshold);

double compute_aps(std::int64_t active_frame_count, std::int64_t bucket_frames);

/// Fraction of `attributions` that land on `target`. The sequence must hold
/// exactly `bucket_frames` entries (missing frames already filled as Nothing).
double compute_self_vps(std::span<const GazeAttribution> attributions, ParticipantId target,
                        std::int64_t bucket_frames);

/// Mean of the per-viewer self VPS on one target, one value per viewer.
double compute_collective_vps(std::span<const double> self_vps_on_target, int participant_count);

/// 100 * (aps + collective_vps) / 2.
double participation_score(double aps, double collective_vps);

double ideal_score(int participant_count);

struct ParticipationScore {
    ParticipantId participant;
    std::int64_t bucket = 0;
    double aps = 0.0;
    std::vector<double> self_vps_row;   // this participant as viewer, one per target
    double nothing_fraction = 0.0;      // this participant as viewer
    double collective_vps = 0.0;
    double total_percent = 0.0;

    // Raw counts kept so logs can be re-verified without the frame stream.
    std::int64_t active_frames = 0;
    std::vector<std::int64_t> gaze_counts;   // per target, then Nothing last
    std::int64_t avatar_overlap_frames = 0;

    friend bool operator==(const ParticipationScore&, const ParticipationScore&) = default;
};

/// Integer tallies for one bucket. `gaze[v][t]` counts frames where viewer v
/// looked at target t; column N is Nothing.
struct BucketCounts {
    int participant_count = 0;
    std::int64_t bucket_frames = 0;
    std::vector<std::int64_t> active;
    std::vector<std::vector<std::int64_t>> gaze;
    std::vector<std::int64_t> avatar_overlap;

    BucketCounts() = default;
    BucketCounts(int n, std::int64_t frames);

    void add_frame(std::span<const GazeAttribution> per_viewer, std::span<const bool> audio);
    std::int64_t frames_seen() const { return frames_seen_; }

    friend bool operator==(const BucketCounts&, const BucketCounts&) = default;

private:
    std::int64_t frames_seen_ = 0;
};

/// Turn a complete bucket of counts into one score per participant.
std::vector<ParticipationScore> score_bucket(const BucketCounts& counts, std::int64_t bucket);

} // namespace sealmates
