#include "sealmates/fixation.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace sealmates {

std::int64_t FixationParams::min_frames() const
{
    if (sample_rate_hz <= 0 || min_duration_ms <= 0) {
        throw ContractViolation("fixation parameters must be positive");
    }
    const std::int64_t scaled = static_cast<std::int64_t>(min_duration_ms) * sample_rate_hz;
    return std::max<std::int64_t>(1, (scaled + 999) / 1000);
}

double FixationParams::frames_to_ms(std::int64_t frames) const
{
    return static_cast<double>(frames) * 1000.0 / static_cast<double>(sample_rate_hz);
}

namespace {

// Sliding-window extremum over indices; both window ends only move forward.
template <typename Better>
class Extremum {
public:
    Extremum(std::span<const NormPoint> pts, bool use_x) : pts_(pts), use_x_(use_x) {}

    double value_of(std::size_t i) const { return use_x_ ? pts_[i].x : pts_[i].y; }

    void push(std::size_t i)
    {
        const double v = value_of(i);
        while (!idx_.empty() && !Better{}(value_of(idx_.back()), v)) {
            idx_.pop_back();
        }
        idx_.push_back(i);
    }
    void evict_before(std::size_t lo)
    {
        while (!idx_.empty() && idx_.front() < lo) {
            idx_.pop_front();
        }
    }
    double best() const { return value_of(idx_.front()); }
    /// Extremum if index i joined the window.
    double best_with(std::size_t i) const
    {
        const double v = value_of(i);
        return Better{}(best(), v) ? best() : v;
    }
    void clear() { idx_.clear(); }

private:
    std::span<const NormPoint> pts_;
    bool use_x_;
    std::deque<std::size_t> idx_;
};

} // namespace

std::vector<FixationEvent> detect_fixations(std::span<const NormPoint> gaze, const FixationParams& params,
                                            ParticipantId viewer)
{
    if (!(params.dispersion > 0.0)) {
        throw ContractViolation("fixation dispersion must be positive");
    }
    const auto m = static_cast<std::size_t>(params.min_frames());
    const std::size_t n = gaze.size();

    Extremum<std::less<>> min_x(gaze, true), min_y(gaze, false);
    Extremum<std::greater<>> max_x(gaze, true), max_y(gaze, false);
    auto push = [&](std::size_t i) {
        min_x.push(i);
        min_y.push(i);
        max_x.push(i);
        max_y.push(i);
    };
    auto clear = [&] {
        min_x.clear();
        min_y.clear();
        max_x.clear();
        max_y.clear();
    };
    auto dispersion = [&] { return (max_x.best() - min_x.best()) + (max_y.best() - min_y.best()); };

    std::vector<FixationEvent> out;
    std::size_t lo = 0;
    std::size_t hi = 0;   // window is [lo, hi)
    while (true) {
        while (hi < lo + m && hi < n) {
            if (!gaze[hi].valid) {
                lo = hi + 1;
                hi = lo;
                clear();
                continue;
            }
            push(hi++);
        }
        if (hi < lo + m) {
            break;
        }
        if (dispersion() > params.dispersion) {
            ++lo;
            min_x.evict_before(lo);
            min_y.evict_before(lo);
            max_x.evict_before(lo);
            max_y.evict_before(lo);
            continue;
        }
        while (hi < n && gaze[hi].valid) {
            const double d = (max_x.best_with(hi) - min_x.best_with(hi)) +
                             (max_y.best_with(hi) - min_y.best_with(hi));
            if (d > params.dispersion) {
                break;
            }
            push(hi++);
        }

        FixationEvent fx;
        fx.viewer = viewer;
        fx.start_frame = static_cast<std::int64_t>(lo);
        fx.end_frame = static_cast<std::int64_t>(hi);
        fx.duration_ms = params.frames_to_ms(fx.frames());
        double sx = 0.0;
        double sy = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            sx += gaze[i].x;
            sy += gaze[i].y;
        }
        const auto k = static_cast<double>(hi - lo);
        fx.centroid = NormPoint::at(sx / k, sy / k);
        out.push_back(fx);

        lo = hi;
        clear();
    }
    return out;
}

} // namespace sealmates
