#include "sealmates/analytics.hpp"

#include "sealmates/kernels.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace sealmates {

using nlohmann::json;

std::string to_string(RasDenominator d)
{
    return d == RasDenominator::Union ? "union" : "total";
}

RasDenominator ras_denominator_from_string(const std::string& s)
{
    if (s == "union") {
        return RasDenominator::Union;
    }
    if (s == "total") {
        return RasDenominator::Total;
    }
    throw std::invalid_argument("unknown RAS denominator '" + s + "'");
}

ReportFormat report_format_from_string(const std::string& s)
{
    if (s == "csv") {
        return ReportFormat::Csv;
    }
    if (s == "json") {
        return ReportFormat::Json;
    }
    throw std::invalid_argument("unknown report format '" + s + "'");
}

AnalyticsOptions AnalyticsOptions::from_config(const SessionConfig& cfg)
{
    AnalyticsOptions o;
    o.fixation.sample_rate_hz = cfg.sample_rate_hz;
    o.fixation.min_duration_ms = cfg.fixation_min_ms;
    o.fixation.dispersion = cfg.fixation_dispersion;
    return o;
}

void attribute_fixations(std::vector<FixationEvent>& fixations, const SessionLog& log)
{
    for (auto& fx : fixations) {
        const auto layout = log.config.viewer_layout(fx.viewer);
        const auto tile = layout.tile_at(fx.centroid);
        fx.aoi = tile ? AoiKey::participant(*tile) : AoiKey::nothing();
        fx.avatar_present = false;
        if (!tile) {
            continue;
        }
        const auto& box = layout.tile(*tile);
        std::int64_t with_avatar = 0;
        for (auto f = fx.start_frame; f < fx.end_frame; ++f) {
            const auto& av = log.frames.at(static_cast<std::size_t>(f)).avatar;
            if (av && box.contains(av->position)) {
                ++with_avatar;
            }
        }
        fx.avatar_present = 2 * with_avatar >= fx.frames();
    }
}

std::vector<FixationEvent> log_fixations(const SessionLog& log, const FixationParams& params)
{
    const auto traces = kernels::gaze_traces(log);
    auto per_viewer = kernels::detect_fixations_batch(traces, params);
    std::vector<FixationEvent> all;
    for (auto& v : per_viewer) {
        all.insert(all.end(), v.begin(), v.end());
    }
    attribute_fixations(all, log);
    return all;
}

namespace {

std::optional<double> ratio(double num, double den)
{
    if (den == 0.0) {
        return std::nullopt;
    }
    return num / den;
}

std::int64_t complete_frames(const SessionLog& log)
{
    return log.complete_buckets() * log.config.bucket_frames;
}

} // namespace

std::optional<double> ras(const SessionLog& log, ParticipantId participant, RasDenominator denominator)
{
    const auto frames = complete_frames(log);
    const auto p = static_cast<std::size_t>(participant.ordinal);
    std::int64_t active = 0;
    std::int64_t any_active = 0;
    for (std::int64_t f = 0; f < frames; ++f) {
        const auto& parts = log.frames[static_cast<std::size_t>(f)].participants;
        active += parts.at(p).audio_active ? 1 : 0;
        bool any = false;
        for (const auto& pf : parts) {
            any = any || pf.audio_active;
        }
        any_active += any ? 1 : 0;
    }
    const auto den = denominator == RasDenominator::Union ? any_active : frames;
    return ratio(static_cast<double>(active), static_cast<double>(den));
}

std::optional<double> collective_visual_participation(const SessionLog& log, ParticipantId participant)
{
    const auto frames = complete_frames(log);
    const int target = participant.ordinal;
    std::int64_t on_target = 0;
    std::int64_t on_any = 0;
    for (std::int64_t f = 0; f < frames; ++f) {
        for (const auto& pf : log.frames[static_cast<std::size_t>(f)].participants) {
            if (pf.attribution.target.is_participant()) {
                ++on_any;
                on_target += pf.attribution.target.code() == target ? 1 : 0;
            }
        }
    }
    return ratio(static_cast<double>(on_target), static_cast<double>(on_any));
}

const FeatureRow& FeatureReport::row(ParticipantId viewer, const AoiKey& aoi) const
{
    for (const auto& r : rows) {
        if (r.viewer == viewer && r.aoi == aoi) {
            return r;
        }
    }
    throw std::out_of_range("no feature row for viewer " + std::to_string(viewer.ordinal) + ", " + aoi.to_string());
}

FeatureReport feature_report(const SessionLog& log, const std::vector<FixationEvent>& fixations,
                             RasDenominator denominator)
{
    if (log.frames.empty()) {
        throw AnalyticsError("EmptyLog");
    }
    const int n = log.config.participant_count();
    const auto un = static_cast<std::size_t>(n);
    const auto cols = un + 1;   // tiles, then Nothing
    const auto& cfg = log.config;

    FeatureReport rep;
    rep.participant_count = n;
    rep.frames = static_cast<std::int64_t>(log.frames.size());
    rep.complete_minutes = log.complete_buckets();
    rep.ras_denominator = denominator;

    const double meeting_ms = static_cast<double>(rep.frames) * 1000.0 / cfg.sample_rate_hz;
    auto column_of = [&](const AoiKey& k) { return k.is_participant() ? static_cast<std::size_t>(k.code()) : un; };

    // per viewer x AoI tallies, and per minute avatar-co-located counts
    std::vector<FeatureRow> rows(un * cols);
    const auto minutes = static_cast<std::size_t>(rep.complete_minutes);
    std::vector<std::vector<std::int64_t>> minute_counts(un * minutes, std::vector<std::int64_t>(cols, 0));
    std::vector<std::int64_t> viewer_total(un, 0);
    std::vector<double> viewer_duration(un, 0.0);

    for (std::size_t v = 0; v < un; ++v) {
        for (std::size_t c = 0; c < cols; ++c) {
            auto& r = rows[v * cols + c];
            r.viewer = {static_cast<int>(v)};
            r.aoi = c < un ? AoiKey::participant({static_cast<int>(c)}) : AoiKey::nothing();
        }
    }
    for (const auto& fx : fixations) {
        const auto v = static_cast<std::size_t>(fx.viewer.ordinal);
        const auto c = column_of(fx.aoi);
        auto& r = rows.at(v * cols + c);
        ++r.fixation_count;
        r.fixation_duration_ms += fx.duration_ms;
        ++viewer_total[v];
        viewer_duration[v] += fx.duration_ms;
        if (fx.avatar_present) {
            ++r.avatar_fixation_count;
            r.avatar_fixation_duration_ms += fx.duration_ms;
            const auto minute = static_cast<std::size_t>(fx.start_frame / cfg.bucket_frames);
            if (minute < minutes) {
                ++minute_counts[v * minutes + minute][c];
            }
        }
    }

    // strict maximum of `counts`, if unique
    auto strict_max = [](const std::vector<std::int64_t>& counts, std::size_t limit) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        bool tie = false;
        for (std::size_t c = 0; c < limit; ++c) {
            if (!best || counts[c] > counts[*best]) {
                best = c;
                tie = false;
            } else if (counts[c] == counts[*best]) {
                tie = true;
            }
        }
        if (tie || !best) {
            return std::nullopt;
        }
        return best;
    };

    for (std::size_t v = 0; v < un; ++v) {
        std::vector<std::int64_t> wins(cols, 0);
        for (std::size_t m = 0; m < minutes; ++m) {
            if (auto c = strict_max(minute_counts[v * minutes + m], cols)) {
                ++wins[*c];
            }
        }
        for (std::size_t c = 0; c < cols; ++c) {
            auto& r = rows[v * cols + c];
            r.rfd = ratio(r.fixation_duration_ms, meeting_ms);
            r.rafd = ratio(r.avatar_fixation_duration_ms, r.fixation_duration_ms);
            r.rfc = ratio(static_cast<double>(r.fixation_count), static_cast<double>(viewer_total[v]));
            r.rafc = ratio(static_cast<double>(r.avatar_fixation_count), static_cast<double>(viewer_total[v]));
            r.rm2mfs = ratio(static_cast<double>(wins[c]), static_cast<double>(minutes));
        }
    }

    // pooled per-participant-tile maxima
    std::vector<std::int64_t> pooled_wins(un, 0);
    for (std::size_t m = 0; m < minutes; ++m) {
        std::vector<std::int64_t> pooled(un, 0);
        for (std::size_t v = 0; v < un; ++v) {
            for (std::size_t c = 0; c < un; ++c) {
                pooled[c] += minute_counts[v * minutes + m][c];
            }
        }
        if (auto c = strict_max(pooled, un)) {
            ++pooled_wins[*c];
        }
    }

    const double minutes_in_log = static_cast<double>(rep.frames) / (cfg.sample_rate_hz * 60.0);
    for (std::size_t p = 0; p < un; ++p) {
        ParticipantSummary s;
        s.participant = {static_cast<int>(p)};
        s.ras = ras(log, s.participant, denominator);
        s.collective_visual_participation = collective_visual_participation(log, s.participant);
        s.rm2mfs = ratio(static_cast<double>(pooled_wins[p]), static_cast<double>(minutes));
        s.fixation_count = viewer_total[p];
        s.total_fixation_duration_ms = viewer_duration[p];
        s.mean_fixation_duration_ms = ratio(viewer_duration[p], static_cast<double>(viewer_total[p]));
        s.fixations_per_minute = ratio(static_cast<double>(viewer_total[p]), minutes_in_log);
        rep.participants.push_back(s);
    }
    rep.rows = std::move(rows);
    return rep;
}

FeatureReport feature_report(const SessionLog& log, const AnalyticsOptions& options)
{
    if (log.frames.empty()) {
        throw AnalyticsError("EmptyLog");
    }
    return feature_report(log, log_fixations(log, options.fixation), options.ras);
}

namespace {

json opt(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

std::optional<double> opt_from(const json& j, const char* key)
{
    const auto& v = j.at(key);
    if (v.is_null()) {
        return std::nullopt;
    }
    return v.get<double>();
}

std::string csv_field(const std::optional<double>& v)
{
    if (!v) {
        return "";
    }
    return json(*v).dump();
}

} // namespace

json report_to_json(const FeatureReport& r)
{
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"viewer", row.viewer.ordinal},
                        {"aoi", row.aoi.to_string()},
                        {"fixation_count", row.fixation_count},
                        {"avatar_fixation_count", row.avatar_fixation_count},
                        {"fixation_duration_ms", row.fixation_duration_ms},
                        {"avatar_fixation_duration_ms", row.avatar_fixation_duration_ms},
                        {"rfd", opt(row.rfd)},
                        {"rafd", opt(row.rafd)},
                        {"rfc", opt(row.rfc)},
                        {"rafc", opt(row.rafc)},
                        {"rm2mfs", opt(row.rm2mfs)}});
    }
    json parts = json::array();
    for (const auto& p : r.participants) {
        parts.push_back({{"participant", p.participant.ordinal},
                         {"ras", opt(p.ras)},
                         {"collective_visual_participation", opt(p.collective_visual_participation)},
                         {"rm2mfs", opt(p.rm2mfs)},
                         {"fixation_count", p.fixation_count},
                         {"total_fixation_duration_ms", p.total_fixation_duration_ms},
                         {"mean_fixation_duration_ms", opt(p.mean_fixation_duration_ms)},
                         {"fixations_per_minute", opt(p.fixations_per_minute)}});
    }
    return {{"v", 1},
            {"participant_count", r.participant_count},
            {"frames", r.frames},
            {"complete_minutes", r.complete_minutes},
            {"ras_denominator", to_string(r.ras_denominator)},
            {"rows", rows},
            {"participants", parts}};
}

FeatureReport report_from_json(const json& j)
{
    FeatureReport r;
    r.participant_count = j.at("participant_count").get<int>();
    r.frames = j.at("frames").get<std::int64_t>();
    r.complete_minutes = j.at("complete_minutes").get<std::int64_t>();
    r.ras_denominator = ras_denominator_from_string(j.at("ras_denominator").get<std::string>());
    for (const auto& rj : j.at("rows")) {
        FeatureRow row;
        row.viewer = {rj.at("viewer").get<int>()};
        const auto aoi = rj.at("aoi").get<std::string>();
        row.aoi = aoi == "nothing" ? AoiKey::nothing() : AoiKey::participant({std::stoi(aoi.substr(1))});
        row.fixation_count = rj.at("fixation_count").get<std::int64_t>();
        row.avatar_fixation_count = rj.at("avatar_fixation_count").get<std::int64_t>();
        row.fixation_duration_ms = rj.at("fixation_duration_ms").get<double>();
        row.avatar_fixation_duration_ms = rj.at("avatar_fixation_duration_ms").get<double>();
        row.rfd = opt_from(rj, "rfd");
        row.rafd = opt_from(rj, "rafd");
        row.rfc = opt_from(rj, "rfc");
        row.rafc = opt_from(rj, "rafc");
        row.rm2mfs = opt_from(rj, "rm2mfs");
        r.rows.push_back(row);
    }
    for (const auto& pj : j.at("participants")) {
        ParticipantSummary p;
        p.participant = {pj.at("participant").get<int>()};
        p.ras = opt_from(pj, "ras");
        p.collective_visual_participation = opt_from(pj, "collective_visual_participation");
        p.rm2mfs = opt_from(pj, "rm2mfs");
        p.fixation_count = pj.at("fixation_count").get<std::int64_t>();
        p.total_fixation_duration_ms = pj.at("total_fixation_duration_ms").get<double>();
        p.mean_fixation_duration_ms = opt_from(pj, "mean_fixation_duration_ms");
        p.fixations_per_minute = opt_from(pj, "fixations_per_minute");
        r.participants.push_back(p);
    }
    return r;
}

void emit_report(const FeatureReport& report, ReportFormat format, std::ostream& out)
{
    if (format == ReportFormat::Json) {
        out << report_to_json(report).dump(2) << '\n';
        return;
    }
    out << "viewer,aoi,rfd,rafd,rfc,rafc\n";
    for (const auto& r : report.rows) {
        out << r.viewer.ordinal << ',' << r.aoi.to_string() << ',' << csv_field(r.rfd) << ',' << csv_field(r.rafd)
            << ',' << csv_field(r.rfc) << ',' << csv_field(r.rafc) << '\n';
    }
    out << "\nparticipant,ras,collective_visual_participation,rm2mfs,fixation_count,"
           "total_fixation_duration_ms,mean_fixation_duration_ms,fixations_per_minute\n";
    for (const auto& p : report.participants) {
        out << p.participant.ordinal << ',' << csv_field(p.ras) << ',' << csv_field(p.collective_visual_participation)
            << ',' << csv_field(p.rm2mfs) << ',' << p.fixation_count << ','
            << json(p.total_fixation_duration_ms).dump() << ',' << csv_field(p.mean_fixation_duration_ms) << ','
            << csv_field(p.fixations_per_minute) << '\n';
    }
}

void emit_report(const FeatureReport& report, ReportFormat format, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw AnalyticsError("cannot write report to " + path.string());
    }
    emit_report(report, format, out);
    out.flush();
    if (!out) {
        throw AnalyticsError("write failed for " + path.string());
    }
}

} // namespace sealmates
