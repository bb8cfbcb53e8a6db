// Offline engagement analytics over a session log.
//
// Ratios whose denominator is zero are reported as absent (std::nullopt,
// null in JSON, an empty CSV field).

#pragma once

#include "sealmates/fixation.hpp"
#include "sealmates/session.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sealmates {

class AnalyticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RasDenominator {
    Union,   // minutes' union-of-speakers activity
    Total,   // all frames of the complete minutes
};

std::string to_string(RasDenominator d);
RasDenominator ras_denominator_from_string(const std::string& s);

struct AnalyticsOptions {
    FixationParams fixation;
    RasDenominator ras = RasDenominator::Union;

    /// Fixation thresholds taken from the log's config.
    static AnalyticsOptions from_config(const SessionConfig& cfg);
};

/// Fills each fixation's AoI (tile containing the centroid, else Nothing)
/// and avatar_present (avatar sprite centre inside that tile for at least
/// half of the fixation's frames; always false for Nothing or without an
/// avatar).
void attribute_fixations(std::vector<FixationEvent>& fixations, const SessionLog& log);

/// Detect and attribute fixations for every viewer of the log.
std::vector<FixationEvent> log_fixations(const SessionLog& log, const FixationParams& params);

/// Relative audio score (collective oral participation) over complete
/// buckets: sum of the participant's active frames over the sum of the
/// denominator's frames.
std::optional<double> ras(const SessionLog& log, ParticipantId participant,
                          RasDenominator denominator = RasDenominator::Union);

/// Share of all collective VPS mass that falls on `participant` across the
/// complete buckets.
std::optional<double> collective_visual_participation(const SessionLog& log, ParticipantId participant);

struct FeatureRow {
    ParticipantId viewer;
    AoiKey aoi = AoiKey::nothing();
    std::int64_t fixation_count = 0;
    std::int64_t avatar_fixation_count = 0;
    double fixation_duration_ms = 0.0;
    double avatar_fixation_duration_ms = 0.0;
    std::optional<double> rfd;
    std::optional<double> rafd;
    std::optional<double> rfc;
    std::optional<double> rafc;
    /// Share of complete minutes where this AoI had this viewer's strictly
    /// largest avatar-co-located fixation count.
    std::optional<double> rm2mfs;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct ParticipantSummary {
    ParticipantId participant;
    std::optional<double> ras;
    std::optional<double> collective_visual_participation;
    /// Share of complete minutes where this participant's tile held the
    /// strictly largest avatar-co-located fixation count, pooled over viewers.
    std::optional<double> rm2mfs;
    // as viewer
    std::int64_t fixation_count = 0;
    double total_fixation_duration_ms = 0.0;
    std::optional<double> mean_fixation_duration_ms;
    std::optional<double> fixations_per_minute;

    friend bool operator==(const ParticipantSummary&, const ParticipantSummary&) = default;
};

struct FeatureReport {
    int participant_count = 0;
    std::int64_t frames = 0;
    std::int64_t complete_minutes = 0;
    RasDenominator ras_denominator = RasDenominator::Union;
    std::vector<FeatureRow> rows;   // viewer-major; tiles in order, then Nothing
    std::vector<ParticipantSummary> participants;

    const FeatureRow& row(ParticipantId viewer, const AoiKey& aoi) const;

    friend bool operator==(const FeatureReport&, const FeatureReport&) = default;
};

/// Throws AnalyticsError("EmptyLog") for a log without frames.
FeatureReport feature_report(const SessionLog& log, const AnalyticsOptions& options);
/// Same, from already attributed fixations.
FeatureReport feature_report(const SessionLog& log, const std::vector<FixationEvent>& fixations,
                             RasDenominator denominator);

enum class ReportFormat { Csv, Json };

ReportFormat report_format_from_string(const std::string& s);

nlohmann::json report_to_json(const FeatureReport& report);
FeatureReport report_from_json(const nlohmann::json& j);

/// CSV: `viewer,aoi,rfd,rafd,rfc,rafc` rows, a blank line, then
/// `participant,ras,collective_visual_participation,rm2mfs,fixation_count,
/// total_fixation_duration_ms,mean_fixation_duration_ms,fixations_per_minute`.
void emit_report(const FeatureReport& report, ReportFormat format, std::ostream& out);
/// Throws AnalyticsError when the path cannot be written.
void emit_report(const FeatureReport& report, ReportFormat format, const std::filesystem::path& path);

} // namespace sealmates
