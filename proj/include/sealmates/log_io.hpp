// Session log as JSON Lines:
//
//   {"k":"header", "v":1, "session", "config", "layouts", "start_time", "source"}
//   {"k":"frame",  "f", "b", "mv", "p":[{"g":[x,y,valid]|null, "lv":level|null,
//                   "t":target, "ov":overlap, "aa":active}, ...],
//                   "av":{"x","y","ph","rgb":[[r,g,b], ...]}|null}     one per frame
//   {"k":"score",  "bucket", "p", "aps", "self_vps", "nothing", "cvps", "total",
//                   "active", "gaze_counts", "overlap"}                 N per complete bucket
//
// "t" is the AoI code: participant ordinal, or -1 for Nothing. Doubles are
// written in shortest round-trip form, so a parsed log re-serializes to the
// same bytes.

#pragma once

#include "sealmates/session.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace sealmates {

class LogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json header_to_json(const SessionLog& log);
nlohmann::json frame_to_json(const FrameRecord& rec);
nlohmann::json score_to_json(const ParticipationScore& s);

FrameRecord frame_from_json(const nlohmann::json& j);
ParticipationScore score_from_json(const nlohmann::json& j);

void write_log(std::ostream& out, const SessionLog& log);
std::string serialize_log(const SessionLog& log);
void save_log(const std::filesystem::path& path, const SessionLog& log);

/// Throws LogError on malformed input or an empty stream.
SessionLog read_log(std::istream& in);
SessionLog parse_log(const std::string& text);
SessionLog load_log(const std::filesystem::path& path);

/// `<session>.slog.jsonl`
std::string log_file_name(const std::string& session);

} // namespace sealmates
