#include "sealmates/log_io.hpp"

#include <fstream>
#include <sstream>

namespace sealmates {

using nlohmann::json;

json header_to_json(const SessionLog& log)
{
    json layouts = json::array();
    for (int v = 0; v < log.config.participant_count(); ++v) {
        layouts.push_back(tiles_to_json(log.config.viewer_layout({v}).tiles));
    }
    return {{"k", "header"},       {"v", 1},
            {"session", log.config.session},
            {"config", to_json(log.config)},
            {"layouts", layouts},  {"start_time", log.start_time},
            {"source", log.source}};
}

json frame_to_json(const FrameRecord& rec)
{
    json parts = json::array();
    for (const auto& p : rec.participants) {
        json pj;
        pj["g"] = p.gaze ? json::array({p.gaze->x, p.gaze->y, p.gaze->valid}) : json(nullptr);
        pj["lv"] = p.level ? json(*p.level) : json(nullptr);
        pj["t"] = p.attribution.target.code();
        pj["ov"] = p.attribution.avatar_overlap;
        pj["aa"] = p.audio_active;
        parts.push_back(std::move(pj));
    }
    json av = nullptr;
    if (rec.avatar) {
        av = {{"x", rec.avatar->position.x},
              {"y", rec.avatar->position.y},
              {"ph", rec.avatar->phase.name()},
              {"rgb", rec.avatar->colors}};
    }
    return {{"k", "frame"}, {"f", rec.frame}, {"b", rec.bucket}, {"mv", rec.moving}, {"p", parts}, {"av", av}};
}

json score_to_json(const ParticipationScore& s)
{
    return {{"k", "score"},
            {"bucket", s.bucket},
            {"p", s.participant.ordinal},
            {"aps", s.aps},
            {"self_vps", s.self_vps_row},
            {"nothing", s.nothing_fraction},
            {"cvps", s.collective_vps},
            {"total", s.total_percent},
            {"active", s.active_frames},
            {"gaze_counts", s.gaze_counts},
            {"overlap", s.avatar_overlap_frames}};
}

FrameRecord frame_from_json(const json& j)
{
    FrameRecord rec;
    rec.frame = j.at("f").get<std::int64_t>();
    rec.bucket = j.at("b").get<std::int64_t>();
    rec.moving = j.at("mv").get<bool>();
    for (const auto& pj : j.at("p")) {
        ParticipantFrame p;
        const auto& g = pj.at("g");
        if (!g.is_null()) {
            p.gaze = NormPoint{g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<bool>()};
        }
        const auto& lv = pj.at("lv");
        if (!lv.is_null()) {
            p.level = lv.get<double>();
        }
        p.attribution.target = AoiKey::from_code(pj.at("t").get<int>());
        p.attribution.avatar_overlap = pj.at("ov").get<bool>();
        p.audio_active = pj.at("aa").get<bool>();
        rec.participants.push_back(p);
    }
    const auto& av = j.at("av");
    if (!av.is_null()) {
        AvatarFrame a;
        a.position = NormPoint::at(av.at("x").get<double>(), av.at("y").get<double>());
        a.phase = AnimationPhase::from_name(av.at("ph").get<std::string>());
        a.colors = av.at("rgb").get<std::vector<Rgb>>();
        rec.avatar = std::move(a);
    }
    return rec;
}

ParticipationScore score_from_json(const json& j)
{
    ParticipationScore s;
    s.bucket = j.at("bucket").get<std::int64_t>();
    s.participant = {j.at("p").get<int>()};
    s.aps = j.at("aps").get<double>();
    s.self_vps_row = j.at("self_vps").get<std::vector<double>>();
    s.nothing_fraction = j.at("nothing").get<double>();
    s.collective_vps = j.at("cvps").get<double>();
    s.total_percent = j.at("total").get<double>();
    s.active_frames = j.at("active").get<std::int64_t>();
    s.gaze_counts = j.at("gaze_counts").get<std::vector<std::int64_t>>();
    s.avatar_overlap_frames = j.at("overlap").get<std::int64_t>();
    return s;
}

void write_log(std::ostream& out, const SessionLog& log)
{
    out << header_to_json(log).dump() << '\n';
    for (const auto& rec : log.frames) {
        out << frame_to_json(rec).dump() << '\n';
    }
    for (const auto& s : log.scores) {
        out << score_to_json(s).dump() << '\n';
    }
}

std::string serialize_log(const SessionLog& log)
{
    std::ostringstream out;
    write_log(out, log);
    return out.str();
}

void save_log(const std::filesystem::path& path, const SessionLog& log)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw LogError("cannot write " + path.string());
    }
    write_log(out, log);
    out.flush();
    if (!out) {
        throw LogError("write failed for " + path.string());
    }
}

SessionLog read_log(std::istream& in)
{
    SessionLog log;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            const auto kind = j.at("k").get<std::string>();
            if (!have_header) {
                if (kind != "header") {
                    throw LogError("first line is not a header");
                }
                if (j.at("v").get<int>() != 1) {
                    throw LogError("unsupported log version");
                }
                log.config = config_from_json(j.at("config"));
                log.start_time = j.at("start_time").get<std::string>();
                log.source = j.at("source").get<std::string>();
                have_header = true;
            } else if (kind == "frame") {
                log.frames.push_back(frame_from_json(j));
            } else if (kind == "score") {
                log.scores.push_back(score_from_json(j));
            } else {
                throw LogError("unknown record kind '" + kind + "'");
            }
        } catch (const LogError& e) {
            throw LogError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::exception& e) {
            throw LogError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) {
        throw LogError("empty log");
    }
    return log;
}

SessionLog parse_log(const std::string& text)
{
    std::istringstream in(text);
    return read_log(in);
}

SessionLog load_log(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw LogError("cannot open " + path.string());
    }
    return read_log(in);
}

std::string log_file_name(const std::string& session)
{
    return session + ".slog.jsonl";
}

} // namespace sealmates
