#include "../support/builders.hpp"
#include "../support/oracles.hpp"

#include "sealmates/analytics.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace sealmates;

namespace {

constexpr std::int64_t B = 3600;

/// Puts a static avatar into every frame; `where(frame)` picks the tile.
void place_avatar(SessionLog& log, const std::function<int(std::int64_t)>& where)
{
    for (auto& fr : log.frames) {
        AvatarFrame av;
        av.position = build::centre_of(log.config, where(fr.frame));
        av.phase = {PhaseKind::Idle, 1};
        av.colors.assign(3, Rgb{0, 0, 255});
        fr.avatar = av;
    }
}

AoiKey tile(int p)
{
    return AoiKey::participant({p});
}

} // namespace

TEST_CASE("fixation attribution: AoI by centroid, avatar by majority of frames")
{
    auto cfg = build::config(2);
    const auto c = build::centre_of(cfg, 2);
    auto log = build::run(cfg, 2 * B, [&](std::int64_t f, FrameInput& in) {
        if ((f >= 1000 && f < 1030) || (f >= 5000 && f < 5030)) {
            in.gaze[0] = c;
        }
    });
    place_avatar(log, [](std::int64_t f) { return f < B ? 2 : 0; });
    const auto fx = log_fixations(log, FixationParams{});
    REQUIRE(fx.size() == 2);
    CHECK(fx[0].start_frame == 1000);
    CHECK(fx[0].aoi == tile(2));
    CHECK(fx[0].avatar_present);
    CHECK(fx[1].start_frame == 5000);
    CHECK(fx[1].aoi == tile(2));
    CHECK_FALSE(fx[1].avatar_present);

    // the avatar leaves halfway through: 15 of 30 frames is still present
    auto half = log;
    place_avatar(half, [](std::int64_t f) { return f < 1015 ? 2 : 0; });
    CHECK(log_fixations(half, FixationParams{})[0].avatar_present);
    place_avatar(half, [](std::int64_t f) { return f < 1014 ? 2 : 0; });
    CHECK_FALSE(log_fixations(half, FixationParams{})[0].avatar_present);

    // off every tile
    auto gap = build::run(cfg, B, [](std::int64_t f, FrameInput& in) {
        if (f < 30) {
            in.gaze[1] = NormPoint::at(0.5, 0.999);
        }
    });
    const auto gfx = log_fixations(gap, FixationParams{});
    REQUIRE(gfx.size() == 1);
    CHECK(gfx[0].aoi.is_nothing());
    CHECK_FALSE(gfx[0].avatar_present);
}

TEST_CASE("RAS examples")
{
    SUBCASE("only A speaks")
    {
        const auto log = build::run(build::config(2), 2 * B, [](std::int64_t f, FrameInput& in) {
            if (f % 3 == 0) {
                in.level[0] = 0.9;
            }
        });
        CHECK(ras(log, {0}) == 1.0);
        CHECK(ras(log, {1}) == 0.0);
        CHECK(ras(log, {2}) == 0.0);
    }
    SUBCASE("disjoint turns of 720 and 1080 frames per bucket")
    {
        const auto log = build::run(build::config(15), 15 * B, [](std::int64_t f, FrameInput& in) {
            const auto k = f % B;
            if (k < 720) {
                in.level[0] = 0.5;
            } else if (k < 1800) {
                in.level[1] = 0.5;
            }
        });
        CHECK(*ras(log, {0}) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(*ras(log, {1}) == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(ras(log, {2}) == 0.0);
        CHECK(*ras(log, {0}, RasDenominator::Total) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(*ras(log, {1}, RasDenominator::Total) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("silence is absent, not zero")
    {
        const auto log = build::run(build::config(1), B, [](std::int64_t, FrameInput&) {});
        CHECK_FALSE(ras(log, {0}).has_value());
        CHECK(ras(log, {0}, RasDenominator::Total) == 0.0);
    }
    SUBCASE("a partial bucket does not count")
    {
        const auto log = build::run(build::config(0), B + 100, [](std::int64_t f, FrameInput& in) {
            in.level[f < B ? 0 : 1] = 0.9;
        });
        CHECK(ras(log, {0}) == 1.0);
        CHECK(ras(log, {1}) == 0.0);
    }
}

TEST_CASE("collective visual participation (Eq. 2)")
{
    SUBCASE("symmetric gaze")
    {
        const auto cfg = build::config(3);
        const auto log = build::run(cfg, 3 * B, [&](std::int64_t, FrameInput& in) {
            for (int v = 0; v < 3; ++v) {
                in.gaze[static_cast<std::size_t>(v)] = build::centre_of(cfg, (v + 1) % 3);
            }
        });
        for (int p = 0; p < 3; ++p) {
            CHECK(*collective_visual_participation(log, {p}) == doctest::Approx(1.0 / 3).epsilon(1e-12));
        }
    }
    SUBCASE("everyone on A")
    {
        const auto cfg = build::config(1);
        const auto log = build::run(cfg, B, [&](std::int64_t, FrameInput& in) {
            for (auto& g : in.gaze) {
                g = build::centre_of(cfg, 0);
            }
        });
        CHECK(collective_visual_participation(log, {0}) == 1.0);
        CHECK(collective_visual_participation(log, {1}) == 0.0);
    }
    SUBCASE("three constructed buckets")
    {
        // bucket 0: all on A; bucket 1: 0 and 1 on B, 2 on A;
        // bucket 2: 0 on C, 1 off screen, 2 on B. Tile frames A 4B, B 3B, C 1B.
        const auto cfg = build::config(3);
        const auto log = build::run(cfg, 3 * B, [&](std::int64_t f, FrameInput& in) {
            const std::array<std::array<int, 3>, 3> plan{{{0, 0, 0}, {1, 1, 0}, {2, -1, 1}}};
            for (std::size_t v = 0; v < 3; ++v) {
                const int t = plan[static_cast<std::size_t>(f / B)][v];
                in.gaze[v] = t < 0 ? NormPoint::at(0.5, 0.999) : build::centre_of(cfg, t);
            }
        });
        CHECK(collective_visual_participation(log, {0}) == 0.5);
        CHECK(collective_visual_participation(log, {1}) == 0.375);
        CHECK(collective_visual_participation(log, {2}) == 0.125);
    }
    SUBCASE("nobody looks at a tile")
    {
        const auto log = build::run(build::config(1), B, [](std::int64_t, FrameInput&) {});
        CHECK_FALSE(collective_visual_participation(log, {0}).has_value());
    }
}

TEST_CASE("fixation feature rows")
{
    const auto cfg = build::config(15);
    const auto a = build::centre_of(cfg, 0);
    const auto b = build::centre_of(cfg, 1);

    SUBCASE("RFD: half the meeting on one tile")
    {
        auto log = build::run(cfg, 15 * B, [&](std::int64_t f, FrameInput& in) {
            if (f < 27000) {
                in.gaze[0] = a;
            }
        });
        const auto rep = feature_report(log, AnalyticsOptions{});
        const auto& r = rep.row({0}, tile(0));
        CHECK(r.fixation_count == 1);
        CHECK(*r.rfd == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.rfc == 1.0);
        // no avatar at all
        CHECK(r.rafd == 0.0);
        CHECK(r.rafc == 0.0);
        CHECK(rep.row({0}, tile(1)).rfd == 0.0);
        CHECK_FALSE(rep.row({0}, tile(1)).rafd.has_value());
        CHECK_FALSE(rep.row({1}, tile(0)).rfc.has_value());
        CHECK(rep.participants[0].fixation_count == 1);
        CHECK(rep.participants[0].total_fixation_duration_ms == doctest::Approx(450000.0));
        CHECK(*rep.participants[0].fixations_per_minute == doctest::Approx(1.0 / 15));
        CHECK_FALSE(rep.participants[1].mean_fixation_duration_ms.has_value());
    }

    SUBCASE("RM2MFS: short fixations on the avatar's tile every minute")
    {
        auto log = build::run(cfg, 15 * B, [&](std::int64_t f, FrameInput& in) {
            // a one-frame break every 600 frames splits the fixations
            if (f % 600 != 0) {
                in.gaze[0] = b;
                in.gaze[1] = a;
            }
        });
        place_avatar(log, [](std::int64_t) { return 1; });
        const auto rep = feature_report(log, AnalyticsOptions{});
        CHECK(rep.complete_minutes == 15);
        CHECK(rep.row({0}, tile(1)).fixation_count == 90);
        CHECK(rep.row({0}, tile(1)).rafc == 1.0);
        CHECK(rep.row({0}, tile(1)).rm2mfs == 1.0);
        CHECK(rep.row({0}, tile(0)).rm2mfs == 0.0);
        // viewer 1 never fixates the avatar: every minute is a tie at zero
        CHECK(rep.row({1}, tile(0)).rafc == 0.0);
        for (int c = 0; c < 3; ++c) {
            CHECK(rep.row({1}, tile(c)).rm2mfs == 0.0);
        }
        CHECK(rep.row({1}, AoiKey::nothing()).rm2mfs == 0.0);
        CHECK(rep.participants[1].rm2mfs == 1.0);
        CHECK(rep.participants[0].rm2mfs == 0.0);
    }
}

TEST_CASE("property: ratio sums on simulated sessions")
{
    SessionConfig cfg;
    cfg.buckets = 3;
    cfg.finalize();
    auto log = build::run(cfg, 3 * B + 500, [&](std::int64_t f, FrameInput& in) {
        for (std::size_t v = 0; v < 3; ++v) {
            const int t = static_cast<int>((f / 97 + v * 5) % 4);
            if (t < 3) {
                in.gaze[v] = build::centre_of(cfg, t);
            }
            in.level[v] = (f / 31 + v) % 5 == 0 ? 0.5 : 0.0;
        }
    });
    place_avatar(log, [](std::int64_t f) { return static_cast<int>((f / 400) % 3); });
    const auto rep = feature_report(log, AnalyticsOptions{});
    double eq2 = 0.0;
    for (const auto& p : rep.participants) {
        eq2 += p.collective_visual_participation.value_or(0.0);
    }
    CHECK(eq2 == doctest::Approx(1.0).epsilon(1e-12));
    for (int v = 0; v < 3; ++v) {
        double rfc = 0.0;
        for (const auto& r : rep.rows) {
            if (r.viewer.ordinal == v) {
                rfc += r.rfc.value_or(0.0);
                CHECK(r.rafc.value_or(0.0) <= r.rfc.value_or(0.0));
                CHECK(r.avatar_fixation_duration_ms <= r.fixation_duration_ms);
            }
        }
        CHECK(rfc == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("report output")
{
    const auto cfg = build::config(1);
    const auto log = build::run(cfg, B, [&](std::int64_t f, FrameInput& in) {
        if (f < 100) {
            in.gaze[2] = build::centre_of(cfg, 0);
        }
        in.level[1] = 0.2;
    });
    const auto rep = feature_report(log, AnalyticsOptions{});
    REQUIRE(rep.rows.size() == 12);

    std::ostringstream csv;
    emit_report(rep, ReportFormat::Csv, csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "viewer,aoi,rfd,rafd,rfc,rafc");
    std::getline(lines, line);
    CHECK(line == "0,p0,0.0,,,");
    for (int k = 0; k < 12; ++k) {
        std::getline(lines, line);
    }
    CHECK(line.empty());
    std::getline(lines, line);
    CHECK(line ==
          "participant,ras,collective_visual_participation,rm2mfs,fixation_count,"
          "total_fixation_duration_ms,mean_fixation_duration_ms,fixations_per_minute");
    std::getline(lines, line);
    CHECK(line == "0,0.0,1.0,0.0,0,0.0,,0.0");

    std::ostringstream js;
    emit_report(rep, ReportFormat::Json, js);
    CHECK(report_from_json(nlohmann::json::parse(js.str())) == rep);

    CHECK(report_format_from_string("csv") == ReportFormat::Csv);
    CHECK_THROWS(report_format_from_string("xml"));
    CHECK(ras_denominator_from_string("total") == RasDenominator::Total);
    CHECK_THROWS(ras_denominator_from_string("all"));
}

TEST_CASE("errors")
{
    SessionLog empty;
    empty.config = build::config(1);
    CHECK_THROWS_WITH_AS(feature_report(empty, AnalyticsOptions{}), "EmptyLog", AnalyticsError);

    const auto log = build::run(build::config(1), 10, [](std::int64_t, FrameInput&) {});
    const auto rep = feature_report(log, AnalyticsOptions{});
    CHECK(rep.complete_minutes == 0);
    CHECK_FALSE(rep.participants[0].rm2mfs.has_value());
    const auto dir = oracle::temp_dir("analytics");
    CHECK_THROWS_AS(emit_report(rep, ReportFormat::Csv, dir / "no" / "such" / "dir.csv"), AnalyticsError);
    emit_report(rep, ReportFormat::Csv, dir / "ok.csv");
    CHECK(std::filesystem::file_size(dir / "ok.csv") > 0);
    std::filesystem::remove_all(dir);
}
