#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cofi/ingest/track_io.hpp"

using namespace cofi;
using namespace cofi::ingest;

namespace {

AisReadResult read(const std::string& text) {
    std::istringstream in(text);
    return read_ais_csv(in);
}

const char* kHeader = "MMSI,BaseDateTime,LAT,LON,SOG,COG,Heading,VesselName,VesselType,Draft\n";

}  // namespace

TEST(AisCsv, ReadsWellFormedRows) {
    const auto r = read(std::string(kHeader) +
                        "367000001,2023-01-01T00:00:00,40.70,-74.00,8.1,90.0,90,\"ACME, INC\",70,12.0\n"
                        "367000001,2023-01-01T00:01:00,40.70,-73.99,8.0,90.0,90,\"ACME, INC\",70,12.0\n"
                        "367000002,2023-01-01T00:00:30,40.71,-74.01,,,511,TUG,31,\n");
    ASSERT_EQ(r.records.size(), 3u);
    EXPECT_EQ(r.rows_in, 3u);
    EXPECT_EQ(r.dropped(), 0u);
    EXPECT_EQ(r.records[0].vessel_id, "367000001");
    EXPECT_DOUBLE_EQ(r.records[0].t, 1672531200.0);
    EXPECT_EQ(*r.records[0].vessel_type, 70);
    EXPECT_TRUE(std::isnan(r.records[2].sog));
    EXPECT_FALSE(r.records[2].draft.has_value());
}

TEST(AisCsv, InvalidRowsAreDroppedAndCounted) {
    const auto r = read(std::string(kHeader) +
                        "1,2023-01-01T00:00:00,91.0,-74.00,1,0,0,x,70,1\n"
                        "1,2023-01-01T00:00:00,40.0,-181.0,1,0,0,x,70,1\n"
                        "1,not-a-time,40.0,-74.0,1,0,0,x,70,1\n"
                        "1,2023-02-30T00:00:00,40.0,-74.0,1,0,0,x,70,1\n"
                        "1,2023-01-01T00:00:00,40.0,-74.0,1,0,0,x,70,1\n");
    EXPECT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.dropped_invalid, 4u);
    EXPECT_EQ(r.rows_in, r.records.size() + r.dropped());
}

TEST(AisCsv, DuplicateTimestampLaterRowWins) {
    const auto r = read(std::string(kHeader) +
                        "1,2023-01-01T00:00:00,40.0,-74.0,1,0,0,x,70,1\n"
                        "1,2023-01-01T00:00:00,40.5,-74.0,2,0,0,x,70,1\n");
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.dropped_duplicate, 1u);
    EXPECT_DOUBLE_EQ(r.records[0].lat, 40.5);
    EXPECT_EQ(r.rows_in, r.records.size() + r.dropped());
}

TEST(AisCsv, ColumnMapAndMissingColumns) {
    ColumnMap cols;
    cols.vessel_id = "id";
    cols.timestamp = "time";
    cols.lat = "latitude";
    cols.lon = "longitude";
    std::istringstream in("id,time,latitude,longitude\nA,100,10,20\nA,160,10.001,20\n");
    const auto r = read_ais_csv(in, cols);
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_EQ(r.records[1].t, 160.0);
    EXPECT_THROW(read("MMSI,LAT,LON\n1,2,3\n"), FormatError);
    EXPECT_THROW(read(""), FormatError);
}

namespace {

std::vector<AisRecord> records_at(const std::vector<double>& times) {
    std::vector<AisRecord> out;
    for (double t : times) out.push_back({"v", t, 40.0, -74.0 + t * 1e-6, 5.0, 0.0, 70, 10.0});
    return out;
}

}  // namespace

TEST(Segment, SplitsOnGaps) {
    const GeoOrigin o{40.0, -74.0};
    EXPECT_EQ(segment_tracks(records_at({0, 10, 20, 1020, 1030}), o).size(), 2u);
    EXPECT_EQ(segment_tracks(records_at({0}), o).size(), 0u);
    EXPECT_EQ(segment_tracks(records_at({0, 100, 200, 300}), o).size(), 1u);
    // The isolated middle report is discarded.
    EXPECT_EQ(segment_tracks(records_at({0, 10, 1000, 2000, 2010}), o).size(), 2u);
}

TEST(Segment, SortsAndGroupsByVessel) {
    auto recs = records_at({30, 0, 10});
    recs.push_back({"w", 5, 40.0, -74.0, 1.0, 0.0, std::nullopt, std::nullopt});
    recs.push_back({"w", 6, 40.0, -74.0, 1.0, 0.0, 52, std::nullopt});
    const auto tracks = segment_tracks(recs, {40.0, -74.0});
    ASSERT_EQ(tracks.size(), 2u);
    EXPECT_EQ(tracks[0].samples[0].t, 0.0);
    EXPECT_EQ(tracks[0].samples[2].t, 30.0);
    EXPECT_EQ(*tracks[1].meta.vessel_type, 52);
}

namespace {

Track raw_track(const std::vector<double>& t, const std::vector<Vec2>& p) {
    Track tr;
    tr.vessel_id = "v";
    for (std::size_t i = 0; i < t.size(); ++i) tr.samples.push_back({t[i], p[i], Vec2::Zero(), 1.0});
    return tr;
}

}  // namespace

TEST(Resample, UniformTrackUnchanged) {
    const auto tr = raw_track({0, 60, 120, 180}, {{0, 0}, {1.5, 7}, {-3, 2}, {10, 10}});
    const auto r = resample_track(tr, 60.0);
    ASSERT_TRUE(r.has_value());
    ASSERT_EQ(r->samples.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r->samples[i].p, tr.samples[i].p);
    EXPECT_EQ(r->dt, 60.0);
}

TEST(Resample, StraightLineHasConstantVelocity) {
    const auto tr = raw_track({0, 37, 200, 241}, {{0, 0}, {37 * 2.0, 37 * -1.0}, {400, -200}, {482, -241}});
    const auto r = resample_track(tr, 20.0);
    ASSERT_TRUE(r.has_value());
    for (const auto& s : r->samples) {
        EXPECT_NEAR(s.p.x(), 2.0 * s.t, 1e-9);
        EXPECT_NEAR(s.p.y(), -1.0 * s.t, 1e-9);
        EXPECT_NEAR(s.v.x(), 2.0, 1e-9);
        EXPECT_NEAR(s.v.y(), -1.0, 1e-9);
    }
}

TEST(Resample, MatchesIndependentInterpolation) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> gap(1, 90), pos(-1000, 1000);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> t{0};
        std::vector<Vec2> p{{pos(rng), pos(rng)}};
        for (int i = 0; i < 30; ++i) t.push_back(t.back() + gap(rng)), p.push_back({pos(rng), pos(rng)});
        const auto r = resample_track(raw_track(t, p), 15.0);
        ASSERT_TRUE(r.has_value());
        for (const auto& s : r->samples) {
            // Oracle: linear scan for the bracketing pair.
            std::size_t i = 0;
            while (i + 1 < t.size() && t[i + 1] < s.t) ++i;
            const std::size_t k = std::min(i + 1, t.size() - 1);
            const double w = k == i ? 0.0 : (s.t - t[i]) / (t[k] - t[i]);
            const Vec2 expected = (1 - w) * p[i] + w * p[k];
            EXPECT_NEAR((s.p - expected).norm(), 0.0, 1e-9);
        }
        EXPECT_EQ(r->samples.front().p, p.front());
    }
}

TEST(Resample, EndpointOnGridIsExact) {
    const auto tr = raw_track({0, 33, 90}, {{0.1, 0.2}, {5, 5}, {1.0 / 3.0, 2.0 / 7.0}});
    const auto r = resample_track(tr, 30.0);
    EXPECT_EQ(r->samples.back().t, 90.0);
    EXPECT_EQ(r->samples.back().p, tr.samples.back().p);
}

TEST(Resample, TooShortTrack) {
    EXPECT_FALSE(resample_track(raw_track({0, 10}, {{0, 0}, {1, 1}}), 60.0).has_value());
}

TEST(Projection, OriginAndNorthStep) {
    const GeoOrigin o{40.7, -74.0};
    EXPECT_EQ(project(o.lat, o.lon, o), Vec2(0, 0));
    const Vec2 p = project(o.lat + 0.01, o.lon, o);
    EXPECT_NEAR(p.x(), 0.0, 1e-9);
    EXPECT_NEAR(p.y(), 6371000.0 * 0.01 * M_PI / 180.0, 1e-6);
    EXPECT_NEAR(p.y(), 1111.9, 0.5);
}

TEST(Projection, RoundTrip) {
    const GeoOrigin o{40.7, -74.0};
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int i = 0; i < 1000; ++i) {
        const double lat = o.lat + u(rng), lon = o.lon + u(rng);
        const auto back = unproject(project(lat, lon, o), o);
        EXPECT_NEAR(back.lat, lat, 1e-9);
        EXPECT_NEAR(back.lon, lon, 1e-9);
    }
}

TEST(Projection, DistortionWithinBox) {
    // Distances from the box center to points of a 20 x 20 km box.
    const GeoOrigin o{40.7, -74.0};
    const double half_lat = 10000.0 / 6371000.0 * 180.0 / M_PI;
    const double half_lon = half_lat / std::cos(o.lat * M_PI / 180.0);
    for (int i = -10; i <= 10; ++i)
        for (int j = -10; j <= 10; ++j) {
            if (i == 0 && j == 0) continue;
            const double lat = o.lat + half_lat * i / 10.0, lon = o.lon + half_lon * j / 10.0;
            const double gc = great_circle_m(o.lat, o.lon, lat, lon);
            EXPECT_LT(std::abs(project(lat, lon, o).norm() - gc) / gc, 1e-3);
        }
}

TEST(Timestamp, Formats) {
    EXPECT_DOUBLE_EQ(*parse_timestamp("1970-01-01T00:00:00"), 0.0);
    EXPECT_DOUBLE_EQ(*parse_timestamp("2000-03-01 12:30:15.5"), 951913815.5);
    EXPECT_DOUBLE_EQ(*parse_timestamp("12.25"), 12.25);
    EXPECT_FALSE(parse_timestamp("2023-13-01T00:00:00").has_value());
    EXPECT_FALSE(parse_timestamp("").has_value());
}

TEST(TrackIo, JsonRoundTrip) {
    TrackSet set{GeoOrigin{40.7, -74.0}, {}};
    auto tr = *resample_track(raw_track({0, 60, 130}, {{0, 0}, {60, 6}, {130, 13}}), 60.0);
    tr.meta.vessel_type = 70;
    set.tracks.push_back(tr);
    const auto back = tracks_from_json(json::parse(tracks_to_json(set).dump()));
    ASSERT_EQ(back.tracks.size(), 1u);
    EXPECT_EQ(*back.tracks[0].meta.vessel_type, 70);
    EXPECT_FALSE(back.tracks[0].meta.draft.has_value());
    EXPECT_EQ(back.tracks[0].positions(), tr.positions());
    EXPECT_EQ(back.tracks[0].samples[1].v, tr.samples[1].v);
    EXPECT_EQ(*back.origin, *set.origin);
    EXPECT_THROW(tracks_from_json(json::parse(R"({"format": "other"})")), FormatError);
}
