#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "finrank/contour.hpp"

using namespace finrank;

namespace {

Contour make(const std::vector<std::pair<double, double>>& pts, std::string ind = "a",
             std::string enc = "e1", std::string img = "i1") {
    Contour c;
    c.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c.points(static_cast<Eigen::Index>(i), 0) = pts[i].first;
        c.points(static_cast<Eigen::Index>(i), 1) = pts[i].second;
    }
    c.individual_id = std::move(ind);
    c.encounter_id = std::move(enc);
    c.image_id = std::move(img);
    return c;
}

}  // namespace

TEST_CASE("parse_contours accepts a minimal jsonl record") {
    std::istringstream in(
        R"({"individual":"a","encounter":"e1","image":"i1","points":[[0,0],[1,0],[2,0],[3,1]]})"
        "\n");
    const auto report = parse_contours(in, ContourFormat::Jsonl);
    CHECK(report.accepted == 1);
    CHECK(report.db.individual_count() == 1);
    CHECK(report.db.image_count() == 1);
    CHECK(report.db.images_of("a", "e1").at("i1").points.rows() == 4);
}

TEST_CASE("parse_contours rejects a one-point record and keeps the database unchanged") {
    std::istringstream in(
        R"({"individual":"a","encounter":"e1","image":"i1","points":[[1,2]]})"
        "\n");
    const auto report = parse_contours(in, ContourFormat::Jsonl);
    CHECK(report.accepted == 0);
    CHECK(report.db.empty());
    REQUIRE(report.diagnostics.size() == 1);
    CHECK(report.diagnostics[0].find("fewer than 2") != std::string::npos);
}

TEST_CASE("parse_contours rejects non-finite coordinates") {
    std::istringstream in(
        "individual,encounter,image,point_index,x,y\n"
        "a,e1,i1,0,nan,0\n"
        "a,e1,i1,1,1,0\n");
    const auto report = parse_contours(in, ContourFormat::Csv);
    CHECK(report.accepted == 0);
    REQUIRE(report.diagnostics.size() == 1);
    CHECK(report.diagnostics[0].find("non-finite") != std::string::npos);
}

TEST_CASE("parse_contours groups two images under one encounter") {
    std::istringstream in(
        R"({"individual":"a","encounter":"e1","image":"i1","points":[[0,0],[1,0]]})"
        "\n"
        R"({"individual":"a","encounter":"e1","image":"i2","points":[[0,0],[1,1]]})"
        "\n"
        R"({"individual":"a","encounter":"e2","image":"i1","points":[[0,0],[2,1]]})"
        "\n");
    const auto report = parse_contours(in, ContourFormat::Jsonl);
    CHECK(report.db.individual_count() == 1);
    CHECK(report.db.encounter_count() == 2);
    CHECK(report.db.images_of("a", "e1").size() == 2);
}

TEST_CASE("parse_contours drops consecutive duplicate points") {
    std::istringstream in(
        R"({"individual":"a","encounter":"e1","image":"i1","points":[[0,0],[0,0],[1,0],[1,0],[2,0]]})"
        "\n");
    const auto report = parse_contours(in, ContourFormat::Jsonl);
    CHECK(report.db.images_of("a", "e1").at("i1").points.rows() == 3);
}

TEST_CASE("parse_contours reports duplicate triples") {
    const std::string two =
        R"({"individual":"a","encounter":"e1","image":"i1","points":[[0,0],[1,0]]})"
        "\n"
        R"({"individual":"a","encounter":"e1","image":"i1","points":[[0,0],[2,0]]})"
        "\n";
    {
        std::istringstream in(two);
        CHECK_THROWS_AS(parse_contours(in, ContourFormat::Jsonl), ConflictError);
    }
    {
        std::istringstream in(two);
        const auto report = parse_contours(in, ContourFormat::Jsonl, {.strict = false});
        CHECK(report.accepted == 1);
        CHECK(report.diagnostics.size() == 1);
    }
}

TEST_CASE("parse_contours flags malformed lines with their line number") {
    std::istringstream in("{not json\n");
    try {
        parse_contours(in, ContourFormat::Jsonl);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 1);
    }
}

TEST_CASE("resample_arclength spaces points uniformly on a straight segment") {
    const Contour c = make({{0, 0}, {10, 0}});
    const Contour r = resample_arclength(c, 3);
    REQUIRE(r.points.rows() == 3);
    CHECK(r.points(0, 0) == 0.0);
    CHECK(r.points(1, 0) == doctest::Approx(5.0));
    CHECK(r.points(2, 0) == 10.0);
    CHECK(r.points.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("resample_arclength walks an L-shaped polyline by arc length") {
    const Contour c = make({{0, 0}, {4, 0}, {4, 4}});
    const Contour r = resample_arclength(c, 5);
    const std::vector<std::pair<double, double>> expected{{0, 0}, {2, 0}, {4, 0}, {4, 2}, {4, 4}};
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(r.points(i, 0) == doctest::Approx(expected[static_cast<std::size_t>(i)].first));
        CHECK(r.points(i, 1) == doctest::Approx(expected[static_cast<std::size_t>(i)].second));
    }
}

TEST_CASE("resample_arclength is a fixed point on already-uniform polylines") {
    Contour c = make({});
    c.points.resize(9, 2);
    for (Eigen::Index i = 0; i < 9; ++i) {
        c.points(i, 0) = static_cast<double>(i);
        c.points(i, 1) = 0.0;
    }
    const Contour r = resample_arclength(c, 9);
    CHECK((r.points - c.points).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("resample_arclength rejects degenerate input") {
    const Contour c = make({{1, 1}, {1, 1}});
    CHECK_THROWS_AS(resample_arclength(c, 4), DegenerateContourError);
}

// Resampling shortcuts corners, so a second pass lands within 1e-6 only when
// the trace bends gently relative to the sample spacing; the deviation grows
// as O(total_length * (curvature * spacing)^2) on sharper traces.
TEST_CASE("resample_arclength is idempotent on its own output for gentle traces") {
    std::mt19937_64 rng(7);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 12; ++trial) {
        Contour c = make({});
        c.points.resize(500, 2);
        const double a1 = u() * 0.8, a2 = u() * 0.05, p1 = u() * 6.0, p2 = u() * 6.0;
        for (Eigen::Index i = 0; i < 500; ++i) {
            const double t = static_cast<double>(i) / 499.0;
            c.points(i, 0) = 100.0 * t;
            c.points(i, 1) = a1 * std::sin(2.0 * std::numbers::pi * t + p1) +
                             a2 * std::sin(5.0 * std::numbers::pi * t + p2);
        }
        const Eigen::Index n_out = 192 + static_cast<Eigen::Index>(rng() % 512);
        const Contour once = resample_arclength(c, n_out);
        const Contour twice = resample_arclength(once, n_out);
        CHECK((twice.points - once.points).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("resample_arclength never lengthens the polyline") {
    std::mt19937_64 rng(9);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 20; ++trial) {
        Contour c = make({});
        const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng() % 40);
        c.points.resize(n, 2);
        double x = 0, y = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            x += u() * 3.0 + 0.05;
            y += (u() - 0.5) * 4.0;
            c.points(i, 0) = x;
            c.points(i, 1) = y;
        }
        const Eigen::Index n_out = 8 + static_cast<Eigen::Index>(rng() % 50);
        const Contour once = resample_arclength(c, n_out);
        CHECK(total_arclength(once) <= total_arclength(c) + 1e-9);
    }
}

TEST_CASE("normalized_extent measures the bounding box") {
    const Contour c = make({{0, 0}, {3, 7}});
    CHECK(normalized_extent(c, Axis::Height) == 7.0);
    CHECK(normalized_extent(c, Axis::Width) == 3.0);
}

TEST_CASE("normalized_extent agrees with brute-force pairwise extent on a spiral") {
    Contour c = make({});
    c.points.resize(60, 2);
    double angle = 0.0, radius = 1.0;
    for (Eigen::Index i = 0; i < 60; ++i) {
        c.points(i, 0) = radius * std::cos(angle);
        c.points(i, 1) = radius * std::sin(angle);
        angle += 0.35;
        radius += 0.23;
    }
    double brute = 0.0;
    for (Eigen::Index i = 0; i < 60; ++i)
        for (Eigen::Index j = 0; j < 60; ++j)
            brute = std::max(brute, std::abs(c.points(i, 1) - c.points(j, 1)));
    CHECK(normalized_extent(c, Axis::Height) == doctest::Approx(brute));
}

TEST_CASE("normalized_extent rejects zero extent") {
    const Contour c = make({{0, 5}, {9, 5}});
    CHECK_THROWS_AS(normalized_extent(c, Axis::Height), DegenerateContourError);
    CHECK(normalized_extent(c, Axis::Width) == 9.0);
}

TEST_CASE("contour serialization round-trips through both formats") {
    std::mt19937_64 rng(11);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    EncounterDatabase db;
    for (int ind = 0; ind < 3; ++ind)
        for (int enc = 0; enc < 2; ++enc)
            for (int img = 0; img < 2; ++img) {
                Contour c = make({});
                c.points.resize(6, 2);
                for (Eigen::Index i = 0; i < 6; ++i) {
                    c.points(i, 0) = (u() - 0.5) * 1000.0;
                    c.points(i, 1) = (u() - 0.5) * 1000.0;
                }
                c.individual_id = "ind" + std::to_string(ind);
                c.encounter_id = "enc" + std::to_string(enc);
                c.image_id = "img" + std::to_string(img);
                db.insert(std::move(c));
            }

    for (const ContourFormat fmt : {ContourFormat::Jsonl, ContourFormat::Csv}) {
        std::ostringstream out;
        serialize_contours(db, out, fmt);
        std::istringstream in(out.str());
        const auto report = parse_contours(in, fmt);
        CHECK(report.diagnostics.empty());
        CHECK(report.db == db);
    }
}
