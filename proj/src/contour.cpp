#include "finrank/contour.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace finrank {

namespace {

using nlohmann::json;

std::string triple_string(const std::string& ind, const std::string& enc, const std::string& img) {
    return "(" + ind + ", " + enc + ", " + img + ")";
}

// Drops consecutive duplicates; returns false if the cleaned record is invalid.
bool clean_points(std::vector<std::array<double, 2>>& pts, std::string& why) {
    for (const auto& p : pts) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
            why = "non-finite coordinate";
            return false;
        }
    }
    std::vector<std::array<double, 2>> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        if (out.empty() || out.back()[0] != p[0] || out.back()[1] != p[1]) out.push_back(p);
    }
    if (out.size() < 2) {
        why = "fewer than 2 distinct points";
        return false;
    }
    pts = std::move(out);
    return true;
}

Contour make_contour(std::vector<std::array<double, 2>>&& pts, std::string ind, std::string enc,
                     std::string img) {
    Contour c;
    c.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
    for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
        c.points(i, 0) = pts[static_cast<std::size_t>(i)][0];
        c.points(i, 1) = pts[static_cast<std::size_t>(i)][1];
    }
    c.individual_id = std::move(ind);
    c.encounter_id = std::move(enc);
    c.image_id = std::move(img);
    return c;
}

struct PendingRecord {
    std::string individual, encounter, image;
    std::vector<std::array<double, 2>> points;
    std::size_t line = 0;
};

void accept_record(PendingRecord&& rec, ParseReport& report, const ParseOptions& opts) {
    std::string why;
    if (!clean_points(rec.points, why)) {
        report.diagnostics.push_back("line " + std::to_string(rec.line) + ": rejected " +
                                     triple_string(rec.individual, rec.encounter, rec.image) +
                                     ": " + why);
        return;
    }
    try {
        report.db.insert(make_contour(std::move(rec.points), std::move(rec.individual),
                                      std::move(rec.encounter), std::move(rec.image)));
        ++report.accepted;
    } catch (const ConflictError& e) {
        if (opts.strict) throw;
        report.diagnostics.push_back("line " + std::to_string(rec.line) + ": " + e.what());
    }
}

ParseReport parse_jsonl(std::istream& in, const ParseOptions& opts) {
    ParseReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        PendingRecord rec;
        rec.line = lineno;
        try {
            json j = json::parse(line);
            rec.individual = j.at("individual").get<std::string>();
            rec.encounter = j.at("encounter").get<std::string>();
            rec.image = j.at("image").get<std::string>();
            for (const auto& p : j.at("points")) {
                if (!p.is_array() || p.size() != 2)
                    throw ParseError(lineno, "point is not a [x, y] pair");
                rec.points.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        } catch (const ParseError&) {
            if (opts.strict) throw;
            report.diagnostics.push_back("line " + std::to_string(lineno) + ": malformed record");
            continue;
        } catch (const json::exception& e) {
            if (opts.strict) throw ParseError(lineno, e.what());
            report.diagnostics.push_back("line " + std::to_string(lineno) + ": " + e.what());
            continue;
        }
        accept_record(std::move(rec), report, opts);
    }
    return report;
}

constexpr const char* kCsvHeader = "individual,encounter,image,point_index,x,y";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

ParseReport parse_csv(std::istream& in, const ParseOptions& opts) {
    ParseReport report;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) return report;
    ++lineno;
    if (split_csv(line) != split_csv(kCsvHeader)) {
        if (opts.strict) throw ParseError(lineno, "expected header '" + std::string(kCsvHeader) + "'");
        report.diagnostics.push_back("line 1: missing csv header");
        return report;
    }

    PendingRecord rec;
    bool open = false;
    auto flush = [&] {
        if (open) accept_record(std::move(rec), report, opts);
        rec = PendingRecord{};
        open = false;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv(line);
        if (fields.size() != 6) {
            if (opts.strict) throw ParseError(lineno, "expected 6 fields, got " + std::to_string(fields.size()));
            flush();
            report.diagnostics.push_back("line " + std::to_string(lineno) + ": bad field count");
            continue;
        }
        std::size_t idx = 0;
        double x = 0, y = 0;
        try {
            idx = static_cast<std::size_t>(std::stoull(fields[3]));
            x = std::stod(fields[4]);
            y = std::stod(fields[5]);
        } catch (const std::exception&) {
            if (opts.strict) throw ParseError(lineno, "unparsable numeric field");
            flush();
            report.diagnostics.push_back("line " + std::to_string(lineno) + ": unparsable numeric field");
            continue;
        }
        bool same_group = open && fields[0] == rec.individual && fields[1] == rec.encounter &&
                          fields[2] == rec.image;
        if (!same_group) {
            flush();
            rec.individual = fields[0];
            rec.encounter = fields[1];
            rec.image = fields[2];
            rec.line = lineno;
            open = true;
        }
        if (idx != rec.points.size()) {
            if (opts.strict)
                throw ParseError(lineno, "point_index " + std::to_string(idx) + " out of order");
            report.diagnostics.push_back("line " + std::to_string(lineno) + ": point_index out of order");
            rec.points.clear();
            open = false;
            continue;
        }
        rec.points.push_back({x, y});
    }
    flush();
    return report;
}

// Shortest representation that round-trips through strtod.
std::string number_repr(double v) { return json(v).dump(); }

}  // namespace

bool operator==(const Contour& a, const Contour& b) {
    return a.individual_id == b.individual_id && a.encounter_id == b.encounter_id &&
           a.image_id == b.image_id && a.points.rows() == b.points.rows() && a.points == b.points;
}

void EncounterDatabase::insert(Contour c) {
    auto& enc_map = individuals_[c.individual_id];
    auto& img_map = enc_map[c.encounter_id];
    auto key = c.image_id;
    if (img_map.count(key))
        throw ConflictError("duplicate triple " +
                            triple_string(c.individual_id, c.encounter_id, c.image_id));
    img_map.emplace(std::move(key), std::move(c));
}

std::size_t EncounterDatabase::encounter_count() const {
    std::size_t n = 0;
    for (const auto& [ind, encs] : individuals_) n += encs.size();
    return n;
}

std::size_t EncounterDatabase::image_count() const {
    std::size_t n = 0;
    for (const auto& [ind, encs] : individuals_)
        for (const auto& [enc, imgs] : encs) n += imgs.size();
    return n;
}

const EncounterDatabase::EncounterMap& EncounterDatabase::encounters_of(
    const std::string& individual) const {
    auto it = individuals_.find(individual);
    if (it == individuals_.end()) throw EmptyInputError("unknown individual '" + individual + "'");
    return it->second;
}

const EncounterDatabase::ImageMap& EncounterDatabase::images_of(const std::string& individual,
                                                                const std::string& encounter) const {
    const auto& encs = encounters_of(individual);
    auto it = encs.find(encounter);
    if (it == encs.end())
        throw EmptyInputError("unknown encounter '" + encounter + "' for '" + individual + "'");
    return it->second;
}

std::vector<const Contour*> EncounterDatabase::all_contours() const {
    std::vector<const Contour*> out;
    for (const auto& [ind, encs] : individuals_)
        for (const auto& [enc, imgs] : encs)
            for (const auto& [img, c] : imgs) out.push_back(&c);
    return out;
}

bool operator==(const EncounterDatabase& a, const EncounterDatabase& b) {
    return a.individuals_ == b.individuals_;
}

ParseReport parse_contours(std::istream& in, ContourFormat format, const ParseOptions& opts) {
    return format == ContourFormat::Jsonl ? parse_jsonl(in, opts) : parse_csv(in, opts);
}

void serialize_contours(const EncounterDatabase& db, std::ostream& out, ContourFormat format) {
    if (format == ContourFormat::Csv) out << kCsvHeader << "\n";
    for (const Contour* c : db.all_contours()) {
        if (format == ContourFormat::Jsonl) {
            json pts = json::array();
            for (Eigen::Index i = 0; i < c->points.rows(); ++i)
                pts.push_back({c->points(i, 0), c->points(i, 1)});
            json j{{"individual", c->individual_id},
                   {"encounter", c->encounter_id},
                   {"image", c->image_id},
                   {"points", std::move(pts)}};
            out << j.dump() << "\n";
        } else {
            for (Eigen::Index i = 0; i < c->points.rows(); ++i) {
                out << c->individual_id << ',' << c->encounter_id << ',' << c->image_id << ',' << i
                    << ',' << number_repr(c->points(i, 0)) << ',' << number_repr(c->points(i, 1))
                    << "\n";
            }
        }
    }
}

double total_arclength(const Contour& c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < c.points.rows(); ++i)
        total += (c.points.row(i + 1) - c.points.row(i)).norm();
    return total;
}

Contour resample_arclength(const Contour& c, Eigen::Index n) {
    if (n < 2) throw DomainError("resample count must be at least 2");
    if (c.points.rows() < 2) throw DegenerateContourError("contour has fewer than 2 points");

    const Eigen::Index m = c.points.rows();
    std::vector<double> cum(static_cast<std::size_t>(m), 0.0);
    for (Eigen::Index i = 1; i < m; ++i)
        cum[static_cast<std::size_t>(i)] =
            cum[static_cast<std::size_t>(i - 1)] + (c.points.row(i) - c.points.row(i - 1)).norm();
    const double total = cum.back();
    if (total <= 0.0) throw DegenerateContourError("contour has zero arc length");

    Contour out;
    out.individual_id = c.individual_id;
    out.encounter_id = c.encounter_id;
    out.image_id = c.image_id;
    out.points.resize(n, 2);
    out.points.row(0) = c.points.row(0);
    out.points.row(n - 1) = c.points.row(m - 1);

    Eigen::Index seg = 0;
    for (Eigen::Index k = 1; k + 1 < n; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
        while (seg + 2 < m && cum[static_cast<std::size_t>(seg + 1)] < target) ++seg;
        const double s0 = cum[static_cast<std::size_t>(seg)];
        const double s1 = cum[static_cast<std::size_t>(seg + 1)];
        const double t = s1 > s0 ? (target - s0) / (s1 - s0) : 0.0;
        out.points.row(k) = c.points.row(seg) + t * (c.points.row(seg + 1) - c.points.row(seg));
    }
    return out;
}

double normalized_extent(const Contour& c, Axis axis) {
    if (c.points.rows() < 2) throw DegenerateContourError("contour has fewer than 2 points");
    const int col = (axis == Axis::Height) ? 1 : 0;
    const double extent = c.points.col(col).maxCoeff() - c.points.col(col).minCoeff();
    if (extent <= 0.0)
        throw DegenerateContourError(std::string("zero extent along ") +
                                     (axis == Axis::Height ? "height" : "width"));
    return extent;
}

}  // namespace finrank
