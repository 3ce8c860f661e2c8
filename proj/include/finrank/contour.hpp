#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "finrank/errors.hpp"

namespace finrank {

// One point per row, columns are x and y in image pixels.
using PointList = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class Axis { Height, Width };

// An ordered trailing-edge trace. Points run head-to-tail as traced by the
// upstream extractor; no canonical orientation is imposed here.
struct Contour {
    PointList points;
    std::string individual_id;
    std::string encounter_id;
    std::string image_id;

    Eigen::Index size() const { return points.rows(); }
};

bool operator==(const Contour& a, const Contour& b);

// Contours grouped by (individual, encounter, image). Each triple is unique.
// std::map keeps iteration in identifier order, which the rankers rely on for
// deterministic tie-breaking.
class EncounterDatabase {
public:
    using ImageMap = std::map<std::string, Contour>;
    using EncounterMap = std::map<std::string, ImageMap>;
    using IndividualMap = std::map<std::string, EncounterMap>;

    // Throws ConflictError if the (individual, encounter, image) triple exists.
    void insert(Contour c);

    const IndividualMap& individuals() const { return individuals_; }
    bool empty() const { return individuals_.empty(); }

    std::size_t individual_count() const { return individuals_.size(); }
    std::size_t encounter_count() const;
    std::size_t image_count() const;

    const EncounterMap& encounters_of(const std::string& individual) const;
    const ImageMap& images_of(const std::string& individual, const std::string& encounter) const;

    std::vector<const Contour*> all_contours() const;

    friend bool operator==(const EncounterDatabase& a, const EncounterDatabase& b);

private:
    IndividualMap individuals_;
};

enum class ContourFormat { Jsonl, Csv };

struct ParseOptions {
    // With strict on, malformed lines and duplicate triples throw. With it off
    // they are recorded as diagnostics and skipped, like invalid records.
    bool strict = true;
};

struct ParseReport {
    EncounterDatabase db;
    std::vector<std::string> diagnostics;  // one entry per rejected record/line
    std::size_t accepted = 0;
};

// Reads contour records from `in`. Records with fewer than two distinct points
// or non-finite coordinates are rejected with a per-record diagnostic;
// consecutive duplicate points are dropped silently.
ParseReport parse_contours(std::istream& in, ContourFormat format, const ParseOptions& opts = {});

void serialize_contours(const EncounterDatabase& db, std::ostream& out, ContourFormat format);

// Returns `n` points spaced uniformly by cumulative arc length, interpolated
// linearly along the polyline. The first and last input points are preserved
// exactly. Throws DegenerateContourError when total arc length is zero.
Contour resample_arclength(const Contour& c, Eigen::Index n);

// Bounding-box extent along the requested axis, used to turn relative scales
// into pixel radii. Throws DegenerateContourError on zero extent.
double normalized_extent(const Contour& c, Axis axis);

double total_arclength(const Contour& c);

}  // namespace finrank
