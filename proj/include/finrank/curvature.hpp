#pragma once

#include <Eigen/Dense>

#include <vector>

#include "finrank/contour.hpp"

namespace finrank {

// Circle radii as fractions of the fin's bounding-box extent along `axis`
// (height for dorsal fins, width for flukes). Strictly increasing, in (0, 1].
struct ScaleSet {
    std::vector<double> relative_scales;
    Axis axis = Axis::Height;

    ScaleSet() = default;
    ScaleSet(std::vector<double> scales, Axis ax);

    std::size_t count() const { return relative_scales.size(); }
};

// Multi-scale integral curvature of one contour: row per scale, column per
// contour point, every entry in [0, 1] with 0.5 meaning locally straight.
struct CurvatureMatrix {
    Eigen::MatrixXd values;  // count() x n
    ScaleSet scales;

    Eigen::Index point_count() const { return values.cols(); }
};

// Integral curvature at point `i` using a circle of radius `r` pixels.
//
// The maximal contiguous run of contour points around i that stays within
// distance r of point i is rotated about point i so the run's endpoints lie on
// a horizontal line, clipped to the axis-aligned square of side 2r centered at
// point i, and integrated trapezoidally against the square's bottom side. The
// curve is extended horizontally from its endpoints to the square's vertical
// edges so the area is taken over the square's full width; the accumulated
// signed area is clamped to [0, (2r)^2]. Returns the ratio of that area to
// (2r)^2, so a straight run gives exactly 0.5. A run of fewer than 2 points
// carries no shape evidence and also yields 0.5.
double integral_curvature_at(const Contour& c, Eigen::Index i, double r);

// Row k holds integral_curvature_at(c, ., radii[k]).
CurvatureMatrix curvature_matrix_with_radii(const Contour& c, const std::vector<double>& radii_px,
                                            const ScaleSet& scales);

// Radii derived as relative_scales[k] * normalized_extent(c, scales.axis).
CurvatureMatrix curvature_matrix(const Contour& c, const ScaleSet& scales);

// Each row resampled independently to n_out samples by linear interpolation on
// the uniform index grid.
CurvatureMatrix resample_curvature(const CurvatureMatrix& C, Eigen::Index n_out);

// Histogram of curvature over scale: per scale, an L1-normalized histogram of
// the row's values over [0, 1] with equal-width bins (half-open, last closed).
struct HocsFeature {
    Eigen::MatrixXd histograms;  // scales x bins, rows sum to 1
};

HocsFeature hocs_feature(const CurvatureMatrix& C, int bins);

// Histogram intersection similarity summed over scales; self-similarity equals
// the number of scales. Companion ranking distance is count() - intersection.
double hocs_intersection(const HocsFeature& a, const HocsFeature& b);

}  // namespace finrank
