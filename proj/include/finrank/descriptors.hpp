#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "finrank/curvature.hpp"

namespace finrank {

// Sorted keypoint indices into the resampled trailing edge, one list per
// scale. Indices 0 and n-1 are always present.
struct KeypointSet {
    std::vector<std::vector<Eigen::Index>> per_scale;
};

// Per scale: every strict interior local extremum (either polarity) of the
// curvature row, ranked by |value - 0.5| descending (ties toward the lower
// index), keeps the top n_kp - 2; the row ends are then added. Plateaus count
// once, at their leftmost index. Rows with fewer extrema yield smaller sets.
KeypointSet extract_keypoints(const CurvatureMatrix& C, int n_kp);

struct Descriptor {
    Eigen::VectorXd vector;   // unit Euclidean norm when indexable
    int scale = 0;            // row of the curvature matrix
    Eigen::Index start = 0;   // keypoint span, start < end
    Eigen::Index end = 0;
    bool indexable = true;    // false for the zero-norm sentinel
};

// Descriptors with the identity of the image they came from.
struct DescriptorSet {
    std::vector<Descriptor> items;
    std::string individual_id;
    std::string encounter_id;
    std::string image_id;
};

// For each scale and each keypoint pair (a < b): the curvature row sliced on
// [a, b], linearly resampled to `dim` samples and divided by its Euclidean
// norm. A zero-norm slice becomes a flagged sentinel excluded from indexing.
// With k keypoints a scale yields k*(k-1)/2 descriptors.
std::vector<Descriptor> extract_descriptors(const CurvatureMatrix& C, const KeypointSet& kp,
                                            int dim);

}  // namespace finrank
