#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "finrank/curvature.hpp"

namespace finrank {

// Band wide enough to never constrain any path.
inline constexpr Eigen::Index kUnboundedBand = std::numeric_limits<Eigen::Index>::max();

struct AlignmentConfig {
    Eigen::Index band = 8;            // Sakoe-Chiba bound |i - j| <= band, in resampled indices
    Eigen::Index resample_to = 128;   // both matrices are brought to this many columns
    std::optional<Eigen::VectorXd> weights;  // per-position spatial weights, length resample_to
    bool want_path = false;
};

struct AlignmentResult {
    double cost = 0.0;
    // Monotone warp from (0,0) to (n-1, n-1); populated only when requested.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> path;
};

// Weighted distance between two curvature columns: wi * wj * ||ci - cj||_2.
double point_distance(const Eigen::VectorXd& ci, const Eigen::VectorXd& cj, double wi = 1.0,
                      double wj = 1.0);

// Minimal accumulated warp cost between the two curvature matrices under steps
// {(1,0),(0,1),(1,1)} restricted to the band. Cell (0,0) costs d(col0, col0');
// the first row and column accumulate along their only admissible direction.
AlignmentResult align(const CurvatureMatrix& a, const CurvatureMatrix& b,
                      const AlignmentConfig& cfg);

// Encounter similarity: minimum alignment cost over all (query image, database
// image) pairs. Lower is better.
double encounter_score_dtw(const std::vector<const CurvatureMatrix*>& query_images,
                           const std::vector<const CurvatureMatrix*>& db_images,
                           const AlignmentConfig& cfg);

}  // namespace finrank
