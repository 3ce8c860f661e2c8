#pragma once

#include <cstdint>

#include "finrank/evaluation.hpp"
#include "finrank/weights.hpp"

namespace finrank {

struct LearnConfig {
    int k_objective = 1;    // which top-k accuracy the search maximizes
    int budget = 1;         // total objective evaluations, including the start
    std::uint64_t seed = 0;
    double coeff_lo = 0.0;  // coefficient box
    double coeff_hi = 2.0;
    int degree = 10;
};

struct LearnOutcome {
    SpatialWeights weights;
    double baseline_objective = 0.0;  // top-k accuracy at all-ones coefficients
    double learned_objective = 0.0;   // never below the baseline
    int evaluations = 0;
};

// Derivative-free search for Bernstein coefficients that maximize the DTW
// ranker's top-k accuracy on the given training split: seeded random search
// over the box followed by coordinate-wise refinement around the incumbent.
// Starts at all-ones coefficients; equal objectives keep the candidate closer
// to uniform. The config's matcher kind is ignored (always DTW alignment).
LearnOutcome learn_weights(const Split& split, const PipelineConfig& dtw_cfg,
                           const LearnConfig& cfg);

}  // namespace finrank
