#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "finrank/contour.hpp"

namespace finrank {

// One identity-bearing mark on the trailing edge: a raised-cosine bump normal
// to the base arc. `nick` bulges outward, `notch` cuts inward.
struct NotchSpec {
    double position = 0.5;  // fraction of the parameter interval, in (0, 1)
    double depth = 0.05;    // fraction of the fin extent, in (0, 0.2]
    double width = 0.05;    // fraction of the parameter interval, in (0, 0.2]
    bool nick = false;      // polarity: nick (outward) vs notch (inward)
};

// A synthetic individual: a shared fin-like base arc plus its private notch
// pattern. Notch positions never overlap within a template.
struct IndividualTemplate {
    std::string id;
    std::vector<NotchSpec> notches;
};

// Per-image nuisance transforms, applied in the fixed order
// end-bump noise -> rotate -> anisotropic scale -> truncate -> jitter.
struct DistortionConfig {
    double rotation_deg = 0.0;      // rotation drawn from [-r, r] degrees
    double aniso_scale = 0.0;       // x/y scales drawn from [1-a, 1+a]
    double truncation = 0.0;        // total arc-length fraction removed, split
                                    // randomly between the two ends; in [0, 0.3)
    double jitter_sigma = 0.0;      // gaussian pixel noise per coordinate
    // identity-free bump noise confined to the outer sixths of the edge,
    // redrawn per image; amplitude as a fraction of the fin extent
    int end_noise_bumps = 0;
    double end_noise_depth = 0.0;
    std::uint64_t seed = 0;
};

// The undistorted template polyline at n points.
Contour sample_template(const IndividualTemplate& t, Eigen::Index n);

// Population with pairwise-distinct, separable notch configurations placed
// inside [pos_lo, pos_hi]. Throws Error when the notches cannot be placed.
std::vector<IndividualTemplate> generate_population(int n_individuals, int notches_per_individual,
                                                    std::uint64_t seed, double pos_lo = 0.12,
                                                    double pos_hi = 0.88);

// One encounter of `images` images of the template, each distorted by an
// independent draw from `d` (seeded by `seed`), labeled with the template's
// identifier and the given encounter id.
std::vector<Contour> render_encounter(const IndividualTemplate& t, const DistortionConfig& d,
                                      int images, std::uint64_t seed,
                                      const std::string& encounter_id);

struct BenchmarkConfig {
    int individuals = 50;
    int notches = 3;
    int encounters = 3;
    int images = 2;
    DistortionConfig distortion{5.0, 0.05, 0.03, 0.4, 0};  // mild viewpoint nuisance
    std::uint64_t seed = 0;
    // When set, each encounter's truncation is redrawn in [0, occlusion],
    // shared by its images: heavier per-encounter occlusion for sweep studies.
    double per_encounter_occlusion = 0.0;
    // notch placement interval
    double notch_lo = 0.12;
    double notch_hi = 0.88;
};

// Labeled synthetic dataset: `encounters` per individual, `images` per
// encounter, rendered with per-encounter seeds derived from `seed`.
EncounterDatabase generate_benchmark(const BenchmarkConfig& cfg);

}  // namespace finrank
