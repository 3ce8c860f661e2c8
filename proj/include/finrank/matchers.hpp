#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "finrank/contour.hpp"
#include "finrank/curvature.hpp"
#include "finrank/descriptors.hpp"
#include "finrank/dtw.hpp"
#include "finrank/lnbnn.hpp"
#include "finrank/ranking.hpp"

namespace finrank {

enum class MatcherKind { Dtw, Lnbnn, Hocs };

const char* to_string(MatcherKind kind);
MatcherKind matcher_from_string(const std::string& name);

// Full pipeline configuration. The defaults are the dorsal-fin profile;
// humpback_profile() switches to the fluke settings.
struct PipelineConfig {
    MatcherKind kind = MatcherKind::Dtw;
    ScaleSet scales{{0.04, 0.06, 0.08, 0.10}, Axis::Height};
    Eigen::Index contour_resample = 1024;  // edge points before curvature
    AlignmentConfig align{8, 128, std::nullopt, false};
    int keypoints = 32;
    int descriptor_dim = 32;
    int lnbnn_k = 5;
    int trees = 50;
    int leaf_size = 16;
    bool exact_search = false;  // brute-force reference path instead of the forest
    int search_budget = 0;      // 0: proportional to k * trees
    int hocs_bins = 16;
    std::uint64_t seed = 0;
    unsigned jobs = 0;  // 0: all available cores
};

PipelineConfig bottlenose_profile();
PipelineConfig humpback_profile();

// Stable hash of every accuracy-relevant parameter, for artifact caching and
// report traceability.
std::string config_hash(const PipelineConfig& cfg);

// Key used for per-image artifact maps.
std::string image_key(const Contour& c);

// Curvature matrix on the arc-length-resampled edge, brought to the
// alignment length.
CurvatureMatrix dtw_matrix_for(const Contour& c, const PipelineConfig& cfg);

// Keypointed, unit-norm descriptors of one image.
DescriptorSet descriptors_for(const Contour& c, const PipelineConfig& cfg);

// Per-scale curvature histograms of one image.
HocsFeature hocs_for(const Contour& c, const PipelineConfig& cfg);

struct DtwArtifacts {
    std::map<std::string, CurvatureMatrix> by_image;  // image_key -> matrix
};

DtwArtifacts compute_dtw_artifacts(const EncounterDatabase& db, const PipelineConfig& cfg);
void save_dtw_artifacts(const DtwArtifacts& a, std::ostream& out);
DtwArtifacts load_dtw_artifacts(std::istream& in);

// Full-resolution matrices (contour_resample columns), the input for
// histogram features.
DtwArtifacts compute_hocs_artifacts(const EncounterDatabase& db, const PipelineConfig& cfg);

std::vector<DescriptorSet> compute_descriptor_sets(const EncounterDatabase& db,
                                                   const PipelineConfig& cfg);

// Ranks every query encounter against the database with the configured
// matcher. Each ranked list covers all database individuals, best first.
std::vector<RankedList> rank_queries(const EncounterDatabase& database,
                                     const EncounterDatabase& query_data,
                                     const std::vector<QueryUnit>& queries,
                                     const PipelineConfig& cfg);

// Variants over prebuilt database-side artifacts, for workspaces that cache
// them on disk. `database` supplies the individual/encounter structure the
// artifacts were computed from.
std::vector<RankedList> rank_with_dtw_artifacts(const DtwArtifacts& db_art,
                                                const EncounterDatabase& database,
                                                const EncounterDatabase& query_data,
                                                const std::vector<QueryUnit>& queries,
                                                const PipelineConfig& cfg);

std::vector<RankedList> rank_with_index(const NnIndex& index,
                                        const EncounterDatabase& query_data,
                                        const std::vector<QueryUnit>& queries,
                                        const PipelineConfig& cfg);

std::vector<RankedList> rank_with_hocs_artifacts(const DtwArtifacts& db_art,
                                                 const EncounterDatabase& database,
                                                 const EncounterDatabase& query_data,
                                                 const std::vector<QueryUnit>& queries,
                                                 const PipelineConfig& cfg);

}  // namespace finrank
