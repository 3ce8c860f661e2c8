#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "finrank/contour.hpp"
#include "finrank/matchers.hpp"
#include "finrank/ranking.hpp"

namespace finrank {

// Encounter-level query/database partition of one dataset. Query encounters
// are always disjoint from database encounters of the same individual.
struct Split {
    EncounterDatabase database;
    EncounterDatabase query_data;     // contours of the query encounters
    std::vector<QueryUnit> queries;
    std::uint64_t seed = 0;
};

// Per individual with n encounters: n > m keeps m random encounters in the
// database and queries the rest; 2 <= n <= m keeps n-1 and queries one;
// single-encounter individuals stay database-only distractors.
Split make_split(const EncounterDatabase& db, int m, std::uint64_t seed);

struct TopKReport {
    std::vector<double> accuracy;      // accuracy[k-1] for k = 1..K
    std::vector<RankedList> rankings;  // retained for fusion
    std::uint64_t seed = 0;
    std::string config_hash;
};

// accuracy(k) = fraction of queries whose own individual appears within the
// first k entries. Truth is the query unit's individual id.
TopKReport top_k_accuracy(const std::vector<RankedList>& rankings, int max_k);

// Rank of the truth individual in one ranked list (1-based; one past the end
// when absent).
std::size_t truth_rank(const RankedList& ranked);

// Per query: correct iff the truth appears in the top k of either input.
// Both inputs must cover the same query set (in any order).
std::vector<bool> fuse_rankings(const std::vector<RankedList>& a, const std::vector<RankedList>& b,
                                int k);

// Fused accuracy for every k = 1..max_k.
std::vector<double> fused_accuracy_curve(const std::vector<RankedList>& a,
                                         const std::vector<RankedList>& b, int max_k);

struct SweepPoint {
    int m = 0;
    TopKReport report;
};

// Re-splits and re-evaluates for each database-encounters-per-individual m.
std::vector<SweepPoint> sweep_encounters(const EncounterDatabase& db,
                                         const std::vector<int>& m_values, std::uint64_t seed,
                                         const PipelineConfig& cfg, int max_k);

struct MultiRunReport {
    std::vector<TopKReport> runs;
    std::vector<double> mean;    // per k
    std::vector<double> stddev;  // sample standard deviation per k
};

// Averages accuracy curves over n_runs independent splits.
MultiRunReport run_splits(const EncounterDatabase& db, int n_runs, std::uint64_t base_seed, int m,
                          const PipelineConfig& cfg, int max_k);

// JSONL, one object per query: {"query": [individual, encounter],
// "ranking": [[individual, score], ...]}. The ingest side reads the same
// format, including files produced by external matchers.
void dump_rankings(const std::vector<RankedList>& rankings, std::ostream& out);
std::vector<RankedList> load_rankings(std::istream& in);

}  // namespace finrank
