#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "finrank/descriptors.hpp"
#include "finrank/ranking.hpp"

namespace finrank {

struct Neighbor {
    double distance = 0.0;
    std::int32_t item = -1;  // stable descriptor id, insertion order
};

// Forest of randomized hyperplane-split trees over packed descriptor vectors,
// with an exact brute-force search mode that is the reference for all tests.
class NnIndex {
public:
    struct BuildParams {
        int trees = 50;
        int leaf_size = 16;
        std::uint64_t seed = 0;
    };

    // Indexes every indexable descriptor from every set; sentinels are
    // skipped. Throws EmptyInputError when nothing is indexable.
    static NnIndex build(const std::vector<DescriptorSet>& sets, const BuildParams& params);

    // k nearest neighbors by Euclidean distance, sorted by (distance, item).
    // Exact mode scans every vector; forest mode inspects a candidate budget
    // proportional to k * trees (or `budget` when positive).
    std::vector<Neighbor> nearest(const Eigen::VectorXd& query, int k, bool exact,
                                  int budget = 0) const;

    Eigen::Index size() const { return vectors_.cols(); }
    int dim() const { return static_cast<int>(vectors_.rows()); }
    int tree_count() const { return static_cast<int>(trees_.size()); }
    std::uint64_t seed() const { return seed_; }
    const std::string& individual_of(std::int32_t item) const;
    const std::vector<std::string>& individuals() const { return individuals_; }

    void save(std::ostream& out) const;
    static NnIndex load(std::istream& in);

private:
    struct Node {
        Eigen::VectorXd normal;  // empty for leaves
        double offset = 0.0;
        std::int32_t left = -1, right = -1;
        std::vector<std::int32_t> items;  // leaf payload
        bool leaf() const { return left < 0; }
    };

    Eigen::MatrixXd vectors_;            // dim x N, one column per descriptor
    std::vector<std::int32_t> owner_;    // N entries into individuals_
    std::vector<std::string> individuals_;
    std::vector<std::vector<Node>> trees_;
    int leaf_size_ = 16;
    std::uint64_t seed_ = 0;

    std::int32_t build_node(std::vector<Node>& arena, std::vector<std::int32_t>& items,
                            std::size_t begin, std::size_t end, std::mt19937_64& rng,
                            int depth = 0);
    double distance_to(const Eigen::VectorXd& q, std::int32_t item) const;
};

struct ScoreTable {
    std::map<std::string, double> scores;  // individual -> accumulated total, <= 0
    int effective_k = 0;                   // k after any truncation to index size - 1
    bool truncated = false;
};

// Local naive Bayes nearest-neighbor scoring. For each query descriptor the
// k+1 nearest neighbors are retrieved; with d_{k+1} as the background
// distance, every distinct individual p among the first k receives
// d_p - d_{k+1} where d_p is its closest distance there. Smaller is better.
ScoreTable lnbnn_scores(const std::vector<Descriptor>& query_descs, const NnIndex& idx, int k,
                        bool exact = false, int budget = 0);

// Stacks the descriptors of all images in the encounter, scores them, and
// returns every index individual: scored ones ascending by (score, id), then
// unscored ones by id.
RankedList encounter_query_lnbnn(const std::vector<DescriptorSet>& encounter_images,
                                 const NnIndex& idx, int k, bool exact = false, int budget = 0);

}  // namespace finrank
