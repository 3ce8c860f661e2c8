#include "finrank/lnbnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <queue>

namespace finrank {

namespace {

// Sequential summation keeps the distance bit-stable across build layouts.
double euclidean(const double* a, const double* b, int dim) {
    double acc = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated index file");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IoError("truncated index file");
    return s;
}

constexpr char kMagic[8] = {'F', 'R', 'N', 'N', 'I', 'D', 'X', '1'};

}  // namespace

double NnIndex::distance_to(const Eigen::VectorXd& q, std::int32_t item) const {
    return euclidean(q.data(), vectors_.col(item).data(), dim());
}

std::int32_t NnIndex::build_node(std::vector<Node>& arena, std::vector<std::int32_t>& items,
                                 std::size_t begin, std::size_t end, std::mt19937_64& rng,
                                 int depth) {
    const std::size_t count = end - begin;
    const auto node_id = static_cast<std::int32_t>(arena.size());
    arena.emplace_back();

    if (count <= static_cast<std::size_t>(leaf_size_) || depth > 64) {
        arena[node_id].items.assign(items.begin() + static_cast<std::ptrdiff_t>(begin),
                                    items.begin() + static_cast<std::ptrdiff_t>(end));
        return node_id;
    }

    // Hyperplane through the midpoint of two sampled points. A handful of
    // attempts guards against duplicate vectors; if none separates the set,
    // the node becomes an oversized leaf.
    Eigen::VectorXd normal;
    double offset = 0.0;
    std::size_t mid = begin;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const std::size_t pa = begin + rng() % count;
        std::size_t pb = begin + rng() % count;
        if (pb == pa) pb = begin + (pa - begin + 1 + rng() % (count - 1)) % count;
        const Eigen::VectorXd va = vectors_.col(items[pa]);
        const Eigen::VectorXd vb = vectors_.col(items[pb]);
        normal = va - vb;
        const double norm = normal.norm();
        if (norm == 0.0) continue;
        normal /= norm;
        offset = normal.dot(0.5 * (va + vb));
        auto it = std::partition(items.begin() + static_cast<std::ptrdiff_t>(begin),
                                 items.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::int32_t id) { return normal.dot(vectors_.col(id)) < offset; });
        mid = static_cast<std::size_t>(it - items.begin());
        if (mid != begin && mid != end) break;
        mid = begin;
    }
    if (mid == begin || mid == end) {
        arena[node_id].items.assign(items.begin() + static_cast<std::ptrdiff_t>(begin),
                                    items.begin() + static_cast<std::ptrdiff_t>(end));
        return node_id;
    }

    arena[node_id].normal = normal;
    arena[node_id].offset = offset;
    const std::int32_t left = build_node(arena, items, begin, mid, rng, depth + 1);
    arena[node_id].left = left;
    const std::int32_t right = build_node(arena, items, mid, end, rng, depth + 1);
    arena[node_id].right = right;
    return node_id;
}

NnIndex NnIndex::build(const std::vector<DescriptorSet>& sets, const BuildParams& params) {
    if (params.trees < 1) throw DomainError("tree count must be positive");
    if (params.leaf_size < 1) throw DomainError("leaf size must be positive");

    NnIndex idx;
    idx.leaf_size_ = params.leaf_size;
    idx.seed_ = params.seed;

    std::map<std::string, std::int32_t> ids;
    Eigen::Index total = 0;
    int dim = 0;
    for (const auto& set : sets)
        for (const auto& d : set.items)
            if (d.indexable) {
                ++total;
                dim = static_cast<int>(d.vector.size());
            }
    if (total == 0) throw EmptyInputError("no indexable descriptors");

    idx.vectors_.resize(dim, total);
    idx.owner_.reserve(static_cast<std::size_t>(total));
    Eigen::Index col = 0;
    for (const auto& set : sets) {
        for (const auto& d : set.items) {
            if (!d.indexable) continue;
            if (d.vector.size() != dim) throw DimensionError("descriptor dimensions differ");
            auto [it, fresh] = ids.emplace(set.individual_id, 0);
            if (fresh) it->second = -1;  // assigned below once the map is complete
            idx.vectors_.col(col++) = d.vector;
            idx.owner_.push_back(0);  // placeholder, patched after id assignment
        }
    }
    idx.individuals_.reserve(ids.size());
    for (auto& [name, id] : ids) {
        id = static_cast<std::int32_t>(idx.individuals_.size());
        idx.individuals_.push_back(name);
    }
    col = 0;
    for (const auto& set : sets) {
        const std::int32_t owner = ids.at(set.individual_id);
        for (const auto& d : set.items)
            if (d.indexable) idx.owner_[static_cast<std::size_t>(col++)] = owner;
    }

    std::mt19937_64 rng(params.seed);
    idx.trees_.resize(static_cast<std::size_t>(params.trees));
    std::vector<std::int32_t> items(static_cast<std::size_t>(total));
    for (std::size_t t = 0; t < idx.trees_.size(); ++t) {
        for (Eigen::Index i = 0; i < total; ++i) items[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
        idx.build_node(idx.trees_[t], items, 0, items.size(), rng);
    }
    return idx;
}

const std::string& NnIndex::individual_of(std::int32_t item) const {
    return individuals_[static_cast<std::size_t>(owner_[static_cast<std::size_t>(item)])];
}

std::vector<Neighbor> NnIndex::nearest(const Eigen::VectorXd& query, int k, bool exact,
                                       int budget) const {
    if (k < 0) throw DomainError("neighbor count must be non-negative");
    if (query.size() != vectors_.rows()) throw DimensionError("query dimension mismatch");
    const auto n = static_cast<std::int32_t>(vectors_.cols());
    k = std::min<int>(k, static_cast<int>(n));
    if (k == 0) return {};

    std::vector<Neighbor> found;
    if (exact) {
        found.resize(static_cast<std::size_t>(n));
        for (std::int32_t i = 0; i < n; ++i) found[static_cast<std::size_t>(i)] = {distance_to(query, i), i};
    } else {
        if (budget <= 0) budget = tree_count() * std::max(k, 16);

        // Best-first traversal across all trees at once, Annoy style: the far
        // child of each split is admitted with the margin as its priority.
        using Entry = std::tuple<double, std::size_t, std::int32_t>;
        std::priority_queue<Entry> pq;
        for (std::size_t t = 0; t < trees_.size(); ++t)
            pq.emplace(std::numeric_limits<double>::infinity(), t, 0);

        thread_local std::vector<std::uint32_t> stamp;
        thread_local std::uint32_t generation = 0;
        if (stamp.size() < static_cast<std::size_t>(n)) stamp.assign(static_cast<std::size_t>(n), 0);
        ++generation;
        if (generation == 0) {  // counter wrapped, reset stamps
            std::fill(stamp.begin(), stamp.end(), 0);
            ++generation;
        }

        std::vector<std::int32_t> candidates;
        candidates.reserve(static_cast<std::size_t>(budget) + 64);
        while (!pq.empty() && candidates.size() < static_cast<std::size_t>(budget)) {
            const auto [pri, tree, node_id] = pq.top();
            pq.pop();
            const Node& node = trees_[tree][static_cast<std::size_t>(node_id)];
            if (node.leaf()) {
                for (std::int32_t item : node.items) {
                    auto& s = stamp[static_cast<std::size_t>(item)];
                    if (s != generation) {
                        s = generation;
                        candidates.push_back(item);
                    }
                }
            } else {
                const double margin = node.normal.dot(query) - node.offset;
                const std::int32_t near = margin < 0.0 ? node.left : node.right;
                const std::int32_t far = margin < 0.0 ? node.right : node.left;
                pq.emplace(std::min(pri, std::abs(margin)), tree, near);
                pq.emplace(std::min(pri, -std::abs(margin)), tree, far);
            }
        }
        found.reserve(candidates.size());
        for (std::int32_t item : candidates) found.push_back({distance_to(query, item), item});
    }

    const auto cmp = [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.item < b.item;
    };
    if (static_cast<int>(found.size()) > k) {
        std::partial_sort(found.begin(), found.begin() + k, found.end(), cmp);
        found.resize(static_cast<std::size_t>(k));
    } else {
        std::sort(found.begin(), found.end(), cmp);
    }
    return found;
}

ScoreTable lnbnn_scores(const std::vector<Descriptor>& query_descs, const NnIndex& idx, int k,
                        bool exact, int budget) {
    if (k < 1) throw DomainError("k must be at least 1");
    if (idx.size() == 0) throw EmptyInputError("empty index");

    ScoreTable table;
    table.effective_k = k;
    if (static_cast<Eigen::Index>(k) + 1 > idx.size()) {
        table.effective_k = static_cast<int>(idx.size()) - 1;
        table.truncated = true;
    }
    const int kk = table.effective_k;

    for (const Descriptor& d : query_descs) {
        if (!d.indexable) continue;
        const auto neigh = idx.nearest(d.vector, kk + 1, exact, budget);
        if (static_cast<int>(neigh.size()) < kk + 1) continue;  // cannot happen after truncation
        const double background = neigh[static_cast<std::size_t>(kk)].distance;
        // Closest distance per distinct individual among the first kk.
        std::map<std::string, double> closest;
        for (int j = 0; j < kk; ++j) {
            const std::string& ind = idx.individual_of(neigh[static_cast<std::size_t>(j)].item);
            auto [it, fresh] = closest.emplace(ind, neigh[static_cast<std::size_t>(j)].distance);
            if (!fresh) it->second = std::min(it->second, neigh[static_cast<std::size_t>(j)].distance);
        }
        for (const auto& [ind, dist] : closest) table.scores[ind] += dist - background;
    }
    return table;
}

RankedList encounter_query_lnbnn(const std::vector<DescriptorSet>& encounter_images,
                                 const NnIndex& idx, int k, bool exact, int budget) {
    std::vector<Descriptor> stacked;
    for (const auto& set : encounter_images)
        for (const auto& d : set.items)
            if (d.indexable) stacked.push_back(d);
    if (stacked.empty()) throw EmptyInputError("query encounter has no indexable descriptors");

    const ScoreTable table = lnbnn_scores(stacked, idx, k, exact, budget);

    RankedList out;
    if (!encounter_images.empty()) {
        out.query.individual = encounter_images.front().individual_id;
        out.query.encounter = encounter_images.front().encounter_id;
    }
    std::vector<std::pair<std::string, double>> scored(table.scores.begin(), table.scores.end());
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    out.entries = std::move(scored);
    for (const std::string& ind : idx.individuals())
        if (!table.scores.count(ind)) out.entries.emplace_back(ind, 0.0);
    return out;
}

void NnIndex::save(std::ostream& out) const {
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, 1);  // version
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(vectors_.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(vectors_.cols()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(trees_.size()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(leaf_size_));
    write_pod<std::uint64_t>(out, seed_);

    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(individuals_.size()));
    for (const auto& s : individuals_) write_string(out, s);
    out.write(reinterpret_cast<const char*>(owner_.data()),
              static_cast<std::streamsize>(owner_.size() * sizeof(std::int32_t)));
    out.write(reinterpret_cast<const char*>(vectors_.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(vectors_.size())));

    for (const auto& tree : trees_) {
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tree.size()));
        for (const Node& node : tree) {
            write_pod<std::uint8_t>(out, node.leaf() ? 1 : 0);
            if (node.leaf()) {
                write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(node.items.size()));
                out.write(reinterpret_cast<const char*>(node.items.data()),
                          static_cast<std::streamsize>(node.items.size() * sizeof(std::int32_t)));
            } else {
                out.write(reinterpret_cast<const char*>(node.normal.data()),
                          static_cast<std::streamsize>(sizeof(double) *
                                                       static_cast<std::size_t>(node.normal.size())));
                write_pod<double>(out, node.offset);
                write_pod<std::int32_t>(out, node.left);
                write_pod<std::int32_t>(out, node.right);
            }
        }
    }
    if (!out) throw IoError("failed to write index");
}

NnIndex NnIndex::load(std::istream& in) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not an index file");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != 1) throw IoError("unsupported index version " + std::to_string(version));

    NnIndex idx;
    const auto dim = read_pod<std::uint32_t>(in);
    const auto count = read_pod<std::uint64_t>(in);
    const auto trees = read_pod<std::uint32_t>(in);
    idx.leaf_size_ = static_cast<int>(read_pod<std::uint32_t>(in));
    idx.seed_ = read_pod<std::uint64_t>(in);

    const auto n_individuals = read_pod<std::uint32_t>(in);
    idx.individuals_.reserve(n_individuals);
    for (std::uint32_t i = 0; i < n_individuals; ++i) idx.individuals_.push_back(read_string(in));

    idx.owner_.resize(count);
    in.read(reinterpret_cast<char*>(idx.owner_.data()),
            static_cast<std::streamsize>(count * sizeof(std::int32_t)));
    idx.vectors_.resize(dim, static_cast<Eigen::Index>(count));
    in.read(reinterpret_cast<char*>(idx.vectors_.data()),
            static_cast<std::streamsize>(sizeof(double) * dim * count));
    if (!in) throw IoError("truncated index file");

    idx.trees_.resize(trees);
    for (auto& tree : idx.trees_) {
        const auto n_nodes = read_pod<std::uint32_t>(in);
        tree.resize(n_nodes);
        for (auto& node : tree) {
            const auto is_leaf = read_pod<std::uint8_t>(in);
            if (is_leaf) {
                const auto n_items = read_pod<std::uint32_t>(in);
                node.items.resize(n_items);
                in.read(reinterpret_cast<char*>(node.items.data()),
                        static_cast<std::streamsize>(n_items * sizeof(std::int32_t)));
                if (!in) throw IoError("truncated index file");
            } else {
                node.normal.resize(dim);
                in.read(reinterpret_cast<char*>(node.normal.data()),
                        static_cast<std::streamsize>(sizeof(double) * dim));
                node.offset = read_pod<double>(in);
                node.left = read_pod<std::int32_t>(in);
                node.right = read_pod<std::int32_t>(in);
                if (!in) throw IoError("truncated index file");
            }
        }
    }
    return idx;
}

}  // namespace finrank
