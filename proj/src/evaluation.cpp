#include "finrank/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>

namespace finrank {

namespace {

// Hand-rolled Fisher-Yates so split membership does not depend on the
// standard library's shuffle implementation.
template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Split make_split(const EncounterDatabase& db, int m, std::uint64_t seed) {
    if (db.empty()) throw EmptyInputError("empty database");
    if (m < 1) throw DomainError("encounters per individual must be at least 1");

    std::mt19937_64 rng(seed);
    Split split;
    split.seed = seed;
    for (const auto& [ind, encs] : db.individuals()) {
        std::vector<std::string> enc_ids;
        enc_ids.reserve(encs.size());
        for (const auto& [enc, imgs] : encs) enc_ids.push_back(enc);
        shuffle_vec(enc_ids, rng);

        const std::size_t n = enc_ids.size();
        std::size_t db_count = n;
        if (n > static_cast<std::size_t>(m))
            db_count = static_cast<std::size_t>(m);
        else if (n >= 2)
            db_count = n - 1;

        for (std::size_t i = 0; i < n; ++i) {
            const auto& imgs = encs.at(enc_ids[i]);
            const bool to_db = i < db_count;
            for (const auto& [img, c] : imgs)
                (to_db ? split.database : split.query_data).insert(c);
            if (!to_db) split.queries.push_back({ind, enc_ids[i]});
        }
    }
    std::sort(split.queries.begin(), split.queries.end());
    return split;
}

std::size_t truth_rank(const RankedList& ranked) {
    for (std::size_t i = 0; i < ranked.entries.size(); ++i)
        if (ranked.entries[i].first == ranked.query.individual) return i + 1;
    return ranked.entries.size() + 1;
}

TopKReport top_k_accuracy(const std::vector<RankedList>& rankings, int max_k) {
    if (rankings.empty()) throw EmptyInputError("no rankings");
    if (max_k < 1) throw DomainError("max_k must be at least 1");

    TopKReport report;
    report.accuracy.assign(static_cast<std::size_t>(max_k), 0.0);
    for (const RankedList& r : rankings) {
        const std::size_t rank = truth_rank(r);
        for (int k = static_cast<int>(rank); k <= max_k; ++k)
            report.accuracy[static_cast<std::size_t>(k - 1)] += 1.0;
    }
    for (double& a : report.accuracy) a /= static_cast<double>(rankings.size());
    report.rankings = rankings;
    return report;
}

namespace {

const RankedList& matching_entry(const std::vector<RankedList>& pool, const QueryUnit& q) {
    for (const RankedList& r : pool)
        if (r.query == q) return r;
    throw InconsistencyError("ranking sets cover different queries: missing (" + q.individual +
                             ", " + q.encounter + ")");
}

}  // namespace

std::vector<bool> fuse_rankings(const std::vector<RankedList>& a, const std::vector<RankedList>& b,
                                int k) {
    if (a.size() != b.size())
        throw InconsistencyError("ranking sets cover different query counts");
    std::vector<bool> correct;
    correct.reserve(a.size());
    for (const RankedList& ra : a) {
        const RankedList& rb = matching_entry(b, ra.query);
        const bool hit_a = truth_rank(ra) <= static_cast<std::size_t>(k);
        const bool hit_b = truth_rank(rb) <= static_cast<std::size_t>(k);
        correct.push_back(hit_a || hit_b);
    }
    return correct;
}

std::vector<double> fused_accuracy_curve(const std::vector<RankedList>& a,
                                         const std::vector<RankedList>& b, int max_k) {
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(max_k));
    for (int k = 1; k <= max_k; ++k) {
        const auto correct = fuse_rankings(a, b, k);
        const auto hits = std::count(correct.begin(), correct.end(), true);
        curve.push_back(static_cast<double>(hits) / static_cast<double>(correct.size()));
    }
    return curve;
}

std::vector<SweepPoint> sweep_encounters(const EncounterDatabase& db,
                                         const std::vector<int>& m_values, std::uint64_t seed,
                                         const PipelineConfig& cfg, int max_k) {
    if (m_values.empty()) throw EmptyInputError("no m values to sweep");
    std::vector<SweepPoint> out;
    out.reserve(m_values.size());
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        const Split split = make_split(db, m_values[i], seed);
        const auto rankings = rank_queries(split.database, split.query_data, split.queries, cfg);
        SweepPoint point;
        point.m = m_values[i];
        point.report = top_k_accuracy(rankings, max_k);
        point.report.seed = seed;
        point.report.config_hash = config_hash(cfg);
        out.push_back(std::move(point));
    }
    return out;
}

MultiRunReport run_splits(const EncounterDatabase& db, int n_runs, std::uint64_t base_seed, int m,
                          const PipelineConfig& cfg, int max_k) {
    if (n_runs < 1) throw DomainError("run count must be at least 1");

    MultiRunReport out;
    out.runs.reserve(static_cast<std::size_t>(n_runs));
    for (int run = 0; run < n_runs; ++run) {
        const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(run));
        const Split split = make_split(db, m, seed);
        const auto rankings = rank_queries(split.database, split.query_data, split.queries, cfg);
        TopKReport report = top_k_accuracy(rankings, max_k);
        report.seed = seed;
        report.config_hash = config_hash(cfg);
        out.runs.push_back(std::move(report));
    }

    out.mean.assign(static_cast<std::size_t>(max_k), 0.0);
    out.stddev.assign(static_cast<std::size_t>(max_k), 0.0);
    for (const auto& r : out.runs)
        for (int k = 0; k < max_k; ++k) out.mean[static_cast<std::size_t>(k)] += r.accuracy[static_cast<std::size_t>(k)];
    for (double& v : out.mean) v /= static_cast<double>(n_runs);
    if (n_runs > 1) {
        for (const auto& r : out.runs)
            for (int k = 0; k < max_k; ++k) {
                const double d = r.accuracy[static_cast<std::size_t>(k)] - out.mean[static_cast<std::size_t>(k)];
                out.stddev[static_cast<std::size_t>(k)] += d * d;
            }
        for (double& v : out.stddev) v = std::sqrt(v / static_cast<double>(n_runs - 1));
    }
    return out;
}

void dump_rankings(const std::vector<RankedList>& rankings, std::ostream& out) {
    for (const RankedList& r : rankings) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [ind, score] : r.entries) entries.push_back({ind, score});
        nlohmann::json j{{"query", {r.query.individual, r.query.encounter}},
                         {"ranking", std::move(entries)}};
        out << j.dump() << "\n";
    }
}

std::vector<RankedList> load_rankings(std::istream& in) {
    std::vector<RankedList> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            if (!j.contains("query")) continue;  // metadata line from a dump header
            RankedList r;
            r.query.individual = j.at("query").at(0).get<std::string>();
            r.query.encounter = j.at("query").at(1).get<std::string>();
            for (const auto& e : j.at("ranking"))
                r.entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return out;
}

}  // namespace finrank
