#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "finrank/lnbnn.hpp"

using namespace finrank;

namespace {

Descriptor desc_of(const std::vector<double>& v) {
    Descriptor d;
    d.vector = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    d.end = 1;
    return d;
}

DescriptorSet set_of(std::string individual, const std::vector<std::vector<double>>& vectors) {
    DescriptorSet s;
    s.individual_id = std::move(individual);
    s.encounter_id = "e0";
    s.image_id = "i0";
    for (const auto& v : vectors) s.items.push_back(desc_of(v));
    return s;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) {
        // Box-Muller
        double u1;
        do {
            u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        } while (u1 <= 0.0);
        const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    return v / v.norm();
}

// Independent brute-force scorer working from a fully sorted distance list.
std::map<std::string, double> oracle_scores(const std::vector<Eigen::VectorXd>& queries,
                                            const std::vector<Eigen::VectorXd>& db,
                                            const std::vector<std::string>& owners, int k) {
    std::map<std::string, double> scores;
    for (const auto& q : queries) {
        std::vector<std::pair<double, int>> dists;
        for (std::size_t i = 0; i < db.size(); ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < q.size(); ++j) {
                const double d = q[j] - db[i][j];
                acc += d * d;
            }
            dists.emplace_back(std::sqrt(acc), static_cast<int>(i));
        }
        std::sort(dists.begin(), dists.end());
        const double background = dists[static_cast<std::size_t>(k)].first;
        std::map<std::string, double> closest;
        for (int j = 0; j < k; ++j) {
            const std::string& ind = owners[static_cast<std::size_t>(dists[static_cast<std::size_t>(j)].second)];
            auto [it, fresh] = closest.emplace(ind, dists[static_cast<std::size_t>(j)].first);
            if (!fresh) it->second = std::min(it->second, dists[static_cast<std::size_t>(j)].first);
        }
        for (const auto& [ind, d] : closest) scores[ind] += d - background;
    }
    return scores;
}

}  // namespace

TEST_CASE("a singleton index returns its descriptor for any query") {
    const NnIndex idx = NnIndex::build({set_of("a", {{0.1, 0.2, 0.3}})}, {5, 4, 1});
    const auto res = idx.nearest(desc_of({0.9, 0.9, 0.9}).vector, 3, false);
    REQUIRE(res.size() == 1);
    CHECK(res[0].item == 0);
    CHECK(idx.individual_of(0) == "a");
}

TEST_CASE("duplicate vectors from two individuals are both retrievable") {
    const NnIndex idx =
        NnIndex::build({set_of("a", {{0.5, 0.5}}), set_of("b", {{0.5, 0.5}})}, {5, 4, 1});
    const auto res = idx.nearest(desc_of({0.5, 0.5}).vector, 2, true);
    REQUIRE(res.size() == 2);
    CHECK(res[0].distance == 0.0);
    CHECK(res[1].distance == 0.0);
    CHECK(res[0].item == 0);  // distance ties break on the stable item id
    CHECK(res[1].item == 1);
}

TEST_CASE("forest search reaches 95 percent recall at 10 on random unit vectors") {
    std::mt19937_64 rng(103);
    std::vector<DescriptorSet> sets;
    for (int i = 0; i < 500; ++i) {
        DescriptorSet s;
        s.individual_id = "ind" + std::to_string(i % 20);
        Descriptor d;
        d.vector = random_unit(rng, 16);
        d.end = 1;
        s.items.push_back(std::move(d));
        sets.push_back(std::move(s));
    }
    const NnIndex idx = NnIndex::build(sets, {50, 16, 7});
    double recall = 0.0;
    for (int p = 0; p < 100; ++p) {
        const Eigen::VectorXd q = random_unit(rng, 16);
        const auto exact = idx.nearest(q, 10, true);
        const auto approx = idx.nearest(q, 10, false);
        std::vector<int> ex, ap;
        for (const auto& n : exact) ex.push_back(n.item);
        for (const auto& n : approx) ap.push_back(n.item);
        std::sort(ex.begin(), ex.end());
        std::sort(ap.begin(), ap.end());
        std::vector<int> common;
        std::set_intersection(ex.begin(), ex.end(), ap.begin(), ap.end(),
                              std::back_inserter(common));
        recall += static_cast<double>(common.size()) / 10.0;
    }
    recall /= 100.0;
    CHECK(recall >= 0.95);
}

TEST_CASE("lnbnn credits the matching individual by the margin to the background") {
    const NnIndex idx =
        NnIndex::build({set_of("a", {{0.0, 0.0}}), set_of("b", {{1.0, 0.0}})}, {5, 4, 1});
    const std::vector<Descriptor> query{desc_of({0.0, 0.0})};
    const ScoreTable table = lnbnn_scores(query, idx, 1, true);
    REQUIRE(table.scores.size() == 1);
    CHECK(table.scores.at("a") == doctest::Approx(-1.0));
    CHECK(table.scores.count("b") == 0);
}

TEST_CASE("equidistant neighbors produce zero increments and identifier-tied ranking") {
    const std::vector<DescriptorSet> sets{set_of("a", {{1.0, 0.0}}), set_of("b", {{-1.0, 0.0}})};
    const NnIndex idx = NnIndex::build(sets, {5, 4, 1});
    DescriptorSet q = set_of("q", {{0.0, 0.0}});
    const RankedList ranked = encounter_query_lnbnn({q}, idx, 1, true);
    REQUIRE(ranked.entries.size() == 2);
    CHECK(ranked.entries[0].first == "a");
    CHECK(ranked.entries[0].second == 0.0);
    CHECK(ranked.entries[1].first == "b");
    CHECK(ranked.entries[1].second == 0.0);
}

TEST_CASE("exact scoring matches the brute-force reimplementation bit for bit") {
    std::mt19937_64 rng(107);
    std::vector<DescriptorSet> sets;
    std::vector<Eigen::VectorXd> db;
    std::vector<std::string> owners;
    for (int ind = 0; ind < 5; ++ind) {
        DescriptorSet s;
        s.individual_id = "ind" + std::to_string(ind);
        for (int j = 0; j < 20; ++j) {
            Descriptor d;
            d.vector = random_unit(rng, 8);
            d.end = 1;
            db.push_back(d.vector);
            owners.push_back(s.individual_id);
            s.items.push_back(std::move(d));
        }
        sets.push_back(std::move(s));
    }
    const NnIndex idx = NnIndex::build(sets, {10, 8, 3});

    std::vector<Descriptor> query_descs;
    std::vector<Eigen::VectorXd> query_vecs;
    for (int j = 0; j < 12; ++j) {
        Descriptor d;
        d.vector = random_unit(rng, 8);
        d.end = 1;
        query_vecs.push_back(d.vector);
        query_descs.push_back(std::move(d));
    }

    for (const int k : {1, 3, 5}) {
        const ScoreTable got = lnbnn_scores(query_descs, idx, k, true);
        const auto expected = oracle_scores(query_vecs, db, owners, k);
        REQUIRE(got.scores.size() == expected.size());
        for (const auto& [ind, score] : expected) {
            REQUIRE(got.scores.count(ind) == 1);
            CHECK(got.scores.at(ind) == score);  // bit-exact
        }
    }
}

TEST_CASE("stacking encounter images sums their score tables") {
    std::mt19937_64 rng(109);
    std::vector<DescriptorSet> sets;
    for (int ind = 0; ind < 4; ++ind) {
        DescriptorSet s;
        s.individual_id = "ind" + std::to_string(ind);
        for (int j = 0; j < 6; ++j) {
            Descriptor d;
            d.vector = random_unit(rng, 6);
            d.end = 1;
            s.items.push_back(std::move(d));
        }
        sets.push_back(std::move(s));
    }
    const NnIndex idx = NnIndex::build(sets, {8, 4, 5});

    DescriptorSet img1 = set_of("q", {});
    DescriptorSet img2 = set_of("q", {});
    img2.image_id = "i1";
    for (int j = 0; j < 5; ++j) {
        Descriptor d;
        d.vector = random_unit(rng, 6);
        d.end = 1;
        (j < 3 ? img1 : img2).items.push_back(std::move(d));
    }

    const ScoreTable stacked = lnbnn_scores([&] {
        std::vector<Descriptor> all = img1.items;
        all.insert(all.end(), img2.items.begin(), img2.items.end());
        return all;
    }(), idx, 2, true);
    const ScoreTable t1 = lnbnn_scores(img1.items, idx, 2, true);
    const ScoreTable t2 = lnbnn_scores(img2.items, idx, 2, true);

    std::map<std::string, double> summed = t1.scores;
    for (const auto& [ind, sc] : t2.scores) summed[ind] += sc;
    REQUIRE(stacked.scores.size() == summed.size());
    for (const auto& [ind, sc] : summed)
        CHECK(stacked.scores.at(ind) == doctest::Approx(sc).epsilon(1e-12));
}

TEST_CASE("sentinel-only images do not change the encounter query") {
    std::mt19937_64 rng(113);
    std::vector<DescriptorSet> sets{set_of("a", {{0.3, 0.4}}), set_of("b", {{0.9, 0.1}})};
    const NnIndex idx = NnIndex::build(sets, {4, 4, 2});

    DescriptorSet real = set_of("q", {{0.31, 0.41}});
    DescriptorSet empty = set_of("q", {});
    empty.image_id = "i1";
    Descriptor sentinel;
    sentinel.vector = Eigen::VectorXd::Zero(2);
    sentinel.indexable = false;
    sentinel.end = 1;
    empty.items.push_back(sentinel);

    const RankedList with_empty = encounter_query_lnbnn({real, empty}, idx, 1, true);
    const RankedList alone = encounter_query_lnbnn({real}, idx, 1, true);
    REQUIRE(with_empty.entries.size() == alone.entries.size());
    for (std::size_t i = 0; i < alone.entries.size(); ++i) {
        CHECK(with_empty.entries[i].first == alone.entries[i].first);
        CHECK(with_empty.entries[i].second == alone.entries[i].second);
    }
}

TEST_CASE("an encounter with no indexable descriptors is rejected") {
    const NnIndex idx = NnIndex::build({set_of("a", {{0.5, 0.5}})}, {4, 4, 2});
    DescriptorSet empty = set_of("q", {});
    CHECK_THROWS_AS(encounter_query_lnbnn({empty}, idx, 1, true), EmptyInputError);
}

TEST_CASE("adding an identical database descriptor never worsens the match rank") {
    std::mt19937_64 rng(127);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<DescriptorSet> sets;
        for (int ind = 0; ind < 4; ++ind) {
            DescriptorSet s;
            s.individual_id = "ind" + std::to_string(ind);
            for (int j = 0; j < 4; ++j) {
                Descriptor d;
                d.vector = random_unit(rng, 5);
                d.end = 1;
                s.items.push_back(std::move(d));
            }
            sets.push_back(std::move(s));
        }
        DescriptorSet q = set_of("q", {});
        Descriptor qd;
        qd.vector = random_unit(rng, 5);
        qd.end = 1;
        q.items.push_back(qd);

        const NnIndex before = NnIndex::build(sets, {4, 4, 9});
        const RankedList r_before = encounter_query_lnbnn({q}, before, 2, true);

        Descriptor clone = qd;
        sets[2].items.push_back(clone);  // "ind2" now holds an exact copy
        const NnIndex after = NnIndex::build(sets, {4, 4, 9});
        const RankedList r_after = encounter_query_lnbnn({q}, after, 2, true);

        auto rank_of = [](const RankedList& r, const std::string& ind) {
            for (std::size_t i = 0; i < r.entries.size(); ++i)
                if (r.entries[i].first == ind) return i;
            return r.entries.size();
        };
        CHECK(rank_of(r_after, "ind2") <= rank_of(r_before, "ind2"));
    }
}

TEST_CASE("k larger than the index truncates with a flag") {
    const NnIndex idx =
        NnIndex::build({set_of("a", {{0.0, 0.0}}), set_of("b", {{1.0, 1.0}})}, {2, 4, 1});
    const ScoreTable t = lnbnn_scores({desc_of({0.1, 0.1})}, idx, 5, true);
    CHECK(t.truncated);
    CHECK(t.effective_k == 1);

    const NnIndex solo = NnIndex::build({set_of("a", {{0.0, 0.0}})}, {2, 4, 1});
    const ScoreTable t1 = lnbnn_scores({desc_of({0.1, 0.1})}, solo, 5, true);
    CHECK(t1.effective_k == 0);
    CHECK(t1.scores.empty());  // no increments possible
}

TEST_CASE("forest queries are deterministic for a fixed seed") {
    std::mt19937_64 rng(131);
    std::vector<DescriptorSet> sets;
    for (int ind = 0; ind < 6; ++ind) {
        DescriptorSet s;
        s.individual_id = "ind" + std::to_string(ind);
        for (int j = 0; j < 30; ++j) {
            Descriptor d;
            d.vector = random_unit(rng, 8);
            d.end = 1;
            s.items.push_back(std::move(d));
        }
        sets.push_back(std::move(s));
    }
    const NnIndex a = NnIndex::build(sets, {12, 8, 77});
    const NnIndex b = NnIndex::build(sets, {12, 8, 77});

    std::vector<Descriptor> query;
    for (int j = 0; j < 10; ++j) {
        Descriptor d;
        d.vector = random_unit(rng, 8);
        d.end = 1;
        query.push_back(std::move(d));
    }
    const ScoreTable ta = lnbnn_scores(query, a, 3, false);
    const ScoreTable tb = lnbnn_scores(query, b, 3, false);
    REQUIRE(ta.scores.size() == tb.scores.size());
    for (const auto& [ind, sc] : ta.scores) CHECK(tb.scores.at(ind) == sc);
}

TEST_CASE("a saved and reloaded index answers queries identically") {
    std::mt19937_64 rng(137);
    std::vector<DescriptorSet> sets;
    for (int ind = 0; ind < 5; ++ind) {
        DescriptorSet s;
        s.individual_id = "ind" + std::to_string(ind);
        for (int j = 0; j < 25; ++j) {
            Descriptor d;
            d.vector = random_unit(rng, 12);
            d.end = 1;
            s.items.push_back(std::move(d));
        }
        sets.push_back(std::move(s));
    }
    const NnIndex idx = NnIndex::build(sets, {10, 8, 21});
    std::ostringstream out;
    idx.save(out);
    std::istringstream in(out.str());
    const NnIndex back = NnIndex::load(in);

    CHECK(back.size() == idx.size());
    CHECK(back.dim() == idx.dim());
    CHECK(back.tree_count() == idx.tree_count());
    for (int p = 0; p < 20; ++p) {
        const Eigen::VectorXd q = random_unit(rng, 12);
        for (const bool exact : {true, false}) {
            const auto r1 = idx.nearest(q, 4, exact);
            const auto r2 = back.nearest(q, 4, exact);
            REQUIRE(r1.size() == r2.size());
            for (std::size_t i = 0; i < r1.size(); ++i) {
                CHECK(r1[i].item == r2[i].item);
                CHECK(r1[i].distance == r2[i].distance);
            }
        }
    }
}
