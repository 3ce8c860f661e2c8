#include "finrank/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "finrank/parallel.hpp"

namespace finrank {

const char* to_string(MatcherKind kind) {
    switch (kind) {
        case MatcherKind::Dtw: return "dtw";
        case MatcherKind::Lnbnn: return "lnbnn";
        case MatcherKind::Hocs: return "hocs";
    }
    return "?";
}

MatcherKind matcher_from_string(const std::string& name) {
    if (name == "dtw") return MatcherKind::Dtw;
    if (name == "lnbnn") return MatcherKind::Lnbnn;
    if (name == "hocs") return MatcherKind::Hocs;
    throw DomainError("unknown matcher '" + name + "'");
}

PipelineConfig bottlenose_profile() { return PipelineConfig{}; }

PipelineConfig humpback_profile() {
    PipelineConfig cfg;
    cfg.scales = ScaleSet{{0.02, 0.04, 0.06, 0.08}, Axis::Width};
    cfg.align.resample_to = 748;
    cfg.align.band = 75;
    return cfg;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string config_hash(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << to_string(cfg.kind) << '|' << (cfg.scales.axis == Axis::Height ? 'h' : 'w');
    os.precision(17);
    for (double s : cfg.scales.relative_scales) os << ',' << s;
    os << '|' << cfg.contour_resample << '|' << cfg.align.band << '|' << cfg.align.resample_to;
    os << '|';
    if (cfg.align.weights)
        for (Eigen::Index i = 0; i < cfg.align.weights->size(); ++i)
            os << (*cfg.align.weights)[i] << ';';
    os << '|' << cfg.keypoints << '|' << cfg.descriptor_dim << '|' << cfg.lnbnn_k << '|'
       << cfg.trees << '|' << cfg.leaf_size << '|' << cfg.exact_search << '|' << cfg.search_budget
       << '|' << cfg.hocs_bins << '|' << cfg.seed;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

std::string image_key(const Contour& c) {
    return c.individual_id + '\x1f' + c.encounter_id + '\x1f' + c.image_id;
}

CurvatureMatrix dtw_matrix_for(const Contour& c, const PipelineConfig& cfg) {
    const Contour edge = resample_arclength(c, cfg.contour_resample);
    return resample_curvature(curvature_matrix(edge, cfg.scales), cfg.align.resample_to);
}

DescriptorSet descriptors_for(const Contour& c, const PipelineConfig& cfg) {
    const Contour edge = resample_arclength(c, cfg.contour_resample);
    const CurvatureMatrix m = curvature_matrix(edge, cfg.scales);
    const KeypointSet kp = extract_keypoints(m, cfg.keypoints);
    DescriptorSet set;
    set.items = extract_descriptors(m, kp, cfg.descriptor_dim);
    set.individual_id = c.individual_id;
    set.encounter_id = c.encounter_id;
    set.image_id = c.image_id;
    return set;
}

HocsFeature hocs_for(const Contour& c, const PipelineConfig& cfg) {
    const Contour edge = resample_arclength(c, cfg.contour_resample);
    return hocs_feature(curvature_matrix(edge, cfg.scales), cfg.hocs_bins);
}

DtwArtifacts compute_dtw_artifacts(const EncounterDatabase& db, const PipelineConfig& cfg) {
    const auto contours = db.all_contours();
    std::vector<CurvatureMatrix> mats(contours.size());
    parallel_for(contours.size(), cfg.jobs,
                 [&](std::size_t i) { mats[i] = dtw_matrix_for(*contours[i], cfg); });
    DtwArtifacts out;
    for (std::size_t i = 0; i < contours.size(); ++i)
        out.by_image.emplace(image_key(*contours[i]), std::move(mats[i]));
    return out;
}

std::vector<DescriptorSet> compute_descriptor_sets(const EncounterDatabase& db,
                                                   const PipelineConfig& cfg) {
    const auto contours = db.all_contours();
    std::vector<DescriptorSet> sets(contours.size());
    parallel_for(contours.size(), cfg.jobs,
                 [&](std::size_t i) { sets[i] = descriptors_for(*contours[i], cfg); });
    return sets;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated curvature artifact file");
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
    if (!in) throw IoError("truncated curvature artifact file");
    return s;
}

constexpr char kCurvMagic[8] = {'F', 'R', 'C', 'U', 'R', 'V', '0', '1'};

}  // namespace

void save_dtw_artifacts(const DtwArtifacts& a, std::ostream& out) {
    out.write(kCurvMagic, sizeof(kCurvMagic));
    write_pod<std::uint64_t>(out, a.by_image.size());
    for (const auto& [key, mat] : a.by_image) {
        write_string(out, key);
        write_pod<std::uint8_t>(out, mat.scales.axis == Axis::Height ? 0 : 1);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(mat.scales.count()));
        for (double s : mat.scales.relative_scales) write_pod<double>(out, s);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(mat.values.rows()));
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(mat.values.cols()));
        // row-major so the layout matches the documented format
        for (Eigen::Index r = 0; r < mat.values.rows(); ++r)
            for (Eigen::Index c = 0; c < mat.values.cols(); ++c) write_pod<double>(out, mat.values(r, c));
    }
    if (!out) throw IoError("failed to write curvature artifacts");
}

DtwArtifacts load_dtw_artifacts(std::istream& in) {
    char magic[sizeof(kCurvMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCurvMagic, sizeof(kCurvMagic)) != 0)
        throw IoError("not a curvature artifact file");
    DtwArtifacts out;
    const auto count = read_pod<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string key = read_string(in);
        CurvatureMatrix mat;
        const auto axis = read_pod<std::uint8_t>(in);
        const auto n_scales = read_pod<std::uint32_t>(in);
        std::vector<double> scales(n_scales);
        for (auto& s : scales) s = read_pod<double>(in);
        mat.scales = ScaleSet(std::move(scales), axis == 0 ? Axis::Height : Axis::Width);
        const auto rows = read_pod<std::uint32_t>(in);
        const auto cols = read_pod<std::uint32_t>(in);
        mat.values.resize(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r)
            for (std::uint32_t c = 0; c < cols; ++c) mat.values(r, c) = read_pod<double>(in);
        out.by_image.emplace(std::move(key), std::move(mat));
    }
    return out;
}

DtwArtifacts compute_hocs_artifacts(const EncounterDatabase& db, const PipelineConfig& cfg) {
    const auto contours = db.all_contours();
    std::vector<CurvatureMatrix> mats(contours.size());
    parallel_for(contours.size(), cfg.jobs, [&](std::size_t i) {
        const Contour edge = resample_arclength(*contours[i], cfg.contour_resample);
        mats[i] = curvature_matrix(edge, cfg.scales);
    });
    DtwArtifacts out;
    for (std::size_t i = 0; i < contours.size(); ++i)
        out.by_image.emplace(image_key(*contours[i]), std::move(mats[i]));
    return out;
}

namespace {

std::vector<const CurvatureMatrix*> encounter_matrices(const DtwArtifacts& art,
                                                       const EncounterDatabase& db,
                                                       const std::string& individual,
                                                       const std::string& encounter) {
    std::vector<const CurvatureMatrix*> out;
    for (const auto& [img, c] : db.images_of(individual, encounter))
        out.push_back(&art.by_image.at(image_key(c)));
    return out;
}

}  // namespace

std::vector<RankedList> rank_with_dtw_artifacts(const DtwArtifacts& db_art,
                                                const EncounterDatabase& database,
                                                const EncounterDatabase& query_data,
                                                const std::vector<QueryUnit>& queries,
                                                const PipelineConfig& cfg) {
    const DtwArtifacts q_art = compute_dtw_artifacts(query_data, cfg);

    // All images of one database individual, across its encounters.
    std::map<std::string, std::vector<const CurvatureMatrix*>> db_by_individual;
    for (const auto& [ind, encs] : database.individuals()) {
        auto& mats = db_by_individual[ind];
        for (const auto& [enc, imgs] : encs)
            for (const auto& [img, c] : imgs) mats.push_back(&db_art.by_image.at(image_key(c)));
    }

    std::vector<RankedList> out(queries.size());
    parallel_for(queries.size(), cfg.jobs, [&](std::size_t qi) {
        const QueryUnit& q = queries[qi];
        const auto q_mats = encounter_matrices(q_art, query_data, q.individual, q.encounter);
        RankedList ranked;
        ranked.query = q;
        ranked.entries.reserve(db_by_individual.size());
        for (const auto& [ind, mats] : db_by_individual)
            ranked.entries.emplace_back(ind, encounter_score_dtw(q_mats, mats, cfg.align));
        std::sort(ranked.entries.begin(), ranked.entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
        out[qi] = std::move(ranked);
    });
    return out;
}

std::vector<RankedList> rank_with_index(const NnIndex& index,
                                        const EncounterDatabase& query_data,
                                        const std::vector<QueryUnit>& queries,
                                        const PipelineConfig& cfg) {
    const std::vector<DescriptorSet> q_sets = compute_descriptor_sets(query_data, cfg);
    std::map<std::string, std::vector<const DescriptorSet*>> q_by_unit;
    for (const auto& set : q_sets)
        q_by_unit[set.individual_id + '\x1f' + set.encounter_id].push_back(&set);

    std::vector<RankedList> out(queries.size());
    parallel_for(queries.size(), cfg.jobs, [&](std::size_t qi) {
        const QueryUnit& q = queries[qi];
        auto it = q_by_unit.find(q.individual + '\x1f' + q.encounter);
        if (it == q_by_unit.end()) throw EmptyInputError("query encounter has no contours");
        std::vector<DescriptorSet> sets;
        for (const DescriptorSet* s : it->second) sets.push_back(*s);
        RankedList ranked =
            encounter_query_lnbnn(sets, index, cfg.lnbnn_k, cfg.exact_search, cfg.search_budget);
        ranked.query = q;
        out[qi] = std::move(ranked);
    });
    return out;
}

std::vector<RankedList> rank_with_hocs_artifacts(const DtwArtifacts& db_art,
                                                 const EncounterDatabase& database,
                                                 const EncounterDatabase& query_data,
                                                 const std::vector<QueryUnit>& queries,
                                                 const PipelineConfig& cfg) {
    auto features_of = [&](const DtwArtifacts& art) {
        std::map<std::string, HocsFeature> by_image;
        for (const auto& [key, mat] : art.by_image)
            by_image.emplace(key, hocs_feature(mat, cfg.hocs_bins));
        return by_image;
    };
    const auto db_feats = features_of(db_art);
    const auto q_feats = features_of(compute_hocs_artifacts(query_data, cfg));
    const double m = static_cast<double>(cfg.scales.count());

    std::vector<RankedList> out(queries.size());
    parallel_for(queries.size(), cfg.jobs, [&](std::size_t qi) {
        const QueryUnit& q = queries[qi];
        std::vector<const HocsFeature*> q_list;
        for (const auto& [img, c] : query_data.images_of(q.individual, q.encounter))
            q_list.push_back(&q_feats.at(image_key(c)));

        RankedList ranked;
        ranked.query = q;
        for (const auto& [ind, encs] : database.individuals()) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [enc, imgs] : encs)
                for (const auto& [img, c] : imgs) {
                    const HocsFeature& f = db_feats.at(image_key(c));
                    for (const HocsFeature* qf : q_list)
                        best = std::min(best, m - hocs_intersection(*qf, f));
                }
            ranked.entries.emplace_back(ind, best);
        }
        std::sort(ranked.entries.begin(), ranked.entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
        out[qi] = std::move(ranked);
    });
    return out;
}

std::vector<RankedList> rank_queries(const EncounterDatabase& database,
                                     const EncounterDatabase& query_data,
                                     const std::vector<QueryUnit>& queries,
                                     const PipelineConfig& cfg) {
    if (database.empty()) throw EmptyInputError("empty database");
    if (queries.empty()) throw EmptyInputError("no queries");
    switch (cfg.kind) {
        case MatcherKind::Dtw:
            return rank_with_dtw_artifacts(compute_dtw_artifacts(database, cfg), database,
                                           query_data, queries, cfg);
        case MatcherKind::Lnbnn: {
            const std::vector<DescriptorSet> db_sets = compute_descriptor_sets(database, cfg);
            const NnIndex index = NnIndex::build(db_sets, {cfg.trees, cfg.leaf_size, cfg.seed});
            return rank_with_index(index, query_data, queries, cfg);
        }
        case MatcherKind::Hocs:
            return rank_with_hocs_artifacts(compute_hocs_artifacts(database, cfg), database,
                                            query_data, queries, cfg);
    }
    throw DomainError("unknown matcher kind");
}

}  // namespace finrank
