#include "finrank/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "finrank/parallel.hpp"

namespace finrank {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

// Query and database curvature matrices, fixed for the whole search; only the
// weight vector changes between objective evaluations.
struct PreparedSplit {
    std::vector<std::vector<const CurvatureMatrix*>> query_mats;  // per query unit
    std::vector<std::vector<const CurvatureMatrix*>> db_mats;     // per individual, id order
    std::vector<std::string> db_individuals;
    DtwArtifacts db_art, q_art;
};

PreparedSplit prepare(const Split& split, const PipelineConfig& cfg) {
    PreparedSplit prep;
    prep.db_art = compute_dtw_artifacts(split.database, cfg);
    prep.q_art = compute_dtw_artifacts(split.query_data, cfg);

    for (const auto& [ind, encs] : split.database.individuals()) {
        prep.db_individuals.push_back(ind);
        auto& mats = prep.db_mats.emplace_back();
        for (const auto& [enc, imgs] : encs)
            for (const auto& [img, c] : imgs) mats.push_back(&prep.db_art.by_image.at(image_key(c)));
    }
    for (const QueryUnit& q : split.queries) {
        auto& mats = prep.query_mats.emplace_back();
        for (const auto& [img, c] : split.query_data.images_of(q.individual, q.encounter))
            mats.push_back(&prep.q_art.by_image.at(image_key(c)));
    }
    return prep;
}

// Top-k accuracy of the weighted DTW ranker over the prepared split.
double objective(const PreparedSplit& prep, const Split& split, const PipelineConfig& cfg,
                 const Eigen::VectorXd& coeffs, int k) {
    AlignmentConfig align = cfg.align;
    align.weights = evaluate_weights(coeffs, align.resample_to);

    std::vector<int> hits(split.queries.size(), 0);
    parallel_for(split.queries.size(), cfg.jobs, [&](std::size_t qi) {
        const std::string& truth = split.queries[qi].individual;
        double truth_cost = std::numeric_limits<double>::infinity();
        std::size_t better = 0;  // individuals strictly better than the truth
        std::size_t tied_before = 0;

        std::vector<double> costs(prep.db_mats.size());
        for (std::size_t d = 0; d < prep.db_mats.size(); ++d)
            costs[d] = encounter_score_dtw(prep.query_mats[qi], prep.db_mats[d], align);
        for (std::size_t d = 0; d < prep.db_mats.size(); ++d)
            if (prep.db_individuals[d] == truth) truth_cost = costs[d];
        for (std::size_t d = 0; d < prep.db_mats.size(); ++d) {
            if (prep.db_individuals[d] == truth) continue;
            if (costs[d] < truth_cost) ++better;
            else if (costs[d] == truth_cost && prep.db_individuals[d] < truth) ++tied_before;
        }
        if (better + tied_before < static_cast<std::size_t>(k)) hits[qi] = 1;
    });
    double total = 0.0;
    for (int h : hits) total += h;
    return total / static_cast<double>(split.queries.size());
}

}  // namespace

LearnOutcome learn_weights(const Split& split, const PipelineConfig& dtw_cfg,
                           const LearnConfig& cfg) {
    if (split.queries.empty()) throw EmptyInputError("training split has no queries");
    if (cfg.budget < 1) throw DomainError("budget must be at least 1");
    if (cfg.degree < 0) throw DomainError("degree must be non-negative");
    if (!(cfg.coeff_lo <= 1.0 && 1.0 <= cfg.coeff_hi))
        throw DomainError("coefficient box must contain 1 so the start is feasible");
    for (const QueryUnit& q : split.queries)
        if (!split.database.individuals().count(q.individual))
            throw InconsistencyError("query individual '" + q.individual +
                                     "' missing from the training database");

    const PreparedSplit prep = prepare(split, dtw_cfg);
    const Eigen::Index dim = cfg.degree + 1;

    int evals = 0;
    Eigen::VectorXd best_c;
    double best_obj = -1.0;
    double best_dist = 0.0;  // distance to the uniform vector, for tie-breaks

    auto consider = [&](const Eigen::VectorXd& c) {
        const double obj = objective(prep, split, dtw_cfg, c, cfg.k_objective);
        ++evals;
        const double dist = (c - Eigen::VectorXd::Ones(dim)).norm();
        if (obj > best_obj || (obj == best_obj && dist < best_dist)) {
            best_obj = obj;
            best_c = c;
            best_dist = dist;
        }
        return obj;
    };

    const double baseline = consider(Eigen::VectorXd::Ones(dim));

    std::mt19937_64 rng(cfg.seed);
    const int random_phase = cfg.budget / 2;
    while (evals < random_phase) {
        Eigen::VectorXd c(dim);
        for (Eigen::Index i = 0; i < dim; ++i) c[i] = uniform(rng, cfg.coeff_lo, cfg.coeff_hi);
        consider(c);
    }

    // Coordinate-wise refinement around the incumbent with a shrinking step.
    double step = 0.25 * (cfg.coeff_hi - cfg.coeff_lo);
    while (evals < cfg.budget && step > 1e-3) {
        bool improved = false;
        for (Eigen::Index i = 0; i < dim && evals < cfg.budget; ++i) {
            for (double dir : {+1.0, -1.0}) {
                if (evals >= cfg.budget) break;
                Eigen::VectorXd c = best_c;
                c[i] = std::clamp(c[i] + dir * step, cfg.coeff_lo, cfg.coeff_hi);
                if (c[i] == best_c[i]) continue;
                const double before = best_obj;
                consider(c);
                if (best_obj > before) {
                    improved = true;
                    break;  // incumbent moved, restart this coordinate pass from it
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    LearnOutcome out;
    out.weights.coefficients = best_c;
    out.baseline_objective = baseline;
    out.learned_objective = best_obj;
    out.evaluations = evals;
    return out;
}

}  // namespace finrank
