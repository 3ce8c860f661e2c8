#include "finrank/dtw.hpp"

#include <algorithm>
#include <cmath>

namespace finrank {

double point_distance(const Eigen::VectorXd& ci, const Eigen::VectorXd& cj, double wi, double wj) {
    if (ci.size() != cj.size()) throw DimensionError("curvature columns have different scale counts");
    return wi * wj * (ci - cj).norm();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd prepared(const CurvatureMatrix& m, Eigen::Index n) {
    if (m.values.cols() == n) return m.values;
    return resample_curvature(m, n).values;
}

}  // namespace

AlignmentResult align(const CurvatureMatrix& a, const CurvatureMatrix& b,
                      const AlignmentConfig& cfg) {
    if (a.values.rows() != b.values.rows())
        throw DimensionError("curvature matrices have different scale counts");
    if (cfg.band < 0) throw DomainError("band must be non-negative");
    if (cfg.resample_to < 2) throw DomainError("resample_to must be at least 2");

    const Eigen::Index n = cfg.resample_to;
    const Eigen::MatrixXd A = prepared(a, n);
    const Eigen::MatrixXd B = prepared(b, n);

    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    if (cfg.weights) {
        if (cfg.weights->size() != n)
            throw DimensionError("weight vector length does not match resample_to");
        w = *cfg.weights;
    }

    const Eigen::Index band = std::min<Eigen::Index>(cfg.band, n);
    auto in_band = [&](Eigen::Index i, Eigen::Index j) { return std::abs(i - j) <= band; };
    auto dist = [&](Eigen::Index i, Eigen::Index j) {
        return w[i] * w[j] * (A.col(i) - B.col(j)).norm();
    };

    AlignmentResult out;
    if (!cfg.want_path) {
        // Two rolling rows over the banded window.
        Eigen::VectorXd prev = Eigen::VectorXd::Constant(n, kInf);
        Eigen::VectorXd cur = Eigen::VectorXd::Constant(n, kInf);
        for (Eigen::Index i = 0; i < n; ++i) {
            cur.setConstant(kInf);
            const Eigen::Index j0 = std::max<Eigen::Index>(0, i - band);
            const Eigen::Index j1 = std::min<Eigen::Index>(n - 1, i + band);
            for (Eigen::Index j = j0; j <= j1; ++j) {
                double best;
                if (i == 0 && j == 0) {
                    best = 0.0;
                } else {
                    best = kInf;
                    if (j > 0) best = std::min(best, cur[j - 1]);
                    if (i > 0) best = std::min(best, prev[j]);
                    if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
                }
                cur[j] = dist(i, j) + best;
            }
            std::swap(prev, cur);
        }
        out.cost = prev[n - 1];
        return out;
    }

    // Full table for path reconstruction.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n, n, kInf);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j0 = std::max<Eigen::Index>(0, i - band);
        const Eigen::Index j1 = std::min<Eigen::Index>(n - 1, i + band);
        for (Eigen::Index j = j0; j <= j1; ++j) {
            double best = kInf;
            if (i == 0 && j == 0)
                best = 0.0;
            else {
                if (j > 0 && in_band(i, j - 1)) best = std::min(best, acc(i, j - 1));
                if (i > 0 && in_band(i - 1, j)) best = std::min(best, acc(i - 1, j));
                if (i > 0 && j > 0) best = std::min(best, acc(i - 1, j - 1));
            }
            acc(i, j) = dist(i, j) + best;
        }
    }
    out.cost = acc(n - 1, n - 1);

    Eigen::Index i = n - 1, j = n - 1;
    out.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        double diag = (i > 0 && j > 0) ? acc(i - 1, j - 1) : kInf;
        double up = i > 0 ? acc(i - 1, j) : kInf;
        double left = j > 0 ? acc(i, j - 1) : kInf;
        if (diag <= up && diag <= left) {
            --i;
            --j;
        } else if (up <= left) {
            --i;
        } else {
            --j;
        }
        out.path.emplace_back(i, j);
    }
    std::reverse(out.path.begin(), out.path.end());
    return out;
}

double encounter_score_dtw(const std::vector<const CurvatureMatrix*>& query_images,
                           const std::vector<const CurvatureMatrix*>& db_images,
                           const AlignmentConfig& cfg) {
    if (query_images.empty() || db_images.empty())
        throw EmptyInputError("encounter score needs at least one image on each side");
    double best = kInf;
    for (const CurvatureMatrix* q : query_images)
        for (const CurvatureMatrix* d : db_images) best = std::min(best, align(*q, *d, cfg).cost);
    return best;
}

}  // namespace finrank
