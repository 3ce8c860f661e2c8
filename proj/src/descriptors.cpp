#include "finrank/descriptors.hpp"

#include <algorithm>
#include <cmath>

namespace finrank {

KeypointSet extract_keypoints(const CurvatureMatrix& C, int n_kp) {
    const Eigen::Index n = C.values.cols();
    if (n < 3) throw DomainError("keypoint extraction needs at least 3 columns");
    if (n_kp < 3) throw DomainError("keypoint count must be at least 3");

    KeypointSet out;
    out.per_scale.reserve(static_cast<std::size_t>(C.values.rows()));
    for (Eigen::Index s = 0; s < C.values.rows(); ++s) {
        const auto row = C.values.row(s);

        // Interior extrema of either polarity; a plateau is represented by its
        // leftmost index and compared against the values beyond the plateau.
        std::vector<std::pair<double, Eigen::Index>> extrema;  // (|v - 0.5|, index)
        Eigen::Index j = 1;
        while (j < n - 1) {
            Eigen::Index end = j;
            while (end + 1 < n && row[end + 1] == row[j]) ++end;
            if (end >= n - 1) break;  // plateau touches the boundary
            const double left = row[j - 1], v = row[j], right = row[end + 1];
            if ((v > left && v > right) || (v < left && v < right))
                extrema.emplace_back(std::abs(v - 0.5), j);
            j = end + 1;
        }

        std::stable_sort(extrema.begin(), extrema.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        const std::size_t keep = std::min<std::size_t>(extrema.size(),
                                                       static_cast<std::size_t>(n_kp - 2));
        std::vector<Eigen::Index> idx;
        idx.reserve(keep + 2);
        idx.push_back(0);
        for (std::size_t t = 0; t < keep; ++t) idx.push_back(extrema[t].second);
        idx.push_back(n - 1);
        std::sort(idx.begin(), idx.end());
        out.per_scale.push_back(std::move(idx));
    }
    return out;
}

namespace {

Eigen::VectorXd resample_slice(const Eigen::VectorXd& row, Eigen::Index a, Eigen::Index b, int dim) {
    Eigen::VectorXd v(dim);
    const double span = static_cast<double>(b - a);
    for (int k = 0; k < dim; ++k) {
        const double t = static_cast<double>(a) + span * static_cast<double>(k) /
                                                      static_cast<double>(dim - 1);
        const Eigen::Index j0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(t), b - 1);
        const double frac = t - static_cast<double>(j0);
        v[k] = (1.0 - frac) * row[j0] + frac * row[j0 + 1];
    }
    return v;
}

}  // namespace

std::vector<Descriptor> extract_descriptors(const CurvatureMatrix& C, const KeypointSet& kp,
                                            int dim) {
    if (dim < 2) throw DomainError("descriptor dimension must be at least 2");
    if (kp.per_scale.size() != static_cast<std::size_t>(C.values.rows()))
        throw DimensionError("keypoint set scale count does not match curvature matrix");

    std::vector<Descriptor> out;
    for (Eigen::Index s = 0; s < C.values.rows(); ++s) {
        const Eigen::VectorXd row = C.values.row(s).transpose();
        const auto& idx = kp.per_scale[static_cast<std::size_t>(s)];
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = a + 1; b < idx.size(); ++b) {
                Descriptor d;
                d.scale = static_cast<int>(s);
                d.start = idx[a];
                d.end = idx[b];
                d.vector = resample_slice(row, idx[a], idx[b], dim);
                const double norm = d.vector.norm();
                if (norm > 0.0) {
                    d.vector /= norm;
                } else {
                    d.indexable = false;
                }
                out.push_back(std::move(d));
            }
        }
    }
    return out;
}

}  // namespace finrank
