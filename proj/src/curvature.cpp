#include "finrank/curvature.hpp"

#include <algorithm>
#include <cmath>

namespace finrank {

ScaleSet::ScaleSet(std::vector<double> scales, Axis ax) : relative_scales(std::move(scales)), axis(ax) {
    if (relative_scales.empty()) throw DomainError("scale set must be nonempty");
    double prev = 0.0;
    for (double s : relative_scales) {
        if (!(s > prev) || s > 1.0)
            throw DomainError("relative scales must be strictly increasing and in (0, 1]");
        prev = s;
    }
}

namespace {

// Unit direction that orients the run horizontally. Falls back to the run's
// principal axis when the endpoints coincide (closed loop inside the circle).
Eigen::Vector2d chord_direction(const PointList& pts, Eigen::Index lo, Eigen::Index hi) {
    Eigen::Vector2d d = (pts.row(hi) - pts.row(lo)).transpose();
    double len = std::hypot(d.x(), d.y());
    if (len > 0.0) return {d.x() / len, d.y() / len};

    const Eigen::Index n = hi - lo + 1;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (Eigen::Index k = lo; k <= hi; ++k) mean += pts.row(k).transpose();
    mean /= static_cast<double>(n);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (Eigen::Index k = lo; k <= hi; ++k) {
        Eigen::Vector2d q = pts.row(k).transpose() - mean;
        cov += q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    Eigen::Vector2d axis = es.eigenvectors().col(1);  // largest eigenvalue
    if (axis.y() < 0.0 || (axis.y() == 0.0 && axis.x() < 0.0)) axis = -axis;
    double len2 = axis.norm();
    return len2 > 0.0 ? Eigen::Vector2d(axis / len2) : Eigen::Vector2d(1.0, 0.0);
}

}  // namespace

double integral_curvature_at(const Contour& c, Eigen::Index i, double r) {
    const PointList& pts = c.points;
    const Eigen::Index n = pts.rows();
    if (i < 0 || i >= n) throw DomainError("point index out of range");
    if (!(r > 0.0)) throw DomainError("radius must be positive");

    const double r2 = r * r;
    const Eigen::Vector2d center = pts.row(i).transpose();
    auto inside = [&](Eigen::Index k) {
        const double dx = pts(k, 0) - center.x();
        const double dy = pts(k, 1) - center.y();
        return dx * dx + dy * dy <= r2;
    };

    Eigen::Index lo = i, hi = i;
    while (lo > 0 && inside(lo - 1)) --lo;
    while (hi + 1 < n && inside(hi + 1)) ++hi;
    if (hi - lo + 1 < 2) return 0.5;  // no shape evidence, treat as straight

    const Eigen::Vector2d dir = chord_direction(pts, lo, hi);
    const double cs = dir.x(), sn = dir.y();

    // Rotated-by-(-theta) coordinates relative to the square center, clipped.
    auto transformed = [&](Eigen::Index k) {
        const double px = pts(k, 0) - center.x();
        const double py = pts(k, 1) - center.y();
        double x = cs * px + sn * py;
        double y = -sn * px + cs * py;
        x = std::clamp(x, -r, r);
        y = std::clamp(y, -r, r);
        return Eigen::Vector2d(x, y + r);  // y measured from the square's bottom side
    };

    Eigen::Vector2d prev = transformed(lo);
    const double h_first = prev.y();
    double area = (prev.x() - (-r)) * h_first;  // left closure at endpoint height
    for (Eigen::Index k = lo + 1; k <= hi; ++k) {
        const Eigen::Vector2d cur = transformed(k);
        area += (cur.x() - prev.x()) * 0.5 * (prev.y() + cur.y());
        prev = cur;
    }
    area += (r - prev.x()) * prev.y();  // right closure

    const double square = 4.0 * r2;
    area = std::clamp(area, 0.0, square);
    return area / square;
}

CurvatureMatrix curvature_matrix_with_radii(const Contour& c, const std::vector<double>& radii_px,
                                            const ScaleSet& scales) {
    if (radii_px.size() != scales.count())
        throw DimensionError("radius count does not match scale count");
    const Eigen::Index n = c.points.rows();
    if (n < 2) throw DegenerateContourError("contour has fewer than 2 points");

    CurvatureMatrix out;
    out.scales = scales;
    out.values.resize(static_cast<Eigen::Index>(radii_px.size()), n);
    for (std::size_t k = 0; k < radii_px.size(); ++k)
        for (Eigen::Index j = 0; j < n; ++j)
            out.values(static_cast<Eigen::Index>(k), j) = integral_curvature_at(c, j, radii_px[k]);
    return out;
}

CurvatureMatrix curvature_matrix(const Contour& c, const ScaleSet& scales) {
    const double extent = normalized_extent(c, scales.axis);
    std::vector<double> radii;
    radii.reserve(scales.count());
    for (double s : scales.relative_scales) radii.push_back(s * extent);
    return curvature_matrix_with_radii(c, radii, scales);
}

CurvatureMatrix resample_curvature(const CurvatureMatrix& C, Eigen::Index n_out) {
    if (n_out < 2) throw DomainError("resample count must be at least 2");
    const Eigen::Index n = C.values.cols();
    if (n < 1) throw DimensionError("curvature matrix has no columns");
    if (n_out == n) return C;

    CurvatureMatrix out;
    out.scales = C.scales;
    out.values.resize(C.values.rows(), n_out);
    for (Eigen::Index k = 0; k < n_out; ++k) {
        const double t = static_cast<double>(k) * static_cast<double>(n - 1) /
                         static_cast<double>(n_out - 1);
        const Eigen::Index j0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(t), n - 2);
        const double frac = t - static_cast<double>(j0);
        out.values.col(k) = (1.0 - frac) * C.values.col(j0) + frac * C.values.col(j0 + 1);
    }
    return out;
}

HocsFeature hocs_feature(const CurvatureMatrix& C, int bins) {
    if (bins < 2) throw DomainError("histogram needs at least 2 bins");
    const Eigen::Index m = C.values.rows();
    const Eigen::Index n = C.values.cols();
    if (n == 0) throw DimensionError("curvature matrix has no columns");

    HocsFeature f;
    f.histograms = Eigen::MatrixXd::Zero(m, bins);
    for (Eigen::Index s = 0; s < m; ++s) {
        for (Eigen::Index j = 0; j < n; ++j) {
            int b = static_cast<int>(C.values(s, j) * bins);
            b = std::clamp(b, 0, bins - 1);  // value 1.0 falls in the closed last bin
            f.histograms(s, b) += 1.0;
        }
        f.histograms.row(s) /= static_cast<double>(n);
    }
    return f;
}

double hocs_intersection(const HocsFeature& a, const HocsFeature& b) {
    if (a.histograms.rows() != b.histograms.rows() || a.histograms.cols() != b.histograms.cols())
        throw DimensionError("histogram shapes differ");
    return a.histograms.cwiseMin(b.histograms).sum();
}

}  // namespace finrank
