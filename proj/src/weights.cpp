#include "finrank/weights.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <istream>
#include <ostream>

namespace finrank {

double bernstein_basis(int i, int n_deg, double x) {
    if (n_deg < 0 || i < 0 || i > n_deg) throw DomainError("basis index out of range");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("bernstein basis requires x in [0, 1]");
    // Binomial coefficient, exact in integer arithmetic for the degrees used here.
    unsigned long long binom = 1;
    const int kk = std::min(i, n_deg - i);
    for (int t = 1; t <= kk; ++t)
        binom = binom * static_cast<unsigned long long>(n_deg - kk + t) / static_cast<unsigned long long>(t);
    return static_cast<double>(binom) * std::pow(x, i) * std::pow(1.0 - x, n_deg - i);
}

Eigen::VectorXd evaluate_weights(const Eigen::VectorXd& coefficients, Eigen::Index n_points) {
    if (coefficients.size() < 1) throw DomainError("at least one coefficient required");
    if (n_points < 2) throw DomainError("at least two evaluation points required");

    Eigen::VectorXd out(n_points);
    Eigen::VectorXd work(coefficients.size());
    for (Eigen::Index k = 0; k < n_points; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(n_points - 1);
        work = coefficients;
        for (Eigen::Index level = work.size() - 1; level >= 1; --level)
            for (Eigen::Index j = 0; j < level; ++j)
                work[j] = (1.0 - x) * work[j] + x * work[j + 1];
        out[k] = work[0];
    }
    return out;
}

SpatialWeights SpatialWeights::uniform(int degree) {
    if (degree < 0) throw DomainError("degree must be non-negative");
    return SpatialWeights{Eigen::VectorXd::Ones(degree + 1)};
}

void save_weights(const SpatialWeights& w, Eigen::Index n_points, std::ostream& out) {
    nlohmann::json j;
    j["degree"] = w.degree();
    j["coefficients"] = std::vector<double>(w.coefficients.data(),
                                            w.coefficients.data() + w.coefficients.size());
    j["n_points"] = n_points;
    out << j.dump(2) << "\n";
}

SpatialWeights load_weights(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad weights file: ") + e.what());
    }
    auto coeffs = j.at("coefficients").get<std::vector<double>>();
    const int degree = j.at("degree").get<int>();
    if (static_cast<int>(coeffs.size()) != degree + 1)
        throw IoError("weights file degree does not match coefficient count");
    SpatialWeights w;
    w.coefficients = Eigen::Map<Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    return w;
}

}  // namespace finrank
