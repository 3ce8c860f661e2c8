#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>

#include "finrank/errors.hpp"

namespace finrank {

// Bernstein basis polynomial C(n_deg, i) * x^i * (1-x)^(n_deg-i).
// Throws DomainError for x outside [0, 1].
double bernstein_basis(int i, int n_deg, double x);

// Evaluates the Bernstein combination determined by `coefficients` at
// n_points uniformly spaced abscissae spanning [0, 1] inclusive, via
// De Casteljau's scheme. All-ones coefficients give an all-ones vector exactly.
Eigen::VectorXd evaluate_weights(const Eigen::VectorXd& coefficients, Eigen::Index n_points);

// Spatial weight vector as the Bernstein coefficients that generate it. The
// evaluated form is always recomputed from the coefficients.
struct SpatialWeights {
    Eigen::VectorXd coefficients;  // degree + 1 entries

    int degree() const { return static_cast<int>(coefficients.size()) - 1; }
    Eigen::VectorXd evaluated(Eigen::Index n_points) const {
        return evaluate_weights(coefficients, n_points);
    }

    static SpatialWeights uniform(int degree);
};

void save_weights(const SpatialWeights& w, Eigen::Index n_points, std::ostream& out);
SpatialWeights load_weights(std::istream& in);

}  // namespace finrank
