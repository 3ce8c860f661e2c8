#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "finrank/weights.hpp"

using namespace finrank;

TEST_CASE("bernstein basis endpoints and midpoint values") {
    CHECK(bernstein_basis(0, 0, 0.0) == 1.0);
    CHECK(bernstein_basis(0, 7, 0.0) == 1.0);
    CHECK(bernstein_basis(7, 7, 1.0) == 1.0);
    CHECK(bernstein_basis(0, 2, 0.5) == doctest::Approx(0.25));
    CHECK(bernstein_basis(1, 2, 0.5) == doctest::Approx(0.5));
    CHECK(bernstein_basis(2, 2, 0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(bernstein_basis(0, 3, -0.1), DomainError);
    CHECK_THROWS_AS(bernstein_basis(0, 3, 1.1), DomainError);
    CHECK_THROWS_AS(bernstein_basis(4, 3, 0.5), DomainError);
}

TEST_CASE("bernstein basis forms a partition of unity") {
    std::mt19937_64 rng(61);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 100; ++trial) {
        const double x = u();
        const int deg = static_cast<int>(rng() % 31);
        double sum = 0.0;
        for (int i = 0; i <= deg; ++i) sum += bernstein_basis(i, deg, x);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("all-ones coefficients evaluate to exactly uniform weights") {
    for (const Eigen::Index n : {2, 3, 17, 128, 1024}) {
        const Eigen::VectorXd w = evaluate_weights(Eigen::VectorXd::Ones(11), n);
        REQUIRE(w.size() == n);
        for (Eigen::Index i = 0; i < n; ++i) CHECK(w[i] == 1.0);
    }
}

TEST_CASE("a lone leading coefficient evaluates to the first basis polynomial") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(11);
    c[0] = 1.0;
    const Eigen::VectorXd w = evaluate_weights(c, 3);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == std::pow(0.5, 10));
    CHECK(w[2] == 0.0);
}

TEST_CASE("weight evaluation is linear in the coefficients") {
    std::mt19937_64 rng(67);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Eigen::VectorXd c(11);
    for (Eigen::Index i = 0; i < 11; ++i) c[i] = u() * 2.0;
    const double alpha = 3.0;
    const Eigen::VectorXd w = evaluate_weights(c, 64);
    const Eigen::VectorXd w_scaled = evaluate_weights(alpha * c, 64);
    CHECK((w_scaled - alpha * w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-negative coefficients give non-negative weights") {
    std::mt19937_64 rng(71);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 30; ++trial) {
        const int deg = 1 + static_cast<int>(rng() % 20);
        Eigen::VectorXd c(deg + 1);
        for (Eigen::Index i = 0; i <= deg; ++i) c[i] = u() * 5.0;
        const Eigen::VectorXd w = evaluate_weights(c, 50);
        CHECK(w.minCoeff() >= 0.0);
        CHECK(w.allFinite());
    }
}

TEST_CASE("evaluation agrees with the explicit basis expansion") {
    std::mt19937_64 rng(73);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Eigen::VectorXd c(9);
    for (Eigen::Index i = 0; i < 9; ++i) c[i] = u() * 2.0;
    const Eigen::Index n = 33;
    const Eigen::VectorXd w = evaluate_weights(c, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(n - 1);
        double expected = 0.0;
        for (int i = 0; i <= 8; ++i) expected += c[i] * bernstein_basis(i, 8, x);
        CHECK(w[k] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("weights files round-trip through json") {
    SpatialWeights w;
    w.coefficients.resize(4);
    w.coefficients << 1.0, 0.25, 1.75, 0.5;
    std::ostringstream out;
    save_weights(w, 128, out);
    std::istringstream in(out.str());
    const SpatialWeights back = load_weights(in);
    CHECK(back.degree() == 3);
    CHECK(back.coefficients == w.coefficients);
}
