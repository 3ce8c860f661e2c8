#include <doctest.h>

#include "finrank/learn.hpp"
#include "finrank/synthgen.hpp"

using namespace finrank;

namespace {

Split tiny_split(std::uint64_t seed) {
    BenchmarkConfig bench;
    bench.individuals = 5;
    bench.notches = 2;
    bench.encounters = 2;
    bench.images = 1;
    bench.distortion = DistortionConfig{};
    bench.seed = seed;
    return make_split(generate_benchmark(bench), 1, seed + 1);
}

PipelineConfig tiny_dtw() {
    PipelineConfig cfg;
    cfg.scales = ScaleSet({0.04, 0.08}, Axis::Height);
    cfg.contour_resample = 256;
    cfg.align.resample_to = 32;
    cfg.align.band = 4;
    return cfg;
}

}  // namespace

TEST_CASE("budget one returns the uniform start with its baseline score") {
    const Split split = tiny_split(3);
    LearnConfig cfg;
    cfg.budget = 1;
    cfg.degree = 10;
    const LearnOutcome out = learn_weights(split, tiny_dtw(), cfg);
    CHECK(out.evaluations == 1);
    CHECK(out.weights.coefficients == Eigen::VectorXd::Ones(11));
    CHECK(out.learned_objective == out.baseline_objective);
}

TEST_CASE("equal objectives keep the candidate closest to uniform") {
    // identical renders: every candidate scores a perfect objective, so the
    // all-ones start must survive the whole search
    const Split split = tiny_split(5);
    LearnConfig cfg;
    cfg.budget = 12;
    cfg.seed = 9;
    const LearnOutcome out = learn_weights(split, tiny_dtw(), cfg);
    CHECK(out.baseline_objective == 1.0);
    CHECK(out.weights.coefficients == Eigen::VectorXd::Ones(11));
}

TEST_CASE("the learned objective never drops below the baseline") {
    const Split split = tiny_split(7);
    LearnConfig cfg;
    cfg.budget = 8;
    cfg.seed = 4;
    const LearnOutcome out = learn_weights(split, tiny_dtw(), cfg);
    CHECK(out.learned_objective >= out.baseline_objective);
}

TEST_CASE("learning is deterministic for a fixed seed and budget") {
    const Split split = tiny_split(11);
    LearnConfig cfg;
    cfg.budget = 10;
    cfg.seed = 21;
    const LearnOutcome a = learn_weights(split, tiny_dtw(), cfg);
    const LearnOutcome b = learn_weights(split, tiny_dtw(), cfg);
    CHECK(a.weights.coefficients == b.weights.coefficients);
    CHECK(a.learned_objective == b.learned_objective);
}

TEST_CASE("queries outside the training database are rejected") {
    Split split = tiny_split(13);
    split.queries.push_back({"ghost", "e9"});
    LearnConfig cfg;
    cfg.budget = 1;
    CHECK_THROWS_AS(learn_weights(split, tiny_dtw(), cfg), InconsistencyError);
}
