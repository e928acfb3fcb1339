#include <doctest.h>

#include "belief/errors.hpp"
#include "belief/stats/descriptive.hpp"
#include "belief/stats/resampling.hpp"
#include "support/generators.hpp"

using namespace belief;
using namespace belief::stats;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

BootstrapCurve curve_from(std::vector<double> j, std::vector<double> b, std::size_t n_max) {
    BootstrapCurve c;
    for (std::size_t n = 1; n <= n_max; ++n) c.n_values.push_back(n);
    c.rmse_judgement = Eigen::Map<VectorXd>(j.data(), static_cast<Eigen::Index>(j.size()));
    c.rmse_belief = Eigen::Map<VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    return c;
}

}  // namespace

TEST_CASE("descriptive statistics") {
    const VectorXd x = (VectorXd(5) << 0.1, 0.4, 0.2, 0.9, 0.5).finished();
    CHECK(median(x) == doctest::Approx(0.4));
    CHECK(quantile(x, 0.25) == doctest::Approx(0.2));
    CHECK(quantile(x, 0.75) == doctest::Approx(0.5));
    const auto s = summarize(x);
    CHECK(s.n == 5);
    CHECK(s.mean == doctest::Approx(0.42));
    CHECK(s.sd == doctest::Approx(std::sqrt(0.097)).epsilon(1e-12));
    CHECK(sample_sd(x) == doctest::Approx(s.sd));
}

TEST_CASE("permutation variance test examples") {
    SUBCASE("both constant") {
        const VectorXd j = VectorXd::Constant(30, 0.4), b = VectorXd::Constant(30, 0.6);
        const auto r = permutation_variance_test(j, b, true, 1000, 1);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("identical samples make swaps no-ops") {
        belief::Rng rng(2);
        const VectorXd j = testgen::normal_vector(rng, 50, 0.5, 0.2);
        const auto r = permutation_variance_test(j, j, true, 1000, 1);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("SD 0.26 versus 0.14 with 200 participants") {
        int detected = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            belief::Rng rng = substream(404, {seed});
            const VectorXd j = testgen::normal_vector(rng, 200, 0.72, 0.26);
            const VectorXd b = testgen::normal_vector(rng, 200, 0.59, 0.14);
            const auto r = permutation_variance_test(j, b, true, 2000, seed);
            detected += r.p_value < 0.01;
            CHECK(r.statistic == doctest::Approx(sample_sd(j) - sample_sd(b)).epsilon(1e-12));
        }
        CHECK(detected == 20);
    }
    SUBCASE("errors") {
        const VectorXd j = VectorXd::LinSpaced(10, 0, 1);
        CHECK_THROWS_AS(permutation_variance_test(j, j, true, 99, 1), ConfigurationError);
        CHECK_THROWS_AS(permutation_variance_test(j, j.head(5), true, 100, 1), std::invalid_argument);
        CHECK_THROWS_AS(permutation_variance_test(j.head(1), j.head(1), false, 100, 1), DomainError);
    }
}

TEST_CASE("permutation p-values lie on the (k+1)/(reps+1) grid and are reproducible") {
    belief::Rng rng(9);
    const VectorXd j = testgen::normal_vector(rng, 40), b = testgen::normal_vector(rng, 35);
    const auto r = permutation_variance_test(j, b, false, 499, 12);
    const double k = r.p_value * 500 - 1;
    CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-9));
    CHECK(r.method == "permutation_variance_test_pooled");
    CHECK(permutation_variance_test(j, b, false, 499, 12).p_value == r.p_value);
}

TEST_CASE("permutation null p-values are close to uniform") {
    std::vector<double> paired, pooled;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        belief::Rng rng = substream(31337, {seed});
        const VectorXd j = testgen::normal_vector(rng, 30), b = testgen::normal_vector(rng, 30);
        paired.push_back(permutation_variance_test(j, b, true, 199, seed).p_value);
        pooled.push_back(permutation_variance_test(j, b, false, 199, seed).p_value);
    }
    CHECK(testgen::ks_uniform(paired) < 0.08);
    CHECK(testgen::ks_uniform(pooled) < 0.08);
}

TEST_CASE("bootstrap of a degenerate population is exactly zero") {
    const VectorXd v = VectorXd::Constant(40, 0.6);
    BootstrapOptions o;
    o.n_max = 50;
    o.reps = 200;
    o.seed = 3;
    const auto c = bootstrap_rmse_curve(v, v, {}, o);
    CHECK(c.n_values.size() == 50);
    CHECK(c.rmse_judgement.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.rmse_belief.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bootstrap RMSE follows sigma / sqrt(n) for an i.i.d. pool") {
    belief::Rng rng(6);
    const VectorXd pop = testgen::normal_vector(rng, 2000, 0.5, 0.2);
    const double sigma = std::sqrt((pop.array() - pop.mean()).square().mean());
    BootstrapOptions o;
    o.n_max = 25;
    o.reps = 100000;
    o.seed = 77;
    o.target = BootstrapTarget::OwnMean;
    const auto c = bootstrap_rmse_curve(pop, pop, {}, o);
    for (std::size_t n : {1u, 5u, 25u}) {
        const double expect = sigma / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(c.rmse_judgement(static_cast<Eigen::Index>(n - 1)) / expect - 1.0) < 0.05);
    }
}

TEST_CASE("group-only bootstrap flattens to the group bias") {
    belief::Rng rng(10);
    const VectorXd d = testgen::normal_vector(rng, 500, 0.7, 0.15), r = testgen::normal_vector(rng, 500, 0.45, 0.15);
    VectorXd all(1000);
    all << d, r;
    std::vector<std::string> groups(500, "Democrat");
    groups.insert(groups.end(), 500, "Republican");
    BootstrapOptions o;
    o.n_max = 50;
    o.reps = 100000;
    o.seed = 4;
    o.pool = BootstrapPool::group_only("Republican");
    const auto c = bootstrap_rmse_curve(all, all, groups, o);
    const double bias = std::abs(r.mean() - all.mean());
    const double limit = std::sqrt(bias * bias + 0.15 * 0.15 / 50);
    CHECK(c.rmse_judgement(49) == doctest::Approx(limit).epsilon(0.02));
    CHECK(std::abs(c.rmse_judgement(49) - bias) < 0.005);
    CHECK(c.pool == "group:Republican");

    o.pool = BootstrapPool::group_only("Independent");
    CHECK_THROWS_AS(bootstrap_rmse_curve(all, all, groups, o), DomainError);
}

TEST_CASE("bootstrap is reproducible and validates options") {
    belief::Rng rng(1);
    MatrixXd j = MatrixXd::Random(60, 2).cwiseAbs(), b = MatrixXd::Random(60, 2).cwiseAbs();
    BootstrapPopulation pop{j, b, std::vector<std::string>(60, "g")};
    BootstrapOptions o;
    o.n_max = 10;
    o.reps = 300;
    o.seed = 8;
    const auto c1 = bootstrap_rmse_curve(pop, o), c2 = bootstrap_rmse_curve(pop, o);
    CHECK(c1.rmse_judgement == c2.rmse_judgement);
    CHECK(c1.rmse_belief == c2.rmse_belief);
    CHECK((c1.rmse_judgement.array() >= 0).all());
    o.seed = 9;
    CHECK(bootstrap_rmse_curve(pop, o).rmse_judgement != c1.rmse_judgement);
    o.reps = 0;
    CHECK_THROWS_AS(bootstrap_rmse_curve(pop, o), ConfigurationError);
    o.reps = 10;
    pop.beliefs = MatrixXd::Zero(59, 2);
    CHECK_THROWS_AS(bootstrap_rmse_curve(pop, o), std::invalid_argument);
}

TEST_CASE("crossover_point") {
    std::vector<double> j, b;
    for (int n = 1; n <= 50; ++n) {
        j.push_back(0.2 / std::sqrt(n));
        b.push_back(n <= 19 ? 0.15 / std::sqrt(n) : 0.2);
    }
    CHECK(crossover_point(curve_from(j, b, 50)) == 19u);
    CHECK(crossover_point(curve_from({0.3, 0.2, 0.1}, {0.1, 0.1, 0.05}, 3)) == 3u);
    CHECK_FALSE(crossover_point(curve_from({0.1, 0.1}, {0.1, 0.05}, 2)).has_value());
    CHECK_FALSE(crossover_point(curve_from({0.1, 0.1}, {0.2, 0.05}, 2)).has_value());
}
