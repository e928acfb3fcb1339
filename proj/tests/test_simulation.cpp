#include <doctest.h>

#include <cmath>
#include <set>

#include "belief/errors.hpp"
#include "belief/simulation/fixtures.hpp"
#include "belief/simulation/population.hpp"
#include "belief/simulation/truncated_normal.hpp"
#include "support/generators.hpp"

using namespace belief;
using namespace belief::sim;

namespace {

GroupStanceParams judgement_only(double mu, double sigma, BoundaryModel model) {
    GroupStanceParams p;
    p.judgement_mean = mu;
    p.judgement_sd = sigma;
    p.judgement_model = model;
    return p;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

PopulationSpec two_group_spec(std::size_t per_group, ElicitationMode mode) {
    PopulationSpec spec;
    spec.group_sizes = {{"Democrat", per_group}, {"Republican", per_group}};
    spec.mode = mode;
    spec.seed = 19;
    for (const auto& g : {"Democrat", "Republican"}) {
        for (Stance s : {Stance::DemocratLeaning, Stance::RepublicanLeaning}) {
            GroupStanceParams p;
            p.judgement_mean = 0.6;
            p.judgement_sd = 0.2;
            p.belief_center_mean = 0.55;
            p.belief_center_sd = 0.1;
            p.judgement_within_sd = 0.1;
            p.belief_within_sd = 0.05;
            spec.params.emplace(CellKey{g, s}, p);
        }
    }
    return spec;
}

}  // namespace

TEST_CASE("closed-form restricted moments match numerical integration") {
    belief::Rng rng(12);
    for (int i = 0; i < 300; ++i) {
        const double mu = testgen::uniform(rng, -0.5, 1.5);
        const double sigma = testgen::uniform(rng, 0.02, 0.8);
        const auto qt = testgen::quadrature_moments(mu, sigma, 0.0, 1.0, false);
        const auto qc = testgen::quadrature_moments(mu, sigma, 0.0, 1.0, true);
        const auto t = truncated_normal_moments(mu, sigma, 0.0, 1.0);
        const auto c = censored_normal_moments(mu, sigma, 0.0, 1.0);
        REQUIRE(t.mean == doctest::Approx(qt.mean).epsilon(1e-7));
        REQUIRE(t.sd == doctest::Approx(qt.sd).epsilon(1e-6));
        REQUIRE(c.mean == doctest::Approx(qc.mean).epsilon(1e-7));
        REQUIRE(c.sd == doctest::Approx(qc.sd).epsilon(1e-6));
    }
}

TEST_CASE("boundary model names round-trip") {
    for (auto m : {BoundaryModel::Truncated, BoundaryModel::Censored}) {
        CHECK(boundary_model_from_string(to_string(m)) == m);
    }
    CHECK_THROWS(boundary_model_from_string("folded"));
}

TEST_CASE("sample_judgement") {
    const ScaleBounds bounds;
    SUBCASE("zero spread returns the quantized mean") {
        belief::Rng rng(1);
        CHECK(sample_judgement(judgement_only(0.456, 0.0, BoundaryModel::Truncated), bounds, rng) == 0.46);
        CHECK(sample_judgement(judgement_only(1.7, 0.0, BoundaryModel::Censored), bounds, rng) == 1.0);
    }
    SUBCASE("draws are quantized, in range, and have the restricted mean") {
        for (auto model : {BoundaryModel::Truncated, BoundaryModel::Censored}) {
            belief::Rng rng(2);
            const auto p = judgement_only(0.72, 0.26, model);
            std::vector<double> draws;
            for (int i = 0; i < 100000; ++i) {
                const double x = sample_judgement(p, bounds, rng);
                REQUIRE(is_scale_value(x, bounds));
                draws.push_back(x);
            }
            const auto q = testgen::quadrature_moments(0.72, 0.26, 0.0, 1.0, model == BoundaryModel::Censored);
            CHECK(std::abs(mean_of(draws) - q.mean) < 0.01);
            CHECK(std::abs(sd_of(draws) - q.sd) < 0.01);
        }
    }
}

TEST_CASE("belief intervals") {
    const ScaleBounds bounds;
    const auto rep = PopulationTarget::representative();
    SUBCASE("zero width is a point interval") {
        const auto b = belief_interval_around(0.333, 0.0, "s", rep, bounds);
        CHECK(b.lower == 0.33);
        CHECK(b.upper == 0.33);
    }
    SUBCASE("width is shrunk at the scale edge") {
        const auto b = belief_interval_around(0.95, 0.4, "s", rep, bounds);
        CHECK(b.upper == 1.0);
        CHECK(b.lower == doctest::Approx(0.9));
        CHECK(b.midpoint() == doctest::Approx(0.95));
    }
    SUBCASE("sampled intervals stay ordered, quantized and centred on the restricted mean") {
        GroupStanceParams p;
        p.belief_center_mean = 0.56;
        p.belief_center_sd = 0.15;
        belief::Rng rng(8);
        std::vector<double> mids;
        for (int i = 0; i < 100000; ++i) {
            const auto b = sample_belief_interval(p, "s", rep, bounds, rng);
            REQUIRE(b.lower <= b.upper);
            REQUIRE(is_scale_value(b.lower, bounds));
            REQUIRE(is_scale_value(b.upper, bounds));
            mids.push_back(b.midpoint());
        }
        const auto q = testgen::quadrature_moments(0.56, 0.15, 0.0, 1.0, false);
        CHECK(std::abs(mean_of(mids) - q.mean) < 0.01);
    }
    SUBCASE("target offsets shift the center") {
        GroupStanceParams p;
        p.belief_center_mean = 0.5;
        p.belief_width_sd = 0.0;
        p.belief_target_offsets = {{"Republican", -0.2}};
        belief::Rng rng(3);
        const auto r = sample_belief_interval(p, "s", PopulationTarget::group("Republican"), bounds, rng);
        const auto d = sample_belief_interval(p, "s", PopulationTarget::group("Democrat"), bounds, rng);
        CHECK(r.midpoint() == doctest::Approx(0.3));
        CHECK(d.midpoint() == doctest::Approx(0.5));
    }
}

TEST_CASE("spread_within keeps the latent mean and the bounds (property)") {
    belief::Rng rng(55);
    const ScaleBounds bounds;
    for (int i = 0; i < 5000; ++i) {
        const double latent = rng.uniform();
        const std::size_t k = 1 + rng.below(5);
        const auto v = spread_within(latent, k, testgen::uniform(rng, 0.0, 0.5), bounds, rng);
        REQUIRE(v.size() == k);
        REQUIRE(mean_of(v) == doctest::Approx(latent).epsilon(1e-9));
        for (double x : v) REQUIRE(bounds.contains(x));
    }
}

TEST_CASE("moment calibration") {
    const ScaleBounds bounds;
    SUBCASE("an interior target is matched exactly by the truncated family") {
        const auto c = calibrate_moments(0.5, 0.1, bounds);
        CHECK(c.model == BoundaryModel::Truncated);
        CHECK(std::abs(c.mean_residual) < 1e-6);
        CHECK(std::abs(c.sd_residual) < 1e-6);
        CHECK(c.mu == doctest::Approx(0.5).epsilon(1e-3));
        CHECK(c.sigma == doctest::Approx(0.1).epsilon(1e-2));
    }
    SUBCASE("frozen calibrations reproduce their targets under integration") {
        struct Frozen {
            double mean, sd;
            BoundaryModel model;
            double mu, sigma;
        };
        for (const auto& f : {Frozen{0.72, 0.26, BoundaryModel::Censored, 0.7643, 0.3280},
                              Frozen{0.44, 0.35, BoundaryModel::Censored, 0.4145, 0.4780},
                              Frozen{0.59, 0.14, BoundaryModel::Truncated, 0.5908, 0.1413}}) {
            const auto c = calibrate_moments(f.mean, f.sd, bounds);
            CHECK(c.model == f.model);
            CHECK(c.mu == doctest::Approx(f.mu).epsilon(1e-3));
            CHECK(c.sigma == doctest::Approx(f.sigma).epsilon(1e-3));
            const auto q = testgen::quadrature_moments(c.mu, c.sigma, 0.0, 1.0, c.model == BoundaryModel::Censored);
            CHECK(std::abs(q.mean - f.mean) < 0.02);
            CHECK(std::abs(q.sd - f.sd) < 0.03);
        }
    }
    SUBCASE("an unreachable target raises CalibrationError") {
        CHECK_THROWS_AS(calibrate_moments(0.99, 0.3, bounds), CalibrationError);
        const auto best = fit_boundary_normal(BoundaryModel::Censored, 0.99, 0.3, bounds);
        CHECK(std::abs(best.mean_residual) + std::abs(best.sd_residual) > 0.02);
    }
}

TEST_CASE("calibrated fixtures reproduce the summary moments in simulation") {
    auto summary = fixtures::exp1_summary(5);
    for (auto& [g, n] : summary.group_sizes) n = 8000;
    const auto spec = calibrate_from_summary(summary);
    const auto statements = fixtures::exp1_statements();
    const auto cohort = generate_cohort(spec, statements);
    for (const auto& row : summary.rows) {
        std::vector<double> values;
        for (const auto& s : cohort.sessions) {
            if (s.profile.recruited_group != row.group) continue;
            values.push_back(participant_stance_mean(s, statements, row.stance, row.kind));
        }
        CAPTURE(row.group);
        CAPTURE(to_string(row.stance));
        CHECK(std::abs(mean_of(values) - row.mean) < 0.02);
        CHECK(std::abs(sd_of(values) - row.sd) < 0.03);
    }
}

TEST_CASE("calibrate_from_summary errors") {
    auto summary = fixtures::exp1_summary();
    summary.rows.pop_back();
    CHECK_THROWS_AS(calibrate_from_summary(summary), DomainError);

    sim::CalibrationSummary bad;
    bad.group_sizes = {{"Democrat", 10}};
    bad.rows = {{"Democrat", Stance::DemocratLeaning, ResponseKind::Judgement, 0.99, 0.3},
                {"Democrat", Stance::DemocratLeaning, ResponseKind::BeliefMidpoint, 0.5, 0.1}};
    CHECK_THROWS_AS(calibrate_from_summary(bad), CalibrationError);
}

TEST_CASE("generate_cohort") {
    const auto spec = calibrate_from_summary(fixtures::exp1_summary(7));
    const auto statements = fixtures::exp1_statements();
    const auto cohort = generate_cohort(spec, statements);
    const auto config = campaign_for(spec, statements);

    SUBCASE("sizes and validity") {
        CHECK(cohort.sessions.size() == 1260);
        std::set<std::string> ids;
        std::size_t incentivized = 0;
        for (const auto& s : cohort.sessions) {
            REQUIRE(validate_session(s, config).ok());
            REQUIRE(s.status == SessionStatus::Complete);
            REQUIRE(s.profile.recruited_group == s.profile.reported_group);
            ids.insert(s.profile.participant_id);
            incentivized += s.arm == Arm::Incentivized;
        }
        CHECK(ids.size() == 1260);
        CHECK(incentivized > 500);
        CHECK(incentivized < 760);
        CHECK(apply_exclusions(cohort.sessions).kept.size() == 1260);
        CHECK(cohort.provenance == spec);
    }
    SUBCASE("deterministic in the seed") {
        CHECK(generate_cohort(spec, statements).sessions == cohort.sessions);
        auto other = spec;
        other.seed = 8;
        CHECK(generate_cohort(other, statements).sessions != cohort.sessions);
    }
}

TEST_CASE("per-group elicitation yields one interval per group and statement") {
    auto spec = two_group_spec(1, ElicitationMode::PerGroupBelief);
    const auto statements = fixtures::exp2_statements();
    const auto cohort = generate_cohort(spec, statements);
    const auto config = campaign_for(spec, statements);
    REQUIRE(cohort.sessions.size() == 2);
    for (const auto& s : cohort.sessions) {
        CHECK(s.judgements.size() == 4);
        CHECK(s.beliefs.size() == 8);
        CHECK(validate_session(s, config).ok());
    }
}

TEST_CASE("generate_cohort rejects incomplete specs") {
    auto spec = two_group_spec(3, ElicitationMode::AggregateBelief);
    spec.params.erase(CellKey{"Republican", Stance::RepublicanLeaning});
    CHECK_THROWS_AS(generate_cohort(spec, fixtures::exp2_statements()), DomainError);
    CHECK_THROWS_AS(generate_cohort(two_group_spec(3, ElicitationMode::AggregateBelief), {}), DomainError);
}

TEST_CASE("population spec JSON round-trip") {
    auto spec = calibrate_from_summary(fixtures::exp2_summary());
    spec.params.begin()->second.belief_target_offsets = {{"Democrat", 0.05}};
    const nlohmann::json j = spec;
    CHECK(j.get<PopulationSpec>() == spec);

    const nlohmann::json s = fixtures::exp2_summary();
    const auto back = s.get<CalibrationSummary>();
    CHECK(back.rows.size() == fixtures::exp2_summary().rows.size());
    CHECK(calibrate_from_summary(back) == calibrate_from_summary(fixtures::exp2_summary()));
}
