#include "belief/simulation/population.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "belief/core_json.hpp"
#include "belief/errors.hpp"

namespace belief::sim {

using nlohmann::json;

void GroupStanceParams::validate() const {
    if (judgement_sd < 0.0 || belief_center_sd < 0.0 || belief_width_sd < 0.0 || judgement_within_sd < 0.0 ||
        belief_within_sd < 0.0) {
        throw ConfigurationError("standard deviations must be non-negative");
    }
    if (belief_width_mean < 0.0) throw ConfigurationError("belief width mean must be non-negative");
}

const GroupStanceParams& PopulationSpec::at(const GroupId& g, Stance s) const {
    auto it = params.find({g, s});
    if (it == params.end()) {
        throw DomainError("population spec has no parameters for (" + g + ", " + std::string(to_string(s)) + ")");
    }
    return it->second;
}

std::vector<GroupId> PopulationSpec::groups() const {
    std::vector<GroupId> out;
    for (const auto& [g, n] : group_sizes) out.push_back(g);
    return out;
}

void PopulationSpec::validate() const {
    if (!bounds.valid()) throw ConfigurationError("scale bounds must satisfy a < b");
    if (group_sizes.empty()) throw ConfigurationError("population spec declares no groups");
    for (const auto& [g, n] : group_sizes) {
        if (n < 1) throw ConfigurationError("group " + g + " needs at least one participant");
    }
    if (!(incentivized_fraction >= 0.0 && incentivized_fraction <= 1.0)) {
        throw ConfigurationError("incentivized_fraction must lie in [0, 1]");
    }
    for (const auto& [key, p] : params) p.validate();
}

double sample_judgement(const GroupStanceParams& params, const ScaleBounds& bounds, Rng& rng) {
    const double x = sample_boundary_normal(params.judgement_model, params.judgement_mean, params.judgement_sd,
                                            bounds.a, bounds.b, rng);
    return quantize(x, bounds);
}

BeliefInterval belief_interval_around(double center, double width, const StatementId& statement_id,
                                      const PopulationTarget& target, const ScaleBounds& bounds) {
    const double c = quantize(std::clamp(center, bounds.a, bounds.b), bounds);
    double half = std::round(std::max(width, 0.0) * 50.0) / 100.0;
    half = std::min({half, c - bounds.a, bounds.b - c});
    BeliefInterval interval;
    interval.statement_id = statement_id;
    interval.target = target;
    interval.lower = quantize(std::max(c - half, bounds.a), bounds);
    interval.upper = quantize(std::min(c + half, bounds.b), bounds);
    return interval;
}

namespace {

double offset_for(const GroupStanceParams& params, const PopulationTarget& target) {
    auto it = params.belief_target_offsets.find(target.label());
    return it == params.belief_target_offsets.end() ? 0.0 : it->second;
}

double sample_width(const GroupStanceParams& params, const ScaleBounds& bounds, Rng& rng) {
    return sample_truncated_normal(params.belief_width_mean, params.belief_width_sd, 0.0, bounds.width(), rng);
}

}  // namespace

BeliefInterval sample_belief_interval(const GroupStanceParams& params, const StatementId& statement_id,
                                      const PopulationTarget& target, const ScaleBounds& bounds, Rng& rng) {
    const double center = sample_boundary_normal(params.belief_model, params.belief_center_mean,
                                                 params.belief_center_sd, bounds.a, bounds.b, rng);
    const double width = sample_width(params, bounds, rng);
    return belief_interval_around(center + offset_for(params, target), width, statement_id, target, bounds);
}

std::vector<double> spread_within(double latent, std::size_t k, double sd, const ScaleBounds& bounds, Rng& rng) {
    std::vector<double> values(k, latent);
    if (k < 2 || sd <= 0.0) return values;
    std::normal_distribution<double> normal(0.0, sd);
    std::vector<double> dev(k);
    double mean = 0.0;
    for (auto& d : dev) {
        d = normal(rng);
        mean += d;
    }
    mean /= static_cast<double>(k);
    double shrink = 1.0;
    for (auto& d : dev) {
        d -= mean;
        if (latent + d > bounds.b) shrink = std::min(shrink, (bounds.b - latent) / d);
        if (latent + d < bounds.a) shrink = std::min(shrink, (bounds.a - latent) / d);
    }
    for (std::size_t i = 0; i < k; ++i) values[i] = std::clamp(latent + shrink * dev[i], bounds.a, bounds.b);
    return values;
}

PopulationSpec calibrate_from_summary(const CalibrationSummary& summary, const CalibrationTolerance& tolerance) {
    std::map<CellKey, const SummaryRow*> judgement_rows, belief_rows;
    for (const auto& row : summary.rows) {
        auto& slot = row.kind == ResponseKind::Judgement ? judgement_rows : belief_rows;
        if (!slot.emplace(CellKey{row.group, row.stance}, &row).second) {
            throw DomainError("duplicate summary row for (" + row.group + ", " + std::string(to_string(row.stance)) + ")");
        }
    }

    std::set<CellKey> cells;
    for (const auto& [k, r] : judgement_rows) cells.insert(k);
    for (const auto& [k, r] : belief_rows) cells.insert(k);

    PopulationSpec spec;
    spec.group_sizes = summary.group_sizes;
    spec.mode = summary.mode;
    spec.bounds = summary.bounds;
    spec.incentivized_fraction = summary.incentivized_fraction;
    spec.seed = summary.seed;

    for (const auto& key : cells) {
        const std::string cell = "(" + key.first + ", " + std::string(to_string(key.second)) + ")";
        auto j = judgement_rows.find(key);
        auto b = belief_rows.find(key);
        if (j == judgement_rows.end()) throw DomainError("summary lacks the judgement row for " + cell);
        if (b == belief_rows.end()) throw DomainError("summary lacks the belief row for " + cell);

        GroupStanceParams p;
        try {
            const CalibratedNormal cj = calibrate_moments(j->second->mean, j->second->sd, summary.bounds, tolerance);
            const CalibratedNormal cb = calibrate_moments(b->second->mean, b->second->sd, summary.bounds, tolerance);
            p.judgement_mean = cj.mu;
            p.judgement_sd = cj.sigma;
            p.judgement_model = cj.model;
            p.belief_center_mean = cb.mu;
            p.belief_center_sd = cb.sigma;
            p.belief_model = cb.model;
        } catch (const CalibrationError& e) {
            throw CalibrationError(cell + ": " + e.what(), e.residual());
        }
        p.belief_width_mean = summary.belief_width_mean;
        p.belief_width_sd = summary.belief_width_sd;
        p.judgement_within_sd = summary.judgement_within_sd;
        p.belief_within_sd = summary.belief_within_sd;
        spec.params.emplace(key, p);
    }
    spec.validate();
    return spec;
}

CampaignConfig campaign_for(const PopulationSpec& spec, std::vector<Statement> statements) {
    CampaignConfig config;
    config.statements = std::move(statements);
    config.groups = spec.groups();
    config.mode = spec.mode;
    config.bounds = spec.bounds;
    config.incentive_arms.incentivized_fraction = spec.incentivized_fraction;
    config.seed = spec.seed;
    return config;
}

SimulatedCohort generate_cohort(const PopulationSpec& spec, std::span<const Statement> statements) {
    spec.validate();
    if (statements.empty()) throw DomainError("no statements to simulate");

    std::vector<Stance> stances;
    for (Stance s : {Stance::DemocratLeaning, Stance::RepublicanLeaning, Stance::Neutral}) {
        if (std::any_of(statements.begin(), statements.end(), [s](const Statement& st) { return st.stance == s; })) {
            stances.push_back(s);
        }
    }
    for (const auto& [g, n] : spec.group_sizes) {
        for (Stance s : stances) spec.at(g, s);
    }

    const CampaignConfig config = campaign_for(spec, {statements.begin(), statements.end()});
    const std::vector<StatementId> ids = config.statement_ids();
    const std::vector<PopulationTarget> targets = config.belief_targets();
    std::map<Stance, std::vector<StatementId>> by_stance;
    for (const auto& st : statements) by_stance[st.stance].push_back(st.id);

    SimulatedCohort cohort;
    cohort.provenance = spec;
    std::uint64_t index = 0;
    for (const auto& [group, size] : spec.group_sizes) {
        for (std::size_t k = 0; k < size; ++k, ++index) {
            Rng rng = substream(spec.seed, {index});

            std::map<StatementId, double> judgement, center;
            for (Stance s : stances) {
                const auto& p = spec.at(group, s);
                const double j = sample_boundary_normal(p.judgement_model, p.judgement_mean, p.judgement_sd,
                                                        spec.bounds.a, spec.bounds.b, rng);
                const double c = sample_boundary_normal(p.belief_model, p.belief_center_mean, p.belief_center_sd,
                                                        spec.bounds.a, spec.bounds.b, rng);
                const auto& members = by_stance.at(s);
                const auto js = spread_within(j, members.size(), p.judgement_within_sd, spec.bounds, rng);
                const auto cs = spread_within(c, members.size(), p.belief_within_sd, spec.bounds, rng);
                for (std::size_t m = 0; m < members.size(); ++m) {
                    judgement[members[m]] = quantize(js[m], spec.bounds);
                    center[members[m]] = cs[m];
                }
            }

            SessionRecord session;
            char pid[32];
            std::snprintf(pid, sizeof pid, "p%06llu", static_cast<unsigned long long>(index + 1));
            session.profile.participant_id = pid;
            session.profile.recruited_group = group;
            session.profile.reported_group = group;
            session.arm = assign_arm(spec.seed, index, spec.incentivized_fraction);
            session.presentation_order = presentation_order(spec.seed, session.profile.participant_id, ids);

            for (const auto& sid : session.presentation_order) {
                session.judgements.push_back({sid, judgement.at(sid)});
            }
            for (const auto& sid : session.presentation_order) {
                const Statement& st = *config.find_statement(sid);
                const auto& p = spec.at(group, st.stance);
                for (const auto& target : targets) {
                    const double width = sample_width(p, spec.bounds, rng);
                    session.beliefs.push_back(belief_interval_around(center.at(sid) + offset_for(p, target), width,
                                                                     sid, target, spec.bounds));
                }
            }
            session.status = SessionStatus::Complete;
            cohort.sessions.push_back(std::move(session));
        }
    }
    return cohort;
}

namespace {

std::string_view kind_label(ResponseKind k) { return k == ResponseKind::Judgement ? "judgement" : "belief_midpoint"; }

ResponseKind kind_from_label(std::string_view s) {
    if (s == "judgement") return ResponseKind::Judgement;
    if (s == "belief_midpoint" || s == "belief") return ResponseKind::BeliefMidpoint;
    throw std::invalid_argument("unknown response kind \"" + std::string(s) + "\"");
}

}  // namespace

void to_json(json& j, const GroupStanceParams& p) {
    j = json{{"judgement_mean", p.judgement_mean},
             {"judgement_sd", p.judgement_sd},
             {"judgement_model", to_string(p.judgement_model)},
             {"belief_center_mean", p.belief_center_mean},
             {"belief_center_sd", p.belief_center_sd},
             {"belief_model", to_string(p.belief_model)},
             {"belief_width_mean", p.belief_width_mean},
             {"belief_width_sd", p.belief_width_sd},
             {"judgement_within_sd", p.judgement_within_sd},
             {"belief_within_sd", p.belief_within_sd},
             {"belief_target_offsets", p.belief_target_offsets}};
}

void from_json(const json& j, GroupStanceParams& p) {
    j.at("judgement_mean").get_to(p.judgement_mean);
    j.at("judgement_sd").get_to(p.judgement_sd);
    p.judgement_model = boundary_model_from_string(j.value("judgement_model", "truncated"));
    j.at("belief_center_mean").get_to(p.belief_center_mean);
    j.at("belief_center_sd").get_to(p.belief_center_sd);
    p.belief_model = boundary_model_from_string(j.value("belief_model", "truncated"));
    p.belief_width_mean = j.value("belief_width_mean", 0.20);
    p.belief_width_sd = j.value("belief_width_sd", 0.10);
    p.judgement_within_sd = j.value("judgement_within_sd", 0.0);
    p.belief_within_sd = j.value("belief_within_sd", 0.0);
    p.belief_target_offsets = j.value("belief_target_offsets", std::map<std::string, double>{});
}

void to_json(json& j, const PopulationSpec& s) {
    json cells = json::array();
    for (const auto& [key, p] : s.params) {
        json cell = p;
        cell["group"] = key.first;
        cell["stance"] = to_string(key.second);
        cells.push_back(std::move(cell));
    }
    j = json{{"mode", to_string(s.mode)},
             {"bounds", s.bounds},
             {"group_sizes", s.group_sizes},
             {"incentivized_fraction", s.incentivized_fraction},
             {"seed", s.seed},
             {"cells", std::move(cells)}};
}

void from_json(const json& j, PopulationSpec& s) {
    s = PopulationSpec{};
    s.mode = elicitation_mode_from_string(j.value("mode", "AggregateBelief"));
    if (j.contains("bounds")) j.at("bounds").get_to(s.bounds);
    j.at("group_sizes").get_to(s.group_sizes);
    s.incentivized_fraction = j.value("incentivized_fraction", 0.5);
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& cell : j.at("cells")) {
        CellKey key{cell.at("group").get<std::string>(), stance_from_string(cell.at("stance").get<std::string>())};
        if (!s.params.emplace(key, cell.get<GroupStanceParams>()).second) {
            throw std::invalid_argument("duplicate cell for group " + key.first);
        }
    }
}

void to_json(json& j, const CalibrationSummary& s) {
    json rows = json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"group", r.group},
                        {"stance", to_string(r.stance)},
                        {"kind", kind_label(r.kind)},
                        {"mean", r.mean},
                        {"sd", r.sd}});
    }
    j = json{{"rows", std::move(rows)},
             {"group_sizes", s.group_sizes},
             {"mode", to_string(s.mode)},
             {"bounds", s.bounds},
             {"incentivized_fraction", s.incentivized_fraction},
             {"seed", s.seed},
             {"belief_width_mean", s.belief_width_mean},
             {"belief_width_sd", s.belief_width_sd},
             {"judgement_within_sd", s.judgement_within_sd},
             {"belief_within_sd", s.belief_within_sd}};
}

void from_json(const json& j, CalibrationSummary& s) {
    s = CalibrationSummary{};
    for (const auto& r : j.at("rows")) {
        s.rows.push_back({r.at("group").get<std::string>(), stance_from_string(r.at("stance").get<std::string>()),
                          kind_from_label(r.at("kind").get<std::string>()), r.at("mean").get<double>(),
                          r.at("sd").get<double>()});
    }
    j.at("group_sizes").get_to(s.group_sizes);
    s.mode = elicitation_mode_from_string(j.value("mode", "AggregateBelief"));
    if (j.contains("bounds")) j.at("bounds").get_to(s.bounds);
    s.incentivized_fraction = j.value("incentivized_fraction", 0.5);
    s.seed = j.value("seed", std::uint64_t{0});
    s.belief_width_mean = j.value("belief_width_mean", 0.20);
    s.belief_width_sd = j.value("belief_width_sd", 0.10);
    s.judgement_within_sd = j.value("judgement_within_sd", 0.10);
    s.belief_within_sd = j.value("belief_within_sd", 0.05);
}

}  // namespace belief::sim
