#include "belief/core_json.hpp"

namespace belief {

using nlohmann::json;

void to_json(json& j, const ScaleBounds& v) { j = json{{"a", v.a}, {"b", v.b}}; }

void from_json(const json& j, ScaleBounds& v) {
    v.a = j.value("a", 0.0);
    v.b = j.value("b", 1.0);
}

void to_json(json& j, const Statement& v) {
    j = json{{"id", v.id}, {"topic", v.topic}, {"body", v.body}, {"stance", to_string(v.stance)}};
}

void from_json(const json& j, Statement& v) {
    j.at("id").get_to(v.id);
    v.topic = j.value("topic", "");
    j.at("body").get_to(v.body);
    v.stance = stance_from_string(j.value("stance", "Neutral"));
}

void to_json(json& j, const CampaignConfig& v) {
    j = json{{"statements", v.statements},
             {"groups", v.groups},
             {"mode", to_string(v.mode)},
             {"incentive_arms", {{"incentivized_fraction", v.incentive_arms.incentivized_fraction}}},
             {"bounds", v.bounds},
             {"population_description", v.population_description},
             {"seed", v.seed}};
}

void from_json(const json& j, CampaignConfig& v) {
    j.at("statements").get_to(v.statements);
    j.at("groups").get_to(v.groups);
    v.mode = elicitation_mode_from_string(j.value("mode", "AggregateBelief"));
    if (j.contains("incentive_arms")) {
        v.incentive_arms.incentivized_fraction = j.at("incentive_arms").value("incentivized_fraction", 0.5);
    }
    if (j.contains("bounds")) j.at("bounds").get_to(v.bounds);
    v.population_description = j.value("population_description", "");
    v.seed = j.value("seed", std::uint64_t{0});
}

void to_json(json& j, const AnnotatorProfile& v) {
    j = json{{"participant_id", v.participant_id},
             {"recruited_group", v.recruited_group},
             {"reported_group", v.reported_group},
             {"demographics", v.demographics}};
}

void from_json(const json& j, AnnotatorProfile& v) {
    j.at("participant_id").get_to(v.participant_id);
    j.at("recruited_group").get_to(v.recruited_group);
    v.reported_group = j.value("reported_group", "");
    v.demographics = j.value("demographics", std::map<std::string, std::string>{});
}

void to_json(json& j, const JudgementResponse& v) {
    j = json{{"statement_id", v.statement_id}, {"value", v.value}};
}

void from_json(const json& j, JudgementResponse& v) {
    j.at("statement_id").get_to(v.statement_id);
    j.at("value").get_to(v.value);
}

void to_json(json& j, const BeliefInterval& v) {
    j = json{{"statement_id", v.statement_id}, {"target", v.target.label()}, {"lower", v.lower}, {"upper", v.upper}};
}

void from_json(const json& j, BeliefInterval& v) {
    j.at("statement_id").get_to(v.statement_id);
    v.target = PopulationTarget::parse(j.value("target", std::string(PopulationTarget::kRepresentativeLabel)));
    j.at("lower").get_to(v.lower);
    j.at("upper").get_to(v.upper);
}

void to_json(json& j, const SessionRecord& v) {
    j = json{{"profile", v.profile},
             {"arm", to_string(v.arm)},
             {"presentation_order", v.presentation_order},
             {"judgements", v.judgements},
             {"beliefs", v.beliefs},
             {"status", to_string(v.status)}};
    if (v.exclusion_reason) j["exclusion_reason"] = to_string(*v.exclusion_reason);
}

void from_json(const json& j, SessionRecord& v) {
    j.at("profile").get_to(v.profile);
    v.arm = arm_from_string(j.value("arm", "Unincentivized"));
    j.at("presentation_order").get_to(v.presentation_order);
    v.judgements = j.value("judgements", std::vector<JudgementResponse>{});
    v.beliefs = j.value("beliefs", std::vector<BeliefInterval>{});
    v.status = session_status_from_string(j.value("status", "InProgress"));
    if (j.contains("exclusion_reason")) {
        v.exclusion_reason = exclusion_reason_from_string(j.at("exclusion_reason").get<std::string>());
    } else {
        v.exclusion_reason.reset();
    }
}

}  // namespace belief
