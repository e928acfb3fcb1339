#include "belief/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "belief/errors.hpp"
#include "belief/rng.hpp"

namespace belief {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<Enum, std::string_view> (&table)[N], const char* what) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(s));
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum e, const std::pair<Enum, std::string_view> (&table)[N]) {
    for (const auto& [value, name] : table) {
        if (value == e) return name;
    }
    return "?";
}

constexpr std::pair<Stance, std::string_view> kStances[] = {
    {Stance::DemocratLeaning, "DemocratLeaning"},
    {Stance::RepublicanLeaning, "RepublicanLeaning"},
    {Stance::Neutral, "Neutral"},
};
constexpr std::pair<ElicitationMode, std::string_view> kModes[] = {
    {ElicitationMode::AggregateBelief, "AggregateBelief"},
    {ElicitationMode::PerGroupBelief, "PerGroupBelief"},
};
constexpr std::pair<Arm, std::string_view> kArms[] = {
    {Arm::Incentivized, "Incentivized"},
    {Arm::Unincentivized, "Unincentivized"},
};
constexpr std::pair<SessionStatus, std::string_view> kStatuses[] = {
    {SessionStatus::InProgress, "InProgress"},
    {SessionStatus::Complete, "Complete"},
    {SessionStatus::Excluded, "Excluded"},
};
constexpr std::pair<ExclusionReason, std::string_view> kReasons[] = {
    {ExclusionReason::AffiliationMismatch, "AffiliationMismatch"},
    {ExclusionReason::Incomplete, "Incomplete"},
};

}  // namespace

std::string_view to_string(Stance s) { return enum_name(s, kStances); }
Stance stance_from_string(std::string_view s) { return parse_enum(s, kStances, "stance"); }
std::string_view to_string(ElicitationMode m) { return enum_name(m, kModes); }
ElicitationMode elicitation_mode_from_string(std::string_view s) { return parse_enum(s, kModes, "elicitation mode"); }
std::string_view to_string(Arm a) { return enum_name(a, kArms); }
Arm arm_from_string(std::string_view s) { return parse_enum(s, kArms, "arm"); }
std::string_view to_string(SessionStatus s) { return enum_name(s, kStatuses); }
std::string_view to_string(ExclusionReason r) { return enum_name(r, kReasons); }
SessionStatus session_status_from_string(std::string_view s) { return parse_enum(s, kStatuses, "session status"); }
ExclusionReason exclusion_reason_from_string(std::string_view s) {
    return parse_enum(s, kReasons, "exclusion reason");
}

PopulationTarget PopulationTarget::parse(std::string_view label) {
    if (label.empty()) throw std::invalid_argument("empty belief target");
    if (label == kRepresentativeLabel) return representative();
    return group(std::string(label));
}

const Statement* CampaignConfig::find_statement(std::string_view id) const {
    auto it = std::find_if(statements.begin(), statements.end(), [&](const Statement& s) { return s.id == id; });
    return it == statements.end() ? nullptr : &*it;
}

bool CampaignConfig::declares_group(std::string_view g) const {
    return std::find(groups.begin(), groups.end(), g) != groups.end();
}

std::vector<StatementId> CampaignConfig::statement_ids() const {
    std::vector<StatementId> ids;
    ids.reserve(statements.size());
    for (const auto& s : statements) ids.push_back(s.id);
    return ids;
}

std::vector<PopulationTarget> CampaignConfig::belief_targets() const {
    if (mode == ElicitationMode::AggregateBelief) return {PopulationTarget::representative()};
    std::vector<PopulationTarget> targets;
    for (const auto& g : groups) targets.push_back(PopulationTarget::group(g));
    return targets;
}

const JudgementResponse* SessionRecord::find_judgement(std::string_view statement_id) const {
    auto it = std::find_if(judgements.begin(), judgements.end(),
                           [&](const JudgementResponse& j) { return j.statement_id == statement_id; });
    return it == judgements.end() ? nullptr : &*it;
}

const BeliefInterval* SessionRecord::find_belief(std::string_view statement_id, const PopulationTarget& target) const {
    auto it = std::find_if(beliefs.begin(), beliefs.end(), [&](const BeliefInterval& b) {
        return b.statement_id == statement_id && b.target == target;
    });
    return it == beliefs.end() ? nullptr : &*it;
}

double quantize(double value, const ScaleBounds& bounds) {
    if (!std::isfinite(value) || !bounds.contains(value)) {
        throw RangeError("value " + std::to_string(value) + " outside scale [" + std::to_string(bounds.a) + ", " +
                         std::to_string(bounds.b) + "]");
    }
    // The nudge makes decimal ties such as 0.145 (stored as 0.14499...) round
    // away from zero the way the written decimal would.
    const double scaled = value * 100.0;
    const double rounded = std::round(scaled + std::copysign(1e-9, scaled));
    return std::clamp(rounded / 100.0, bounds.a, bounds.b);
}

bool is_scale_value(double value, const ScaleBounds& bounds) {
    if (!std::isfinite(value) || !bounds.contains(value)) return false;
    return quantize(value, bounds) == value;
}

ValidationReport validate_campaign(const CampaignConfig& config) {
    ValidationReport report;
    auto& v = report.violations;
    if (config.statements.empty()) v.push_back("no statements");
    std::set<std::string> ids;
    for (const auto& s : config.statements) {
        if (s.id.empty()) v.push_back("statement with empty id");
        if (!ids.insert(s.id).second) v.push_back("duplicate id \"" + s.id + "\"");
        if (s.body.empty()) v.push_back("statement \"" + s.id + "\" has empty body");
    }
    if (config.groups.empty()) v.push_back("no groups declared");
    std::set<std::string> groups;
    for (const auto& g : config.groups) {
        if (g.empty()) v.push_back("group with empty name");
        if (g == PopulationTarget::kRepresentativeLabel) v.push_back("group name \"representative\" is reserved");
        if (!groups.insert(g).second) v.push_back("duplicate group \"" + g + "\"");
    }
    if (!config.bounds.valid()) v.push_back("scale bounds must satisfy a < b");
    const double f = config.incentive_arms.incentivized_fraction;
    if (!(f >= 0.0 && f <= 1.0)) v.push_back("incentivized_fraction must lie in [0, 1]");
    return report;
}

std::vector<std::string> missing_responses(const SessionRecord& session, const CampaignConfig& config) {
    std::vector<std::string> missing;
    const auto targets = config.belief_targets();
    for (const auto& s : config.statements) {
        if (!session.find_judgement(s.id)) missing.push_back("judgement " + s.id);
        for (const auto& t : targets) {
            if (!session.find_belief(s.id, t)) missing.push_back("belief " + s.id + " / " + t.label());
        }
    }
    return missing;
}

ValidationReport validate_session(const SessionRecord& session, const CampaignConfig& config) {
    ValidationReport report;
    auto& v = report.violations;
    const auto& bounds = config.bounds;

    auto ids = config.statement_ids();
    auto order = session.presentation_order;
    std::sort(ids.begin(), ids.end());
    std::sort(order.begin(), order.end());
    if (ids != order) v.push_back("presentation order is not a permutation of the campaign statements");

    if (!config.declares_group(session.profile.recruited_group)) v.push_back("undeclared recruited group");
    if (!session.profile.reported_group.empty() && !config.declares_group(session.profile.reported_group)) {
        v.push_back("undeclared reported group");
    }

    std::set<std::string> seen;
    for (const auto& j : session.judgements) {
        if (!config.find_statement(j.statement_id)) v.push_back("judgement for unknown statement " + j.statement_id);
        if (!seen.insert(j.statement_id).second) v.push_back("duplicate judgement " + j.statement_id);
        if (!is_scale_value(j.value, bounds)) v.push_back("judgement " + j.statement_id + " not a quantized scale value");
    }
    std::set<std::pair<std::string, std::string>> seen_beliefs;
    const auto targets = config.belief_targets();
    for (const auto& b : session.beliefs) {
        if (!config.find_statement(b.statement_id)) v.push_back("belief for unknown statement " + b.statement_id);
        if (std::find(targets.begin(), targets.end(), b.target) == targets.end()) {
            v.push_back("belief target " + b.target.label() + " not allowed by the elicitation mode");
        }
        if (!seen_beliefs.insert({b.statement_id, b.target.label()}).second) {
            v.push_back("duplicate belief " + b.statement_id + " / " + b.target.label());
        }
        if (!is_scale_value(b.lower, bounds) || !is_scale_value(b.upper, bounds) || b.lower > b.upper) {
            v.push_back("belief " + b.statement_id + " is not a valid interval");
        }
    }

    if (session.status == SessionStatus::Complete) {
        for (auto& m : missing_responses(session, config)) v.push_back("complete session missing " + m);
    }
    return report;
}

ExclusionResult apply_exclusions(std::span<const SessionRecord> sessions) {
    ExclusionResult result;
    for (const auto& s : sessions) {
        SessionRecord copy = s;
        if (s.profile.reported_group != s.profile.recruited_group) {
            copy.status = SessionStatus::Excluded;
            copy.exclusion_reason = ExclusionReason::AffiliationMismatch;
            result.excluded.push_back(std::move(copy));
        } else if (s.status != SessionStatus::Complete) {
            copy.status = SessionStatus::Excluded;
            copy.exclusion_reason = s.exclusion_reason.value_or(ExclusionReason::Incomplete);
            result.excluded.push_back(std::move(copy));
        } else {
            result.kept.push_back(std::move(copy));
        }
    }
    return result;
}

std::vector<StatementId> presentation_order(std::uint64_t seed, std::string_view participant_id,
                                            std::span<const StatementId> statement_ids) {
    std::vector<StatementId> order(statement_ids.begin(), statement_ids.end());
    Rng rng = substream(seed, {0x6f72646572ULL, hash_string(participant_id)});
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

Arm assign_arm(std::uint64_t seed, std::uint64_t participant_index, double incentivized_fraction) {
    Rng rng = substream(seed, {0x61726dULL, participant_index});
    return rng.uniform() < incentivized_fraction ? Arm::Incentivized : Arm::Unincentivized;
}

double participant_stance_mean(const SessionRecord& session, std::span<const Statement> statements, Stance stance,
                               ResponseKind kind) {
    if (session.status != SessionStatus::Complete) {
        throw DomainError("session " + session.profile.participant_id + " is not complete");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& st : statements) {
        if (st.stance != stance) continue;
        if (kind == ResponseKind::Judgement) {
            const auto* j = session.find_judgement(st.id);
            if (!j) throw DomainError("session " + session.profile.participant_id + " has no judgement for " + st.id);
            sum += j->value;
        } else {
            // Sorted so the result does not depend on the order beliefs were stored in.
            std::vector<double> mids;
            for (const auto& b : session.beliefs) {
                if (b.statement_id == st.id) mids.push_back(b.midpoint());
            }
            if (mids.empty()) throw DomainError("session " + session.profile.participant_id + " has no belief for " + st.id);
            std::sort(mids.begin(), mids.end());
            double mid_sum = 0.0;
            for (double m : mids) mid_sum += m;
            sum += mid_sum / static_cast<double>(mids.size());
        }
        ++count;
    }
    if (count == 0) throw DomainError("no statement with stance " + std::string(to_string(stance)));
    return sum / static_cast<double>(count);
}

}  // namespace belief
