#include "belief/app/campaign_state.hpp"

#include <algorithm>

#include "belief/core_json.hpp"
#include "belief/errors.hpp"
#include "belief/format.hpp"

namespace belief::app {

using nlohmann::json;

std::vector<SessionRecord> CampaignState::sessions_in_order() const {
    std::vector<SessionRecord> out;
    out.reserve(open_order.size());
    for (const auto& pid : open_order) out.push_back(sessions.at(pid));
    return out;
}

namespace {

EventCheck reject(Verdict v, std::string reason) { return {v, std::move(reason)}; }

const EventCheck kApply{};

struct SessionLookup {
    const SessionRecord* session = nullptr;
    EventCheck check;
};

SessionLookup open_session(const CampaignState& s, const json& payload) {
    if (!s.config) return {nullptr, reject(Verdict::Conflict, "campaign not created")};
    const std::string pid = payload.at("participant_id").get<std::string>();
    auto it = s.sessions.find(pid);
    if (it == s.sessions.end()) return {nullptr, reject(Verdict::NotFound, "unknown participant " + pid)};
    return {&it->second, kApply};
}

EventCheck require_in_progress(const SessionRecord& session) {
    if (session.status != SessionStatus::InProgress) {
        return reject(Verdict::Conflict, "session " + session.profile.participant_id + " is already finalized");
    }
    return kApply;
}

// Validates and, when `out` is non-null and the event is legal, mutates *out
// (which aliases `s`).
EventCheck process(const CampaignState& s, const EventRecord& e, CampaignState* out) {
    const json& p = e.payload;
    switch (e.kind) {
        case EventKind::CampaignCreated: {
            if (s.config) return reject(Verdict::Conflict, "campaign already created");
            CampaignConfig config = p.at("config").get<CampaignConfig>();
            const ValidationReport report = validate_campaign(config);
            if (!report.ok()) return reject(Verdict::Invalid, "invalid campaign: " + report.violations.front());
            if (out) {
                out->campaign_id = p.at("campaign_id").get<std::string>();
                out->config = std::move(config);
            }
            return kApply;
        }
        case EventKind::SessionOpened: {
            if (!s.config) return reject(Verdict::Conflict, "campaign not created");
            SessionRecord session;
            session.profile.participant_id = p.at("participant_id").get<std::string>();
            session.profile.recruited_group = p.at("recruited_group").get<std::string>();
            session.arm = arm_from_string(p.at("arm").get<std::string>());
            session.presentation_order = p.at("presentation_order").get<std::vector<StatementId>>();
            if (session.profile.participant_id.empty()) return reject(Verdict::Invalid, "empty participant id");
            if (s.sessions.count(session.profile.participant_id)) {
                return reject(Verdict::Conflict, "participant " + session.profile.participant_id + " already open");
            }
            const ValidationReport report = validate_session(session, *s.config);
            if (!report.ok()) return reject(Verdict::Invalid, report.violations.front());
            if (out) {
                out->open_order.push_back(session.profile.participant_id);
                out->sessions.emplace(session.profile.participant_id, std::move(session));
            }
            return kApply;
        }
        case EventKind::DemographicsSubmitted: {
            auto [session, check] = open_session(s, p);
            if (!session) return check;
            if (auto c = require_in_progress(*session); !c.accepted()) return c;
            const std::string reported = p.at("reported_group").get<std::string>();
            const auto demographics = p.value("demographics", std::map<std::string, std::string>{});
            if (!s.config->declares_group(reported)) return reject(Verdict::Invalid, "undeclared group " + reported);
            if (!session->profile.reported_group.empty()) {
                if (session->profile.reported_group == reported && session->profile.demographics == demographics) {
                    return reject(Verdict::Duplicate, "demographics already recorded");
                }
                return reject(Verdict::Conflict, "demographics already recorded with different values");
            }
            if (out) {
                auto& target = out->sessions.at(session->profile.participant_id).profile;
                target.reported_group = reported;
                target.demographics = demographics;
            }
            return kApply;
        }
        case EventKind::JudgementSubmitted: {
            auto [session, check] = open_session(s, p);
            if (!session) return check;
            if (auto c = require_in_progress(*session); !c.accepted()) return c;
            JudgementResponse j = p.get<JudgementResponse>();
            if (!s.config->find_statement(j.statement_id)) {
                return reject(Verdict::NotFound, "unknown statement " + j.statement_id);
            }
            if (!is_scale_value(j.value, s.config->bounds)) {
                return reject(Verdict::Invalid, "judgement is not a 2-decimal value on the scale");
            }
            if (const auto* prior = session->find_judgement(j.statement_id)) {
                if (prior->value == j.value) return reject(Verdict::Duplicate, "judgement already recorded");
                return reject(Verdict::Conflict, "judgement for " + j.statement_id + " already recorded");
            }
            if (out) out->sessions.at(session->profile.participant_id).judgements.push_back(std::move(j));
            return kApply;
        }
        case EventKind::BeliefSubmitted: {
            auto [session, check] = open_session(s, p);
            if (!session) return check;
            if (auto c = require_in_progress(*session); !c.accepted()) return c;
            BeliefInterval b = p.get<BeliefInterval>();
            if (!s.config->find_statement(b.statement_id)) {
                return reject(Verdict::NotFound, "unknown statement " + b.statement_id);
            }
            const auto targets = s.config->belief_targets();
            if (std::find(targets.begin(), targets.end(), b.target) == targets.end()) {
                return reject(Verdict::Invalid, "target " + b.target.label() + " is not elicited in this campaign");
            }
            const auto& bounds = s.config->bounds;
            if (!is_scale_value(b.lower, bounds) || !is_scale_value(b.upper, bounds) || b.lower > b.upper) {
                return reject(Verdict::Invalid, "interval must satisfy a <= lower <= upper <= b on the 2-decimal scale");
            }
            if (const auto* prior = session->find_belief(b.statement_id, b.target)) {
                if (*prior == b) return reject(Verdict::Duplicate, "belief already recorded");
                return reject(Verdict::Conflict, "belief for " + b.statement_id + " / " + b.target.label() +
                                                     " already recorded");
            }
            if (session->judgements.size() < s.config->statements.size()) {
                return reject(Verdict::Conflict, "beliefs open after all judgements are submitted");
            }
            if (out) out->sessions.at(session->profile.participant_id).beliefs.push_back(std::move(b));
            return kApply;
        }
        case EventKind::SessionFinalized: {
            auto [session, check] = open_session(s, p);
            if (!session) return check;
            if (session->status == SessionStatus::Complete) return reject(Verdict::Duplicate, "already finalized");
            if (session->profile.reported_group.empty()) return reject(Verdict::Conflict, "demographics missing");
            const auto missing = missing_responses(*session, *s.config);
            if (!missing.empty()) return reject(Verdict::Conflict, "missing " + missing.front());
            if (out) out->sessions.at(session->profile.participant_id).status = SessionStatus::Complete;
            return kApply;
        }
        case EventKind::ExclusionApplied: {
            auto [session, check] = open_session(s, p);
            if (!session) return check;
            const ExclusionReason reason = exclusion_reason_from_string(p.at("reason").get<std::string>());
            auto it = s.recorded_exclusions.find(session->profile.participant_id);
            if (it != s.recorded_exclusions.end()) {
                if (it->second == reason) return reject(Verdict::Duplicate, "exclusion already recorded");
                return reject(Verdict::Conflict, "a different exclusion is already recorded");
            }
            if (out) out->recorded_exclusions[session->profile.participant_id] = reason;
            return kApply;
        }
        case EventKind::BonusComputed: {
            if (!s.config) return reject(Verdict::Conflict, "campaign not created");
            std::vector<Anchor> anchors;
            for (const auto& a : p.at("anchors")) {
                anchors.push_back({a.at("statement_id").get<std::string>(),
                                   PopulationTarget::parse(a.at("target").get<std::string>()), a.at("x").get<double>()});
            }
            BonusLedger ledger;
            for (const auto& row : p.at("entries")) {
                BonusEntry entry;
                entry.participant_id = row.at("participant_id").get<std::string>();
                entry.statement_id = row.at("statement_id").get<std::string>();
                entry.target = PopulationTarget::parse(row.at("target").get<std::string>());
                entry.lower = row.at("lower").get<double>();
                entry.upper = row.at("upper").get<double>();
                entry.x = row.at("x").get<double>();
                entry.score = row.at("score").get<double>();
                entry.bonus = row.at("bonus").get<double>();
                if (!s.sessions.count(entry.participant_id)) {
                    return reject(Verdict::NotFound, "bonus for unknown participant " + entry.participant_id);
                }
                ledger.totals[entry.participant_id] += entry.bonus;
                ledger.entries.push_back(std::move(entry));
            }
            if (out) {
                out->anchors = std::move(anchors);
                out->ledger = std::move(ledger);
            }
            return kApply;
        }
    }
    return reject(Verdict::Invalid, "unknown event kind");
}

}  // namespace

EventCheck check_event(const CampaignState& state, const EventRecord& event) {
    try {
        return process(state, event, nullptr);
    } catch (const std::exception& e) {
        return reject(Verdict::Invalid, std::string("malformed payload: ") + e.what());
    }
}

void apply_event(CampaignState& state, const EventRecord& event) {
    EventCheck check;
    try {
        check = process(state, event, nullptr);
        if (check.verdict == Verdict::Apply) process(state, event, &state);
    } catch (const std::exception& e) {
        check = reject(Verdict::Invalid, std::string("malformed payload: ") + e.what());
    }
    if (!check.accepted()) state.quarantined.push_back({event.sequence_no, event.kind, check.reason});
    state.last_sequence = event.sequence_no;
}

CampaignState rebuild_state(std::span<const EventRecord> events) {
    CampaignState state;
    for (const auto& e : events) apply_event(state, e);
    return state;
}

json campaign_created_payload(const std::string& campaign_id, const CampaignConfig& config) {
    return json{{"campaign_id", campaign_id}, {"config", config}};
}

json session_opened_payload(const SessionRecord& session) {
    return json{{"participant_id", session.profile.participant_id},
                {"recruited_group", session.profile.recruited_group},
                {"arm", to_string(session.arm)},
                {"presentation_order", session.presentation_order}};
}

json demographics_payload(const ParticipantId& pid, const GroupId& reported_group,
                          const std::map<std::string, std::string>& demographics) {
    return json{{"participant_id", pid}, {"reported_group", reported_group}, {"demographics", demographics}};
}

json judgement_payload(const ParticipantId& pid, const JudgementResponse& j) {
    json out = j;
    out["participant_id"] = pid;
    return out;
}

json belief_payload(const ParticipantId& pid, const BeliefInterval& b) {
    json out = b;
    out["participant_id"] = pid;
    return out;
}

json finalize_payload(const ParticipantId& pid) { return json{{"participant_id", pid}}; }

json exclusion_payload(const ParticipantId& pid, ExclusionReason reason) {
    return json{{"participant_id", pid}, {"reason", to_string(reason)}};
}

json bonus_payload(double rate, const IncentiveParams& params, std::span<const Anchor> anchors,
                   const BonusLedger& ledger) {
    json a = json::array();
    for (const auto& anchor : anchors) {
        a.push_back({{"statement_id", anchor.statement_id}, {"target", anchor.target.label()}, {"x", anchor.x}});
    }
    json rows = json::array();
    for (const auto& e : ledger.entries) {
        rows.push_back({{"participant_id", e.participant_id},
                        {"statement_id", e.statement_id},
                        {"target", e.target.label()},
                        {"lower", e.lower},
                        {"upper", e.upper},
                        {"x", e.x},
                        {"score", e.score},
                        {"bonus", e.bonus}});
    }
    return json{{"rate", rate},
                {"lambda", params.lambda},
                {"anchor_source", to_string(params.anchor_source)},
                {"anchors", std::move(a)},
                {"entries", std::move(rows)}};
}

std::vector<EventRecord> events_for_sessions(const std::string& campaign_id, const CampaignConfig& config,
                                             std::span<const SessionRecord> sessions) {
    std::vector<EventRecord> events;
    auto push = [&](EventKind kind, json payload) {
        events.push_back({events.size() + 1, "", kind, std::move(payload)});
    };
    push(EventKind::CampaignCreated, campaign_created_payload(campaign_id, config));
    for (const auto& s : sessions) {
        const auto& pid = s.profile.participant_id;
        push(EventKind::SessionOpened, session_opened_payload(s));
        if (!s.profile.reported_group.empty()) {
            push(EventKind::DemographicsSubmitted, demographics_payload(pid, s.profile.reported_group, s.profile.demographics));
        }
        for (const auto& j : s.judgements) push(EventKind::JudgementSubmitted, judgement_payload(pid, j));
        for (const auto& b : s.beliefs) push(EventKind::BeliefSubmitted, belief_payload(pid, b));
        if (s.status == SessionStatus::Complete) push(EventKind::SessionFinalized, finalize_payload(pid));
    }
    return events;
}

ExclusionResult partition_sessions(const CampaignState& state) {
    const auto sessions = state.sessions_in_order();
    return apply_exclusions(sessions);
}

ExportSummary summarize_export(const CampaignState& state) {
    ExportSummary summary;
    const ExclusionResult partition = partition_sessions(state);
    summary.total_sessions = state.sessions.size();
    summary.kept = partition.kept.size();
    summary.excluded = partition.excluded.size();
    for (const auto& s : partition.excluded) {
        ++summary.excluded_by_reason[std::string(to_string(s.exclusion_reason.value_or(ExclusionReason::Incomplete)))];
    }
    if (state.config) summary.rows = summary.kept * state.config->statements.size() * state.config->belief_targets().size();
    return summary;
}

ResponseExport export_responses(const CampaignState& state, std::string_view format) {
    if (format != "csv") throw ConfigurationError("unsupported export format \"" + std::string(format) + "\"");
    if (!state.config) throw EmptyExportError("campaign has not been created");
    const CampaignConfig& config = *state.config;

    ResponseExport out;
    out.summary = summarize_export(state);
    const ExclusionResult partition = partition_sessions(state);
    if (partition.kept.empty()) throw EmptyExportError("no kept sessions to export");

    const auto targets = config.belief_targets();
    std::string doc(kExportHeader);
    doc += '\n';
    for (const auto& s : partition.kept) {
        for (const auto& st : config.statements) {
            const auto rank_it = std::find(s.presentation_order.begin(), s.presentation_order.end(), st.id);
            const auto rank = static_cast<std::size_t>(rank_it - s.presentation_order.begin()) + 1;
            const auto* j = s.find_judgement(st.id);
            for (const auto& t : targets) {
                const auto* b = s.find_belief(st.id, t);
                doc += csv_field(s.profile.participant_id) + ',' + csv_field(s.profile.recruited_group) + ',' +
                       csv_field(s.profile.reported_group) + ',' + std::string(to_string(s.arm)) + ',' +
                       csv_field(st.id) + ',' + std::string(to_string(st.stance)) + ',' +
                       (j ? format_number(j->value) : "") + ',' + csv_field(t.label()) + ',' +
                       (b ? format_number(b->lower) : "") + ',' + (b ? format_number(b->upper) : "") + ',' +
                       std::to_string(rank) + '\n';
            }
        }
    }
    out.document = std::move(doc);
    return out;
}

BonusRun run_bonuses(const CampaignState& state, double rate, AnchorSource source, double lambda) {
    if (!state.config) throw DomainError("campaign has not been created");
    BonusRun run;
    run.rate = rate;
    run.params.lambda = lambda;
    run.params.bounds = state.config->bounds;
    run.params.anchor_source = source;
    run.params.validate();
    const auto kept = partition_sessions(state).kept;
    if (kept.empty()) throw DomainError("no kept sessions to score");
    for (const auto& st : state.config->statements) {
        for (const auto& t : state.config->belief_targets()) {
            run.anchors.push_back(compute_anchor(kept, st.id, t, run.params));
        }
    }
    run.ledger = compute_bonuses(kept, run.anchors, run.params, rate);
    return run;
}

json bonus_payload(const BonusRun& run) { return bonus_payload(run.rate, run.params, run.anchors, run.ledger); }

json to_json(const ExportSummary& s) {
    return json{{"total_sessions", s.total_sessions},
                {"kept", s.kept},
                {"excluded", s.excluded},
                {"excluded_by_reason", s.excluded_by_reason},
                {"rows", s.rows}};
}

}  // namespace belief::app
