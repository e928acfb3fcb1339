#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "belief/app/event_log.hpp"
#include "belief/core_model.hpp"
#include "belief/elicitation.hpp"

namespace belief::app {

struct QuarantinedEvent {
    std::uint64_t sequence_no = 0;
    EventKind kind = EventKind::CampaignCreated;
    std::string reason;

    friend bool operator==(const QuarantinedEvent&, const QuarantinedEvent&) = default;
};

struct CampaignState {
    std::string campaign_id;
    std::optional<CampaignConfig> config;
    std::map<ParticipantId, SessionRecord> sessions;
    std::vector<ParticipantId> open_order;
    std::map<ParticipantId, ExclusionReason> recorded_exclusions;
    std::vector<Anchor> anchors;
    std::optional<BonusLedger> ledger;
    std::vector<QuarantinedEvent> quarantined;
    std::uint64_t last_sequence = 0;

    /// Sessions in the order they were opened.
    std::vector<SessionRecord> sessions_in_order() const;

    friend bool operator==(const CampaignState&, const CampaignState&) = default;
};

enum class Verdict { Apply, Duplicate, NotFound, Conflict, Invalid };

struct EventCheck {
    Verdict verdict = Verdict::Apply;
    std::string reason;
    bool accepted() const { return verdict == Verdict::Apply || verdict == Verdict::Duplicate; }
};

/// Whether `event` is a legal next step for `state`. Duplicate means an exact
/// resubmission of something already recorded, which changes nothing.
EventCheck check_event(const CampaignState& state, const EventRecord& event);

/// Folds one event. Illegal transitions are quarantined rather than thrown.
void apply_event(CampaignState& state, const EventRecord& event);

CampaignState rebuild_state(std::span<const EventRecord> events);

// Payload builders shared by the service and the trace generator.
nlohmann::json campaign_created_payload(const std::string& campaign_id, const CampaignConfig& config);
nlohmann::json session_opened_payload(const SessionRecord& session);
nlohmann::json demographics_payload(const ParticipantId& pid, const GroupId& reported_group,
                                    const std::map<std::string, std::string>& demographics);
nlohmann::json judgement_payload(const ParticipantId& pid, const JudgementResponse& j);
nlohmann::json belief_payload(const ParticipantId& pid, const BeliefInterval& b);
nlohmann::json finalize_payload(const ParticipantId& pid);
nlohmann::json exclusion_payload(const ParticipantId& pid, ExclusionReason reason);
nlohmann::json bonus_payload(double rate, const IncentiveParams& params, std::span<const Anchor> anchors,
                             const BonusLedger& ledger);

/// Event trace that replays `sessions` through the normal session flow:
/// open, demographics, judgements, beliefs, finalize (for Complete sessions).
std::vector<EventRecord> events_for_sessions(const std::string& campaign_id, const CampaignConfig& config,
                                             std::span<const SessionRecord> sessions);

struct ExportSummary {
    std::size_t total_sessions = 0;
    std::size_t kept = 0;
    std::size_t excluded = 0;
    std::map<std::string, std::size_t> excluded_by_reason;
    std::size_t rows = 0;
};

struct ResponseExport {
    std::string document;
    ExportSummary summary;
};

inline constexpr std::string_view kExportHeader =
    "participant_id,recruited_group,reported_group,arm,statement_id,stance,judgement,belief_target,belief_lower,"
    "belief_upper,presentation_rank";

/// CSV of kept sessions, one row per (participant, statement, belief target).
/// Throws EmptyExportError when nothing is kept and ConfigurationError for an
/// unknown format.
ResponseExport export_responses(const CampaignState& state, std::string_view format = "csv");

/// Counts the export would report, without building the document. Never
/// throws for an empty campaign.
ExportSummary summarize_export(const CampaignState& state);

nlohmann::json to_json(const ExportSummary& s);

/// Kept/excluded partition of the campaign's sessions.
ExclusionResult partition_sessions(const CampaignState& state);

struct BonusRun {
    IncentiveParams params;
    double rate = 0.0;
    std::vector<Anchor> anchors;
    BonusLedger ledger;
};

/// Anchors for every (statement, target) pair over the kept sessions, then the
/// ledger for the kept incentivized sessions.
BonusRun run_bonuses(const CampaignState& state, double rate, AnchorSource source, double lambda = 0.5);

nlohmann::json bonus_payload(const BonusRun& run);

}  // namespace belief::app
