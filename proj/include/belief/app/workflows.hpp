#pragma once

#include <filesystem>
#include <json.hpp>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "belief/app/campaign_state.hpp"
#include "belief/app/event_log.hpp"
#include "belief/simulation/population.hpp"
#include "belief/stats/resampling.hpp"

namespace belief::app {

/// A population document is either a PopulationSpec or a CalibrationSummary
/// (recognised by its "rows" key), which is calibrated on load.
sim::PopulationSpec population_from_json(const nlohmann::json& doc);

/// "exp1", "exp2", "pilot", or a path to a JSON array of statements. Empty
/// picks the bundled set matching the spec's elicitation mode.
std::vector<Statement> resolve_statements(const std::string& name, const sim::PopulationSpec& spec);

/// Simulated cohort replayed as a campaign event trace with timestamps.
std::vector<EventRecord> simulate_trace(const sim::PopulationSpec& spec, std::span<const Statement> statements,
                                        const std::string& campaign_id);

/// Writes `events` to a fresh log at `path`, replacing any existing file.
void write_log(const std::filesystem::path& path, std::span<const EventRecord> events);

/// Per-participant stance means of the kept sessions, as bootstrap input.
stats::BootstrapPopulation bootstrap_population(const CampaignConfig& config, std::span<const SessionRecord> kept);

/// File name to document for the bundled example campaigns, statement sets,
/// summary statistics and calibrated population specs.
std::map<std::string, nlohmann::json> scaffold_documents();

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace belief::app
