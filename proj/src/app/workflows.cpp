#include "belief/app/workflows.hpp"

#include <fstream>

#include "belief/core_json.hpp"
#include "belief/errors.hpp"
#include "belief/simulation/fixtures.hpp"
#include "belief/simulation/pipeline.hpp"

namespace belief::app {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

sim::PopulationSpec population_from_json(const json& doc) {
    if (doc.contains("rows")) return sim::calibrate_from_summary(doc.get<sim::CalibrationSummary>());
    sim::PopulationSpec spec = doc.get<sim::PopulationSpec>();
    spec.validate();
    return spec;
}

std::vector<Statement> resolve_statements(const std::string& name, const sim::PopulationSpec& spec) {
    if (name.empty()) {
        return spec.mode == ElicitationMode::PerGroupBelief ? fixtures::exp2_statements() : fixtures::exp1_statements();
    }
    if (name == "exp1") return fixtures::exp1_statements();
    if (name == "exp2") return fixtures::exp2_statements();
    if (name == "pilot") return fixtures::pilot_statements();
    return read_json_file(name).get<std::vector<Statement>>();
}

std::vector<EventRecord> simulate_trace(const sim::PopulationSpec& spec, std::span<const Statement> statements,
                                        const std::string& campaign_id) {
    const sim::SimulatedCohort cohort = sim::generate_cohort(spec, statements);
    const CampaignConfig config = sim::campaign_for(spec, {statements.begin(), statements.end()});
    auto events = events_for_sessions(campaign_id, config, cohort.sessions);
    const std::string ts = utc_timestamp();
    for (auto& e : events) e.timestamp = ts;
    return events;
}

void write_log(const std::filesystem::path& path, std::span<const EventRecord> events) {
    std::filesystem::remove(path);
    EventLog log(path, Durability::Buffered);
    for (const auto& e : events) log.record(e);
}

stats::BootstrapPopulation bootstrap_population(const CampaignConfig& config, std::span<const SessionRecord> kept) {
    const StanceMeans means = stance_means(config, kept);
    return {means.judgement, means.belief, means.groups};
}

std::map<std::string, json> scaffold_documents() {
    std::map<std::string, json> docs;
    docs["exp1_campaign.json"] = fixtures::exp1_campaign();
    docs["exp2_campaign.json"] = fixtures::exp2_campaign();
    docs["pilot_statements.json"] = fixtures::pilot_statements();
    const auto s1 = fixtures::exp1_summary();
    const auto s2 = fixtures::exp2_summary();
    docs["exp1_summary.json"] = s1;
    docs["exp2_summary.json"] = s2;
    docs["exp1_population.json"] = sim::calibrate_from_summary(s1);
    docs["exp2_population.json"] = sim::calibrate_from_summary(s2);
    return docs;
}

}  // namespace belief::app
