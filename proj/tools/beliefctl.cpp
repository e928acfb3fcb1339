#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "belief/app/campaign_state.hpp"
#include "belief/app/service.hpp"
#include "belief/app/workflows.hpp"
#include "belief/core_json.hpp"
#include "belief/errors.hpp"
#include "belief/simulation/pipeline.hpp"

#include <httplib.h>

using namespace belief;
using nlohmann::json;

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << text;
}

app::CampaignState load_state(const std::string& log_path) {
    const auto events = app::load_log(log_path);
    app::CampaignState state = app::rebuild_state(events);
    if (!state.config) throw DomainError(log_path + " holds no CampaignCreated event");
    for (const auto& q : state.quarantined) {
        std::cerr << "warning: event " << q.sequence_no << " (" << app::to_string(q.kind)
                  << ") quarantined: " << q.reason << '\n';
    }
    return state;
}

std::string default_data_dir() {
    const char* env = std::getenv("BELIEF_DATA_DIR");
    return env && *env ? env : "data";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Belief-elicitation annotation campaigns: service, simulation and analysis"};
    cli.require_subcommand(1);

    // scaffold
    std::string scaffold_dir = "fixtures";
    auto* scaffold = cli.add_subcommand("scaffold", "Write example campaigns, statement sets and population specs");
    scaffold->add_option("--out", scaffold_dir, "Output directory")->capture_default_str();

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir;
    bool buffered = false;
    auto* serve = cli.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--data-dir", data_dir, "Event log directory (default: $BELIEF_DATA_DIR or ./data)");
    serve->add_flag("--no-fsync", buffered, "Skip fsync after each append");

    // simulate
    std::string spec_path, statements_name, sim_out, campaign_id = "simulated";
    std::uint64_t seed = 0;
    auto* simulate = cli.add_subcommand("simulate", "Simulate a cohort from a population spec into an event log");
    simulate->add_option("--spec", spec_path, "PopulationSpec or CalibrationSummary JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--seed", seed, "Overrides the spec seed");
    simulate->add_option("--statements", statements_name, "exp1, exp2, pilot, or a JSON file");
    simulate->add_option("--out", sim_out, "Event log path")->required();
    simulate->add_option("--campaign-id", campaign_id)->capture_default_str();

    // analyze
    std::string log_path, report_out;
    AnalysisConfig analysis;
    bool no_bootstrap = false, no_lmm = false;
    auto* analyze = cli.add_subcommand("analyze", "Run the statistics report on a campaign log");
    analyze->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
    analyze->add_option("--seed", seed, "Resampling seed (default: campaign seed)");
    analyze->add_option("--n-max", analysis.bootstrap_n_max)->capture_default_str();
    analyze->add_option("--reps", analysis.bootstrap_reps, "Bootstrap replicates")->capture_default_str();
    analyze->add_option("--permutation-reps", analysis.permutation_reps)->capture_default_str();
    analyze->add_flag("--no-bootstrap", no_bootstrap);
    analyze->add_flag("--no-lmm", no_lmm);
    analyze->add_option("--out", report_out, "Report path (default: stdout)");

    // bonuses
    double rate = 0.0, lambda = 0.5;
    std::string anchor_source = "BeliefMidpointMean", ledger_out;
    bool record = false;
    auto* bonuses = cli.add_subcommand("bonuses", "Score belief intervals and print the bonus ledger as CSV");
    bonuses->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
    bonuses->add_option("--rate", rate, "Payment per unit score")->required();
    bonuses->add_option("--lambda", lambda)->capture_default_str();
    bonuses->add_option("--anchor-source", anchor_source)
        ->check(CLI::IsMember({"BeliefMidpointMean", "JudgementMean"}))
        ->capture_default_str();
    bonuses->add_flag("--record", record, "Append a BonusComputed event to the log");
    bonuses->add_option("--out", ledger_out, "CSV path (default: stdout)");

    // bootstrap
    std::string group, target = "judgement-mean", curve_out;
    stats::BootstrapOptions boot;
    auto* bootstrap = cli.add_subcommand("bootstrap", "Bootstrap RMSE curves of judgement and belief means");
    auto* boot_log = bootstrap->add_option("--log", log_path)->check(CLI::ExistingFile);
    auto* boot_spec = bootstrap->add_option("--spec", spec_path, "Simulate the population from a spec")->check(CLI::ExistingFile);
    boot_log->excludes(boot_spec);
    bootstrap->add_option("--n-max", boot.n_max)->capture_default_str();
    bootstrap->add_option("--reps", boot.reps)->capture_default_str();
    bootstrap->add_option("--group", group, "Sample only this group (default: balanced pool)");
    bootstrap->add_option("--seed", seed, "Resampling seed; also the simulation seed with --spec");
    bootstrap->add_option("--target", target)->check(CLI::IsMember({"judgement-mean", "own-mean"}))->capture_default_str();
    bootstrap->add_option("--out", curve_out);

    CLI11_PARSE(cli, argc, argv);

    try {
        if (*scaffold) {
            std::filesystem::create_directories(scaffold_dir);
            for (const auto& [name, doc] : app::scaffold_documents()) {
                emit(doc.dump(2) + "\n", (std::filesystem::path(scaffold_dir) / name).string());
                std::cout << (std::filesystem::path(scaffold_dir) / name).string() << '\n';
            }
        } else if (*serve) {
            app::ServiceOptions options;
            options.data_dir = data_dir.empty() ? default_data_dir() : data_dir;
            options.durability = buffered ? app::Durability::Buffered : app::Durability::Fsync;
            app::Service service(options);
            httplib::Server server;
            app::bind_routes(server, service);
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            std::cerr << "serving " << service.campaign_ids().size() << " campaign(s) from "
                      << options.data_dir->string() << " on http://" << host << ':' << port << '\n';
            if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
        } else if (*simulate) {
            sim::PopulationSpec spec = app::population_from_json(app::read_json_file(spec_path));
            if (simulate->count("--seed")) spec.seed = seed;
            const auto statements = app::resolve_statements(statements_name, spec);
            const auto events = app::simulate_trace(spec, statements, campaign_id);
            app::write_log(sim_out, events);
            std::size_t sessions = 0;
            for (const auto& [g, n] : spec.group_sizes) sessions += n;
            std::cout << "wrote " << events.size() << " events for " << sessions << " sessions to " << sim_out
                      << " (seed " << spec.seed << ")\n";
        } else if (*analyze) {
            const app::CampaignState state = load_state(log_path);
            analysis.seed = analyze->count("--seed") ? seed : state.config->seed;
            analysis.run_bootstrap = !no_bootstrap;
            analysis.run_lmm = !no_lmm;
            const auto sessions = state.sessions_in_order();
            json report = to_json(run_analysis(*state.config, sessions, analysis));
            report["campaign_id"] = state.campaign_id;
            report["seed"] = analysis.seed;
            emit(report.dump(2) + "\n", report_out);
        } else if (*bonuses) {
            const app::CampaignState state = load_state(log_path);
            const app::BonusRun run = app::run_bonuses(state, rate, anchor_source_from_string(anchor_source), lambda);
            if (record) {
                app::EventLog log(log_path);
                log.append(app::EventKind::BonusComputed, app::bonus_payload(run));
            }
            emit(ledger_to_csv(run.ledger), ledger_out);
        } else if (*bootstrap) {
            if (log_path.empty() && spec_path.empty()) throw CLI::RequiredError("--log or --spec");
            CampaignConfig config;
            std::vector<SessionRecord> kept;
            if (!log_path.empty()) {
                const app::CampaignState state = load_state(log_path);
                config = *state.config;
                kept = app::partition_sessions(state).kept;
                boot.seed = bootstrap->count("--seed") ? seed : config.seed;
            } else {
                sim::PopulationSpec spec = app::population_from_json(app::read_json_file(spec_path));
                if (bootstrap->count("--seed")) spec.seed = seed;
                const auto statements = app::resolve_statements("", spec);
                config = sim::campaign_for(spec, statements);
                kept = apply_exclusions(sim::generate_cohort(spec, statements).sessions).kept;
                boot.seed = spec.seed;
            }
            boot.pool = group.empty() ? stats::BootstrapPool::balanced() : stats::BootstrapPool::group_only(group);
            boot.target = target == "own-mean" ? stats::BootstrapTarget::OwnMean : stats::BootstrapTarget::JudgementMean;
            const auto curve = stats::bootstrap_rmse_curve(app::bootstrap_population(config, kept), boot);
            emit(to_json(curve, stats::crossover_point(curve)).dump(2) + "\n", curve_out);
        }
    } catch (const CLI::Error& e) {
        return cli.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
