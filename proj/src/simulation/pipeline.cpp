#include "belief/simulation/pipeline.hpp"

#include <algorithm>

#include "belief/errors.hpp"
#include "belief/rng.hpp"

namespace belief {

using nlohmann::json;

const NamedTest* AnalysisReport::find_test(std::string_view hypothesis, std::string_view label) const {
    for (const auto& t : tests) {
        if (t.hypothesis == hypothesis && t.label == label) return &t;
    }
    return nullptr;
}

const NamedCurve* AnalysisReport::find_curve(std::string_view label) const {
    for (const auto& c : bootstrap) {
        if (c.label == label) return &c;
    }
    return nullptr;
}

const MedianGap* AnalysisReport::find_gap(Stance s) const {
    for (const auto& g : median_gaps) {
        if (g.stance == s) return &g;
    }
    return nullptr;
}

const DescriptiveCell* AnalysisReport::find_descriptive(const GroupId& g, Stance s, ResponseKind kind) const {
    for (const auto& d : descriptives) {
        if (d.group == g && d.stance == s && d.kind == kind) return &d;
    }
    return nullptr;
}

StanceMeans stance_means(const CampaignConfig& config, std::span<const SessionRecord> kept) {
    StanceMeans m;
    for (Stance s : {Stance::DemocratLeaning, Stance::RepublicanLeaning, Stance::Neutral}) {
        if (std::any_of(config.statements.begin(), config.statements.end(),
                        [s](const Statement& st) { return st.stance == s; })) {
            m.stances.push_back(s);
        }
    }
    const auto rows = static_cast<Eigen::Index>(kept.size());
    const auto cols = static_cast<Eigen::Index>(m.stances.size());
    m.judgement.resize(rows, cols);
    m.belief.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& session = kept[static_cast<std::size_t>(i)];
        m.groups.push_back(session.profile.recruited_group);
        m.arms.push_back(session.arm);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Stance s = m.stances[static_cast<std::size_t>(c)];
            m.judgement(i, c) = participant_stance_mean(session, config.statements, s, ResponseKind::Judgement);
            m.belief(i, c) = participant_stance_mean(session, config.statements, s, ResponseKind::BeliefMidpoint);
        }
    }
    return m;
}

namespace {

template <typename Pred>
Eigen::VectorXd select(const Eigen::MatrixXd& table, Eigen::Index column, Pred keep) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        if (keep(static_cast<std::size_t>(i))) out.push_back(table(i, column));
    }
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

template <typename F>
NamedTest guarded_test(std::string_view hypothesis, std::string label, F&& run) {
    NamedTest t{std::string(hypothesis), std::move(label), std::nullopt, {}};
    try {
        t.result = run();
    } catch (const std::exception& e) {
        t.error = e.what();
    }
    return t;
}

std::string stance_label(Stance s) { return std::string(to_string(s)); }

double statement_belief(const SessionRecord& session, const StatementId& id) {
    std::vector<double> mids;
    for (const auto& b : session.beliefs) {
        if (b.statement_id == id) mids.push_back(b.midpoint());
    }
    if (mids.empty()) throw DomainError("session " + session.profile.participant_id + " has no belief for " + id);
    std::sort(mids.begin(), mids.end());
    double sum = 0.0;
    for (double v : mids) sum += v;
    return sum / static_cast<double>(mids.size());
}

}  // namespace

AnalysisReport run_analysis(const CampaignConfig& config, std::span<const SessionRecord> sessions,
                            const AnalysisConfig& analysis) {
    AnalysisReport report;
    const ExclusionResult partition = apply_exclusions(sessions);
    report.n_sessions = sessions.size();
    report.n_kept = partition.kept.size();
    report.n_excluded = partition.excluded.size();
    for (const auto& g : config.groups) report.kept_per_group[g] = 0;
    for (const auto& s : partition.kept) ++report.kept_per_group[s.profile.recruited_group];
    if (partition.kept.empty()) return report;

    const StanceMeans m = stance_means(config, partition.kept);
    const auto in_group = [&](const GroupId& g) { return [&m, g](std::size_t i) { return m.groups[i] == g; }; };
    const auto in_arm = [&](Arm a) { return [&m, a](std::size_t i) { return m.arms[i] == a; }; };

    for (const auto& g : config.groups) {
        for (std::size_t c = 0; c < m.stances.size(); ++c) {
            const auto col = static_cast<Eigen::Index>(c);
            report.descriptives.push_back(
                {g, m.stances[c], ResponseKind::Judgement, stats::summarize(select(m.judgement, col, in_group(g)))});
            report.descriptives.push_back(
                {g, m.stances[c], ResponseKind::BeliefMidpoint, stats::summarize(select(m.belief, col, in_group(g)))});
        }
    }

    const bool two_groups = config.groups.size() >= 2;
    const GroupId ga = two_groups ? config.groups[0] : GroupId{};
    const GroupId gb = two_groups ? config.groups[1] : GroupId{};

    for (std::size_t c = 0; c < m.stances.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        const std::string st = stance_label(m.stances[c]);

        if (two_groups) {
            const Eigen::VectorXd ja = select(m.judgement, col, in_group(ga));
            const Eigen::VectorXd jb = select(m.judgement, col, in_group(gb));
            const Eigen::VectorXd ba = select(m.belief, col, in_group(ga));
            const Eigen::VectorXd bb = select(m.belief, col, in_group(gb));
            if (ja.size() && jb.size()) {
                report.median_gaps.push_back(
                    {m.stances[c], stats::median(ja) - stats::median(jb), stats::median(ba) - stats::median(bb)});
            }
            for (auto [side, rel] : {std::pair{stats::Sidedness::OneSidedGreater, ">"},
                                     std::pair{stats::Sidedness::OneSidedLess, "<"}}) {
                const std::string cmp = ga + rel + gb;
                report.tests.push_back(guarded_test(kAnnotatorBiasHypothesis, "judgement " + st + " " + cmp,
                                                    [&] { return stats::mann_whitney_u(ja, jb, side, analysis.method); }));
                report.tests.push_back(guarded_test(kBeliefElicitationHypothesis, "belief " + st + " " + cmp,
                                                    [&] { return stats::mann_whitney_u(ba, bb, side, analysis.method); }));
            }
        }

        for (const auto& g : config.groups) {
            const Eigen::VectorXd j = select(m.judgement, col, in_group(g));
            const Eigen::VectorXd b = select(m.belief, col, in_group(g));
            const std::string label = st + " " + g;
            report.tests.push_back(guarded_test(kBeliefElicitationHypothesis, "judgement-vs-belief " + label, [&] {
                return stats::wilcoxon_signed_rank(j, b, stats::Sidedness::TwoSided, analysis.method);
            }));
            report.tests.push_back(guarded_test(kVarianceReduction, label, [&] {
                return stats::permutation_variance_test(j, b, true, analysis.permutation_reps,
                                                        analysis.seed ^ hash_string(label));
            }));
        }

        const Eigen::VectorXd inc = select(m.belief, col, in_arm(Arm::Incentivized));
        const Eigen::VectorXd plain = select(m.belief, col, in_arm(Arm::Unincentivized));
        report.tests.push_back(guarded_test(kIncentiveEffect, "belief " + st + " incentivized-vs-unincentivized", [&] {
            if (inc.size() == 0 || plain.size() == 0) throw DomainError("only one incentive arm among kept sessions");
            return stats::mann_whitney_u(inc, plain, stats::Sidedness::TwoSided, analysis.method);
        }));
    }

    if (analysis.run_lmm) {
        const bool both_arms = std::count(m.arms.begin(), m.arms.end(), Arm::Incentivized) > 0 &&
                               std::count(m.arms.begin(), m.arms.end(), Arm::Unincentivized) > 0;
        std::vector<std::string> covariates;
        if (two_groups) covariates.push_back("is_" + gb);
        if (both_arms) covariates.push_back("is_incentivized");

        for (Stance s : m.stances) {
            for (ResponseKind kind : {ResponseKind::Judgement, ResponseKind::BeliefMidpoint}) {
                NamedLmm block;
                block.label = std::string(kind == ResponseKind::Judgement ? "judgement " : "belief ") + stance_label(s);
                try {
                    std::vector<stats::LmmObservation> obs;
                    for (const auto& session : partition.kept) {
                        for (const auto& st : config.statements) {
                            if (st.stance != s) continue;
                            stats::LmmObservation o;
                            o.participant_id = session.profile.participant_id;
                            if (kind == ResponseKind::Judgement) {
                                const auto* j = session.find_judgement(st.id);
                                if (!j) throw DomainError("missing judgement for " + st.id);
                                o.response = j->value;
                            } else {
                                o.response = statement_belief(session, st.id);
                            }
                            if (two_groups) o.covariates["is_" + gb] = session.profile.recruited_group == gb ? 1.0 : 0.0;
                            if (both_arms) o.covariates["is_incentivized"] = session.arm == Arm::Incentivized ? 1.0 : 0.0;
                            obs.push_back(std::move(o));
                        }
                    }
                    block.fit = stats::fit_random_intercept_lmm(obs, covariates);
                } catch (const std::exception& e) {
                    block.error = e.what();
                }
                report.lmms.push_back(std::move(block));
            }
        }
    }

    if (analysis.run_bootstrap) {
        stats::BootstrapPopulation population{m.judgement, m.belief, m.groups};
        std::vector<stats::BootstrapPool> pools{stats::BootstrapPool::balanced()};
        for (const auto& g : config.groups) {
            if (report.kept_per_group[g] > 0) pools.push_back(stats::BootstrapPool::group_only(g));
        }
        for (const auto& pool : pools) {
            stats::BootstrapOptions opt;
            opt.n_max = analysis.bootstrap_n_max;
            opt.reps = analysis.bootstrap_reps;
            opt.seed = analysis.seed;
            opt.pool = pool;
            NamedCurve nc{pool.label(), stats::bootstrap_rmse_curve(population, opt), std::nullopt};
            nc.crossover = stats::crossover_point(nc.curve);
            report.bootstrap.push_back(std::move(nc));
        }
    }
    return report;
}

AnalysisReport run_pipeline(const sim::PopulationSpec& spec, std::span<const Statement> statements,
                            const AnalysisConfig& analysis) {
    const sim::SimulatedCohort cohort = sim::generate_cohort(spec, statements);
    const CampaignConfig config = sim::campaign_for(spec, {statements.begin(), statements.end()});
    return run_analysis(config, cohort.sessions, analysis);
}

json to_json(const stats::TestResult& r) {
    return json{{"method", r.method},      {"statistic", r.statistic}, {"p_value", r.p_value},
                {"sidedness", stats::to_string(r.sidedness)}, {"n", r.n}, {"exact", r.exact}};
}

json to_json(const stats::LmmFit& f) {
    json coefficients = json::array();
    for (std::size_t i = 0; i < f.names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        coefficients.push_back({{"name", f.names[i]},
                                {"coef", f.beta(k)},
                                {"std_err", f.std_errors(k)},
                                {"z", f.z_scores(k)},
                                {"p_value", f.p_values(k)}});
    }
    return json{{"coefficients", std::move(coefficients)},
                {"sigma2_participant", f.sigma2_participant},
                {"sigma2_residual", f.sigma2_residual},
                {"theta", f.theta},
                {"log_likelihood", f.log_likelihood},
                {"n_observations", f.n_observations},
                {"n_participants", f.n_participants}};
}

json to_json(const stats::BootstrapCurve& c, const std::optional<std::size_t>& crossover) {
    return json{{"pool", c.pool},
                {"reps", c.reps},
                {"seed", c.seed},
                {"n_values", c.n_values},
                {"rmse_judgement", std::vector<double>(c.rmse_judgement.begin(), c.rmse_judgement.end())},
                {"rmse_belief", std::vector<double>(c.rmse_belief.begin(), c.rmse_belief.end())},
                {"crossover_point", crossover ? json(*crossover) : json(nullptr)}};
}

json to_json(const AnalysisReport& report) {
    json out;
    out["sessions"] = {{"total", report.n_sessions},
                       {"kept", report.n_kept},
                       {"excluded", report.n_excluded},
                       {"kept_per_group", report.kept_per_group}};

    json desc = json::array();
    for (const auto& d : report.descriptives) {
        desc.push_back({{"group", d.group},
                        {"stance", to_string(d.stance)},
                        {"kind", d.kind == ResponseKind::Judgement ? "judgement" : "belief_midpoint"},
                        {"n", d.summary.n},
                        {"mean", d.summary.mean},
                        {"sd", d.summary.sd},
                        {"median", d.summary.median},
                        {"q1", d.summary.q1},
                        {"q3", d.summary.q3}});
    }
    out["descriptives"] = std::move(desc);

    json gaps = json::array();
    for (const auto& g : report.median_gaps) {
        gaps.push_back({{"stance", to_string(g.stance)}, {"judgement", g.judgement}, {"belief", g.belief}});
    }
    out["median_gaps"] = std::move(gaps);

    for (auto h : {kAnnotatorBiasHypothesis, kBeliefElicitationHypothesis, kVarianceReduction, kIncentiveEffect}) {
        out[std::string(h)] = json::array();
    }
    for (const auto& t : report.tests) {
        json entry = t.result ? to_json(*t.result) : json{{"error", t.error}};
        entry["label"] = t.label;
        out[t.hypothesis].push_back(std::move(entry));
    }

    json lmms = json::array();
    for (const auto& l : report.lmms) {
        json entry = l.fit ? to_json(*l.fit) : json{{"error", l.error}};
        entry["label"] = l.label;
        lmms.push_back(std::move(entry));
    }
    out["lmm"] = std::move(lmms);

    json curves = json::array();
    for (const auto& c : report.bootstrap) curves.push_back(to_json(c.curve, c.crossover));
    out["bootstrap"] = std::move(curves);
    return out;
}

}  // namespace belief
