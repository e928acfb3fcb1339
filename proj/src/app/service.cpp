#include "belief/app/service.hpp"

#include <charconv>
#include <cstdio>
#include <regex>

#include "belief/core_json.hpp"
#include "belief/errors.hpp"
#include "belief/rng.hpp"
#include "belief/simulation/pipeline.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro that
// collides with Eigen parameter names.
#include <httplib.h>

namespace belief::app {

using nlohmann::json;

struct Service::Campaign {
    std::string id;
    std::mutex mutex;
    EventLog log;
    CampaignState state;
    std::shared_ptr<const CampaignState> snapshot;
};

struct Service::WriteResult {
    EventCheck check;
    bool appended = false;
};

namespace {

ApiResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

ApiResponse error_response(int status, const std::string& message) {
    return json_response(status, json{{"error", message}});
}

int status_for(Verdict v) {
    switch (v) {
        case Verdict::Apply:
        case Verdict::Duplicate: return 200;
        case Verdict::NotFound: return 404;
        case Verdict::Conflict: return 409;
        case Verdict::Invalid: return 422;
    }
    return 500;
}

class BadRequest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    json j = json::parse(body);
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
}

// Maps library exceptions to HTTP statuses so each handler only covers its
// happy path.
template <typename F>
ApiResponse guarded(F&& f) {
    try {
        return f();
    } catch (const json::parse_error& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what());
    } catch (const BadRequest& e) {
        return error_response(400, e.what());
    } catch (const json::exception& e) {
        return error_response(400, std::string("bad request: ") + e.what());
    } catch (const RangeError& e) {
        return error_response(422, e.what());
    } catch (const EmptyExportError& e) {
        return error_response(409, e.what());
    } catch (const IoError& e) {
        return error_response(503, std::string("storage failure: ") + e.what());
    } catch (const ConsistencyError& e) {
        return error_response(500, e.what());
    } catch (const std::invalid_argument& e) {
        return error_response(422, e.what());
    } catch (const std::domain_error& e) {
        return error_response(422, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

bool valid_campaign_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9_-]{1,64}");
    return std::regex_match(id, pattern);
}

json session_view(const SessionRecord& s, const CampaignConfig& config) {
    json targets = json::array();
    for (const auto& t : config.belief_targets()) targets.push_back(t.label());
    json view = s;
    view["participant_id"] = s.profile.participant_id;
    view["belief_targets"] = std::move(targets);
    return view;
}

std::uint64_t query_uint(const QueryParams& q, const std::string& key, std::uint64_t fallback) {
    auto it = q.find(key);
    if (it == q.end()) return fallback;
    const std::string& text = it->second;
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
        throw BadRequest("query parameter " + key + " is not a non-negative integer");
    }
    return v;
}

bool query_flag(const QueryParams& q, const std::string& key, bool fallback) {
    auto it = q.find(key);
    if (it == q.end()) return fallback;
    return it->second != "0" && it->second != "false";
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    if (!options_.data_dir) return;
    std::filesystem::create_directories(*options_.data_dir);
    for (const auto& entry : std::filesystem::directory_iterator(*options_.data_dir)) {
        if (entry.path().extension() != ".ndjson") continue;
        auto c = std::make_shared<Campaign>();
        c->id = entry.path().stem().string();
        try {
            c->log = EventLog(entry.path(), options_.durability);
        } catch (const ParseError& e) {
            throw ParseError(entry.path().string() + ": " + e.what(), e.sequence_no());
        }
        c->state = rebuild_state(c->log.events());
        campaigns_.emplace(c->id, std::move(c));
    }
}

Service::~Service() = default;

std::vector<std::string> Service::campaign_ids() const {
    std::shared_lock lock(campaigns_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, c] : campaigns_) ids.push_back(id);
    return ids;
}

std::shared_ptr<Service::Campaign> Service::find(const std::string& cid) const {
    std::shared_lock lock(campaigns_mutex_);
    auto it = campaigns_.find(cid);
    return it == campaigns_.end() ? nullptr : it->second;
}

std::shared_ptr<const CampaignState> Service::snapshot(const std::string& cid) const {
    auto c = find(cid);
    if (!c) return nullptr;
    std::lock_guard lock(c->mutex);
    if (!c->snapshot) c->snapshot = std::make_shared<const CampaignState>(c->state);
    return c->snapshot;
}

Service::WriteResult Service::write(Campaign& c, EventKind kind, json payload) {
    EventRecord e{c.log.last_sequence() + 1, utc_timestamp(), kind, std::move(payload)};
    WriteResult result{check_event(c.state, e), false};
    if (result.check.verdict != Verdict::Apply) return result;
    c.log.record(e);
    apply_event(c.state, e);
    c.snapshot.reset();
    result.appended = true;
    return result;
}

std::string Service::next_campaign_id() const {
    for (std::size_t n = campaigns_.size() + 1;; ++n) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "c%04zu", n);
        const std::string id = buf;
        if (campaigns_.count(id)) continue;
        if (options_.data_dir && std::filesystem::exists(*options_.data_dir / (id + ".ndjson"))) continue;
        return id;
    }
}

ApiResponse Service::create_campaign(const std::string& body) {
    return guarded([&] {
        const json j = parse_body(body);
        const CampaignConfig config = j.get<CampaignConfig>();
        const ValidationReport report = validate_campaign(config);
        if (!report.ok()) return json_response(422, json{{"error", "invalid campaign"}, {"violations", report.violations}});

        std::unique_lock lock(campaigns_mutex_);
        std::string id = j.value("campaign_id", "");
        if (id.empty()) {
            id = next_campaign_id();
        } else if (!valid_campaign_id(id)) {
            return error_response(422, "campaign_id must be 1-64 characters of [A-Za-z0-9_-]");
        } else if (campaigns_.count(id)) {
            return error_response(409, "campaign " + id + " already exists");
        }

        auto c = std::make_shared<Campaign>();
        c->id = id;
        if (options_.data_dir) c->log = EventLog(*options_.data_dir / (id + ".ndjson"), options_.durability);
        const WriteResult w = write(*c, EventKind::CampaignCreated, campaign_created_payload(id, config));
        if (!w.appended) return error_response(status_for(w.check.verdict), w.check.reason);
        campaigns_.emplace(id, std::move(c));
        return json_response(201, json{{"campaign_id", id}});
    });
}

ApiResponse Service::get_campaign(const std::string& cid) {
    return guarded([&] {
        auto state = snapshot(cid);
        if (!state) return error_response(404, "unknown campaign " + cid);
        const ExportSummary summary = summarize_export(*state);
        return json_response(200, json{{"campaign_id", cid},
                                       {"config", *state->config},
                                       {"sessions", to_json(summary)},
                                       {"quarantined", state->quarantined.size()},
                                       {"last_sequence", state->last_sequence}});
    });
}

ApiResponse Service::open_session(const std::string& cid, const std::string& body) {
    return guarded([&] {
        auto c = find(cid);
        if (!c) return error_response(404, "unknown campaign " + cid);
        const json j = parse_body(body);
        const GroupId group = j.value("recruited_group", "");
        std::string pid = j.value("participant_id", "");

        std::lock_guard lock(c->mutex);
        const CampaignConfig& config = *c->state.config;
        if (!config.declares_group(group)) return error_response(422, "recruited_group must be a declared group");

        if (!pid.empty()) {
            auto it = c->state.sessions.find(pid);
            if (it != c->state.sessions.end()) {
                const SessionRecord& existing = it->second;
                if (existing.status != SessionStatus::InProgress) {
                    return error_response(409, "session " + pid + " is already finalized");
                }
                if (existing.profile.recruited_group != group) {
                    return error_response(409, "session " + pid + " was opened for another group");
                }
                json view = session_view(existing, config);
                view["resumed"] = true;
                return json_response(200, view);
            }
        } else {
            const std::uint64_t index = c->state.open_order.size();
            for (std::uint64_t attempt = 0; pid.empty() || c->state.sessions.count(pid); ++attempt) {
                Rng rng = substream(config.seed, {hash_string("participant"), index, attempt});
                char buf[32];
                std::snprintf(buf, sizeof buf, "p%012llx", static_cast<unsigned long long>(rng() >> 16));
                pid = buf;
            }
        }

        SessionRecord session;
        session.profile.participant_id = pid;
        session.profile.recruited_group = group;
        session.arm = assign_arm(config.seed, c->state.open_order.size(), config.incentive_arms.incentivized_fraction);
        const auto ids = config.statement_ids();
        session.presentation_order = presentation_order(config.seed, pid, ids);

        const WriteResult w = write(*c, EventKind::SessionOpened, session_opened_payload(session));
        if (!w.appended) return error_response(status_for(w.check.verdict), w.check.reason);
        json view = session_view(c->state.sessions.at(pid), config);
        view["resumed"] = false;
        return json_response(201, view);
    });
}

ApiResponse Service::get_session(const std::string& cid, const std::string& pid) {
    return guarded([&] {
        auto state = snapshot(cid);
        if (!state) return error_response(404, "unknown campaign " + cid);
        auto it = state->sessions.find(pid);
        if (it == state->sessions.end()) return error_response(404, "unknown participant " + pid);
        json view = session_view(it->second, *state->config);
        if (auto ex = state->recorded_exclusions.find(pid); ex != state->recorded_exclusions.end()) {
            view["exclusion_reason"] = to_string(ex->second);
        }
        return json_response(200, view);
    });
}

ApiResponse Service::submit_demographics(const std::string& cid, const std::string& pid, const std::string& body) {
    return guarded([&] {
        auto c = find(cid);
        if (!c) return error_response(404, "unknown campaign " + cid);
        const json j = parse_body(body);
        const GroupId reported = j.at("reported_group").get<std::string>();
        const auto demographics = j.value("demographics", std::map<std::string, std::string>{});

        std::lock_guard lock(c->mutex);
        const WriteResult w = write(*c, EventKind::DemographicsSubmitted, demographics_payload(pid, reported, demographics));
        if (!w.check.accepted()) return error_response(status_for(w.check.verdict), w.check.reason);
        return json_response(200, json{{"participant_id", pid},
                                       {"reported_group", reported},
                                       {"duplicate", w.check.verdict == Verdict::Duplicate}});
    });
}

ApiResponse Service::submit_judgement(const std::string& cid, const std::string& pid, const std::string& body) {
    return guarded([&] {
        auto c = find(cid);
        if (!c) return error_response(404, "unknown campaign " + cid);
        const json j = parse_body(body);

        std::lock_guard lock(c->mutex);
        JudgementResponse r;
        r.statement_id = j.at("statement_id").get<std::string>();
        r.value = quantize(j.at("value").get<double>(), c->state.config->bounds);
        const WriteResult w = write(*c, EventKind::JudgementSubmitted, judgement_payload(pid, r));
        if (!w.check.accepted()) return error_response(status_for(w.check.verdict), w.check.reason);
        json out = r;
        out["participant_id"] = pid;
        out["duplicate"] = w.check.verdict == Verdict::Duplicate;
        return json_response(200, out);
    });
}

ApiResponse Service::submit_belief(const std::string& cid, const std::string& pid, const std::string& body) {
    return guarded([&] {
        auto c = find(cid);
        if (!c) return error_response(404, "unknown campaign " + cid);
        const json j = parse_body(body);

        std::lock_guard lock(c->mutex);
        const ScaleBounds& bounds = c->state.config->bounds;
        BeliefInterval b;
        b.statement_id = j.at("statement_id").get<std::string>();
        b.target = PopulationTarget::parse(j.value("target", std::string(PopulationTarget::kRepresentativeLabel)));
        b.lower = quantize(j.at("lower").get<double>(), bounds);
        b.upper = quantize(j.at("upper").get<double>(), bounds);
        const WriteResult w = write(*c, EventKind::BeliefSubmitted, belief_payload(pid, b));
        if (!w.check.accepted()) return error_response(status_for(w.check.verdict), w.check.reason);
        json out = b;
        out["participant_id"] = pid;
        out["duplicate"] = w.check.verdict == Verdict::Duplicate;
        return json_response(200, out);
    });
}

ApiResponse Service::finalize(const std::string& cid, const std::string& pid) {
    return guarded([&] {
        auto c = find(cid);
        if (!c) return error_response(404, "unknown campaign " + cid);

        std::lock_guard lock(c->mutex);
        const WriteResult w = write(*c, EventKind::SessionFinalized, finalize_payload(pid));
        if (!w.check.accepted()) return error_response(status_for(w.check.verdict), w.check.reason);
        const SessionRecord& s = c->state.sessions.at(pid);
        if (s.profile.reported_group != s.profile.recruited_group) {
            const WriteResult ex =
                write(*c, EventKind::ExclusionApplied, exclusion_payload(pid, ExclusionReason::AffiliationMismatch));
            if (!ex.check.accepted()) return error_response(status_for(ex.check.verdict), ex.check.reason);
        }
        json out{{"participant_id", pid}, {"status", to_string(s.status)}};
        if (auto it = c->state.recorded_exclusions.find(pid); it != c->state.recorded_exclusions.end()) {
            out["excluded"] = true;
            out["exclusion_reason"] = to_string(it->second);
        } else {
            out["excluded"] = false;
        }
        return json_response(200, out);
    });
}

ApiResponse Service::export_responses(const std::string& cid, const QueryParams& query) {
    return guarded([&] {
        auto state = snapshot(cid);
        if (!state) return error_response(404, "unknown campaign " + cid);
        auto it = query.find("format");
        const std::string format = it == query.end() ? "csv" : it->second;
        if (format == "summary") return json_response(200, to_json(summarize_export(*state)));
        if (format != "csv") return error_response(400, "format must be csv or summary");
        const ResponseExport doc = app::export_responses(*state, "csv");
        return ApiResponse{200, "text/csv", doc.document};
    });
}

ApiResponse Service::analysis(const std::string& cid, const QueryParams& query) {
    return guarded([&] {
        auto state = snapshot(cid);
        if (!state) return error_response(404, "unknown campaign " + cid);
        AnalysisConfig cfg;
        cfg.seed = query_uint(query, "seed", state->config->seed);
        cfg.bootstrap_n_max = query_uint(query, "n_max", cfg.bootstrap_n_max);
        cfg.bootstrap_reps = query_uint(query, "reps", cfg.bootstrap_reps);
        cfg.permutation_reps = query_uint(query, "permutation_reps", cfg.permutation_reps);
        cfg.run_bootstrap = query_flag(query, "bootstrap", true);
        cfg.run_lmm = query_flag(query, "lmm", true);
        const auto sessions = state->sessions_in_order();
        const AnalysisReport report = run_analysis(*state->config, sessions, cfg);
        json out = to_json(report);
        out["campaign_id"] = cid;
        out["seed"] = cfg.seed;
        return json_response(200, out);
    });
}

ApiResponse Service::bonuses(const std::string& cid, const std::string& body) {
    return guarded([&] {
        auto c = find(cid);
        if (!c) return error_response(404, "unknown campaign " + cid);
        const json j = parse_body(body);
        const double rate = j.at("rate").get<double>();
        const AnchorSource source = anchor_source_from_string(j.value("anchor_source", "BeliefMidpointMean"));
        const double lambda = j.value("lambda", 0.5);

        std::lock_guard lock(c->mutex);
        const BonusRun run = run_bonuses(c->state, rate, source, lambda);
        const WriteResult w = write(*c, EventKind::BonusComputed, bonus_payload(run));
        if (!w.check.accepted()) return error_response(status_for(w.check.verdict), w.check.reason);
        return ApiResponse{200, "text/csv", ledger_to_csv(run.ledger)};
    });
}

void bind_routes(httplib::Server& server, Service& service) {
    using httplib::Request;
    using httplib::Response;
    auto send = [](Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    auto query = [](const Request& req) {
        QueryParams q;
        for (const auto& [k, v] : req.params) q.emplace(k, v);
        return q;
    };
    const std::string id = "([A-Za-z0-9_-]+)";
    const std::string pid = "([^/]+)";

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(".*", [](const Request&, Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    server.Get("/campaigns", [&service, send](const Request&, Response& res) {
        send(res, {200, "application/json", json{{"campaigns", service.campaign_ids()}}.dump()});
    });
    server.Post("/campaigns", [&service, send](const Request& req, Response& res) {
        send(res, service.create_campaign(req.body));
    });
    server.Get("/campaigns/" + id, [&service, send](const Request& req, Response& res) {
        send(res, service.get_campaign(req.matches[1]));
    });
    server.Post("/campaigns/" + id + "/sessions", [&service, send](const Request& req, Response& res) {
        send(res, service.open_session(req.matches[1], req.body));
    });
    server.Get("/campaigns/" + id + "/sessions/" + pid, [&service, send](const Request& req, Response& res) {
        send(res, service.get_session(req.matches[1], req.matches[2]));
    });
    server.Post("/campaigns/" + id + "/sessions/" + pid + "/demographics",
                [&service, send](const Request& req, Response& res) {
                    send(res, service.submit_demographics(req.matches[1], req.matches[2], req.body));
                });
    server.Post("/campaigns/" + id + "/sessions/" + pid + "/judgements",
                [&service, send](const Request& req, Response& res) {
                    send(res, service.submit_judgement(req.matches[1], req.matches[2], req.body));
                });
    server.Post("/campaigns/" + id + "/sessions/" + pid + "/beliefs",
                [&service, send](const Request& req, Response& res) {
                    send(res, service.submit_belief(req.matches[1], req.matches[2], req.body));
                });
    server.Post("/campaigns/" + id + "/sessions/" + pid + "/finalize",
                [&service, send](const Request& req, Response& res) {
                    send(res, service.finalize(req.matches[1], req.matches[2]));
                });
    server.Get("/campaigns/" + id + "/export", [&service, send, query](const Request& req, Response& res) {
        send(res, service.export_responses(req.matches[1], query(req)));
    });
    server.Get("/campaigns/" + id + "/analysis", [&service, send, query](const Request& req, Response& res) {
        send(res, service.analysis(req.matches[1], query(req)));
    });
    server.Post("/campaigns/" + id + "/bonuses", [&service, send](const Request& req, Response& res) {
        send(res, service.bonuses(req.matches[1], req.body));
    });
}

}  // namespace belief::app
