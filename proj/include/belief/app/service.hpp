#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "belief/app/campaign_state.hpp"
#include "belief/app/event_log.hpp"

namespace httplib {
class Server;
}

namespace belief::app {

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

using QueryParams = std::map<std::string, std::string>;

struct ServiceOptions {
    // Empty: campaigns live in memory only.
    std::optional<std::filesystem::path> data_dir;
    Durability durability = Durability::Fsync;
};

/// Campaign service independent of the HTTP transport. Every handler takes
/// the raw request body and returns status, content type and body. Writes
/// are serialized per campaign; reads run against immutable snapshots.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ApiResponse create_campaign(const std::string& body);
    ApiResponse get_campaign(const std::string& cid);
    ApiResponse open_session(const std::string& cid, const std::string& body);
    ApiResponse get_session(const std::string& cid, const std::string& pid);
    ApiResponse submit_demographics(const std::string& cid, const std::string& pid, const std::string& body);
    ApiResponse submit_judgement(const std::string& cid, const std::string& pid, const std::string& body);
    ApiResponse submit_belief(const std::string& cid, const std::string& pid, const std::string& body);
    ApiResponse finalize(const std::string& cid, const std::string& pid);
    ApiResponse export_responses(const std::string& cid, const QueryParams& query);
    ApiResponse analysis(const std::string& cid, const QueryParams& query);
    ApiResponse bonuses(const std::string& cid, const std::string& body);

    std::vector<std::string> campaign_ids() const;
    /// Null when the campaign does not exist.
    std::shared_ptr<const CampaignState> snapshot(const std::string& cid) const;

private:
    struct Campaign;
    struct WriteResult;

    std::shared_ptr<Campaign> find(const std::string& cid) const;
    WriteResult write(Campaign& c, EventKind kind, nlohmann::json payload);
    std::string next_campaign_id() const;

    ServiceOptions options_;
    mutable std::shared_mutex campaigns_mutex_;
    std::map<std::string, std::shared_ptr<Campaign>> campaigns_;
};

/// Registers the JSON API routes on an httplib server.
void bind_routes(httplib::Server& server, Service& service);

}  // namespace belief::app
