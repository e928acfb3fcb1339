#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace belief::app {

enum class EventKind {
    CampaignCreated,
    SessionOpened,
    DemographicsSubmitted,
    JudgementSubmitted,
    BeliefSubmitted,
    SessionFinalized,
    ExclusionApplied,
    BonusComputed,
};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct EventRecord {
    std::uint64_t sequence_no = 0;
    std::string timestamp;  // ISO-8601 UTC, informational only
    EventKind kind = EventKind::CampaignCreated;
    nlohmann::json payload;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

void to_json(nlohmann::json& j, const EventRecord& e);
void from_json(const nlohmann::json& j, EventRecord& e);

std::string utc_timestamp();

/// One NDJSON line, without the trailing newline.
std::string encode_event(const EventRecord& e);

enum class Durability { Fsync, Buffered };

/// Append-only event log. File-backed logs write each event as one line in a
/// single write() and, with Durability::Fsync, fsync before record() returns.
/// A log opened without a path lives in memory only.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(std::filesystem::path path, Durability durability = Durability::Fsync);
    ~EventLog();
    EventLog(EventLog&&) noexcept;
    EventLog& operator=(EventLog&&) noexcept;
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    const std::vector<EventRecord>& events() const { return events_; }
    std::uint64_t last_sequence() const { return events_.empty() ? 0 : events_.back().sequence_no; }
    bool dropped_torn_tail() const { return dropped_torn_tail_; }
    const std::filesystem::path& path() const { return path_; }

    /// Requires event.sequence_no == last_sequence() + 1 (ConsistencyError
    /// otherwise). Throws IoError, leaving the log unchanged, when the write
    /// or fsync fails.
    void record(const EventRecord& event);

    /// Assigns the next sequence number and a timestamp, then records.
    const EventRecord& append(EventKind kind, nlohmann::json payload);

private:
    std::filesystem::path path_;
    Durability durability_ = Durability::Fsync;
    int fd_ = -1;
    std::vector<EventRecord> events_;
    bool dropped_torn_tail_ = false;
};

struct ParsedLog {
    std::vector<EventRecord> events;
    std::size_t valid_bytes = 0;  // prefix length holding complete lines
    bool torn_tail = false;
};

/// Parses NDJSON text. A final line without its newline is an unacknowledged
/// write and is dropped. Any other unparsable line, or a sequence gap, throws
/// ParseError carrying the expected sequence number.
ParsedLog parse_log(std::string_view text);

std::vector<EventRecord> load_log(const std::filesystem::path& path);

}  // namespace belief::app
