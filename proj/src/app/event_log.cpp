#include "belief/app/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "belief/errors.hpp"

namespace belief::app {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 8> kKindNames{{
    {EventKind::CampaignCreated, "CampaignCreated"},
    {EventKind::SessionOpened, "SessionOpened"},
    {EventKind::DemographicsSubmitted, "DemographicsSubmitted"},
    {EventKind::JudgementSubmitted, "JudgementSubmitted"},
    {EventKind::BeliefSubmitted, "BeliefSubmitted"},
    {EventKind::SessionFinalized, "SessionFinalized"},
    {EventKind::ExclusionApplied, "ExclusionApplied"},
    {EventKind::BonusComputed, "BonusComputed"},
}};

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

std::string_view to_string(EventKind k) {
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) return name;
    }
    return "Unknown";
}

EventKind event_kind_from_string(std::string_view s) {
    for (const auto& [kind, name] : kKindNames) {
        if (name == s) return kind;
    }
    throw std::invalid_argument("unknown event kind \"" + std::string(s) + "\"");
}

void to_json(json& j, const EventRecord& e) {
    j = json{{"seq", e.sequence_no}, {"ts", e.timestamp}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

void from_json(const json& j, EventRecord& e) {
    j.at("seq").get_to(e.sequence_no);
    e.timestamp = j.value("ts", "");
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.value("payload", json::object());
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
    return buf;
}

std::string encode_event(const EventRecord& e) { return json(e).dump(); }

ParsedLog parse_log(std::string_view text) {
    ParsedLog out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            out.torn_tail = true;
            break;
        }
        const std::string_view line = text.substr(pos, nl - pos);
        const std::uint64_t expected = out.events.empty() ? 1 : out.events.back().sequence_no + 1;
        if (!line.empty()) {
            EventRecord e;
            try {
                e = json::parse(line).get<EventRecord>();
            } catch (const std::exception& ex) {
                throw ParseError("corrupt event record at sequence " + std::to_string(expected) + ": " + ex.what(),
                                 expected);
            }
            if (e.sequence_no != expected) {
                throw ParseError("sequence gap: expected " + std::to_string(expected) + ", found " +
                                     std::to_string(e.sequence_no),
                                 expected);
            }
            out.events.push_back(std::move(e));
        }
        pos = nl + 1;
        out.valid_bytes = pos;
    }
    return out;
}

std::vector<EventRecord> load_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_log(buf.str()).events;
}

EventLog::EventLog(std::filesystem::path path, Durability durability)
    : path_(std::move(path)), durability_(durability) {
    std::string text;
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw IoError("cannot open " + path_.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    ParsedLog parsed = parse_log(text);
    events_ = std::move(parsed.events);
    dropped_torn_tail_ = parsed.torn_tail;

    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError(errno_text(("open " + path_.string()).c_str()));
    if (parsed.torn_tail && ::ftruncate(fd_, static_cast<off_t>(parsed.valid_bytes)) != 0) {
        throw IoError(errno_text("truncate torn tail"));
    }
}

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

EventLog::EventLog(EventLog&& other) noexcept
    : path_(std::move(other.path_)),
      durability_(other.durability_),
      fd_(std::exchange(other.fd_, -1)),
      events_(std::move(other.events_)),
      dropped_torn_tail_(other.dropped_torn_tail_) {}

EventLog& EventLog::operator=(EventLog&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        path_ = std::move(other.path_);
        durability_ = other.durability_;
        fd_ = std::exchange(other.fd_, -1);
        events_ = std::move(other.events_);
        dropped_torn_tail_ = other.dropped_torn_tail_;
    }
    return *this;
}

void EventLog::record(const EventRecord& event) {
    if (event.sequence_no != last_sequence() + 1) {
        throw ConsistencyError("expected sequence " + std::to_string(last_sequence() + 1) + ", got " +
                               std::to_string(event.sequence_no));
    }
    if (fd_ >= 0) {
        const std::string line = encode_event(event) + "\n";
        std::size_t done = 0;
        while (done < line.size()) {
            const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                const std::string msg = errno_text("append");
                // Cut any partial line so the file stays a clean prefix.
                if (done > 0) {
                    [[maybe_unused]] int rc = ::ftruncate(fd_, ::lseek(fd_, 0, SEEK_END) - static_cast<off_t>(done));
                }
                throw IoError(msg);
            }
            done += static_cast<std::size_t>(n);
        }
        if (durability_ == Durability::Fsync && ::fsync(fd_) != 0) {
            const std::string msg = errno_text("fsync");
            [[maybe_unused]] int rc = ::ftruncate(fd_, ::lseek(fd_, 0, SEEK_END) - static_cast<off_t>(line.size()));
            throw IoError(msg);
        }
    }
    events_.push_back(event);
}

const EventRecord& EventLog::append(EventKind kind, json payload) {
    EventRecord e;
    e.sequence_no = last_sequence() + 1;
    e.timestamp = utc_timestamp();
    e.kind = kind;
    e.payload = std::move(payload);
    record(e);
    return events_.back();
}

}  // namespace belief::app
