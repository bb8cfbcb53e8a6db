// State fan-out to viewers over a persistent stream of length-prefixed
// (4-byte big-endian) JSON messages:
//
//   {"v":1,"type":"avatar_state","frame":int,"viewer":int,"x":float,"y":float,
//    "phase":"idle1"|...|"move2","rgb":[r,g,b]}
//   {"v":1,"type":"score_summary","bucket":int,"scores":[{...}, ...]}
//
// Clients open with {"v":1,"type":"subscribe","viewer":int}.

#pragma once

#include "sealmates/avatar.hpp"
#include "sealmates/core.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sealmates {

std::string encode_avatar_state(std::int64_t frame, const ViewerRenderState& state);
std::string encode_score_summary(std::int64_t bucket, const std::vector<ParticipationScore>& scores);
std::string encode_subscribe(int viewer);

/// Prefix `body` with its 4-byte big-endian length.
std::string frame_message(std::string_view body);

/// Incremental decoder for a length-prefixed byte stream.
class MessageDecoder {
public:
    /// Messages larger than this are a protocol error.
    static constexpr std::uint32_t kMaxMessage = 1u << 20;

    void feed(std::string_view bytes) { buffer_.append(bytes); }
    /// Next complete message body, if any. Throws std::runtime_error on an
    /// oversized length prefix.
    std::optional<std::string> next();

private:
    std::string buffer_;
};

/// One subscriber's outbound queue. A plain avatar state replaces a plain
/// state still waiting to be sent; states that start a new phase (`pinned`)
/// are never replaced. Score summaries queue in order.
class Mailbox {
public:
    void put_state(std::string message, bool pinned = false);
    void put_summary(std::string message);
    void close();

    /// Waits up to `timeout`; returns the next message, summaries first.
    /// Absent on timeout or once closed and drained.
    std::optional<std::string> pop(std::chrono::milliseconds timeout);

    bool closed() const;
    std::uint64_t dropped_states() const;

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    struct Pending {
        std::string message;
        bool pinned;
    };
    std::deque<Pending> states_;
    std::deque<std::string> summaries_;
    bool closed_ = false;
    std::uint64_t dropped_ = 0;
};

/// Thread-safe registry of subscribers keyed by viewer.
class FanoutHub {
public:
    /// New mailbox for `viewer`, pre-loaded with the current snapshot.
    std::shared_ptr<Mailbox> subscribe(int viewer);
    void unsubscribe(const std::shared_ptr<Mailbox>& box);

    /// Hands each viewer its own state; remembers them as the snapshot.
    void publish_states(std::int64_t frame, const std::vector<ViewerRenderState>& states);
    void publish_summary(std::int64_t bucket, const std::vector<ParticipationScore>& scores);
    void close_all();

    std::size_t subscriber_count() const;

private:
    mutable std::mutex mu_;
    std::multimap<int, std::shared_ptr<Mailbox>> subs_;
    std::map<int, std::string> snapshot_;
    std::map<int, AnimationPhase> last_phase_;
};

} // namespace sealmates
