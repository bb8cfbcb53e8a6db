// Live session host.
//
// Threads: one UDP receiver, one stream acceptor, one writer per subscriber
// and (in steady-clock mode) one frame driver. Every sample funnels through
// the FrameAssembler; only the frame driver touches the SessionEngine.

#pragma once

#include "sealmates/config.hpp"
#include "sealmates/datagram.hpp"
#include "sealmates/fanout.hpp"
#include "sealmates/session.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <string_view>
#include <thread>

namespace sealmates {

struct GatewayOptions {
    enum class Clock { Steady, Manual };

    Clock clock = Clock::Steady;
    /// A frame is processed once the clock is this many frames past it, so
    /// samples in flight still land in their own frame.
    int latency_frames = 2;
    bool write_log = true;
};

struct GatewayStats {
    std::uint64_t received = 0;
    std::uint64_t accepted = 0;
    std::uint64_t malformed = 0;
    std::uint64_t unknown_session = 0;
    std::uint64_t unknown_participant = 0;
    std::uint64_t unsupported_type = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t late = 0;
    std::uint64_t before_start = 0;
    std::int64_t frames_processed = 0;
};

class Gateway {
public:
    explicit Gateway(SessionConfig config, GatewayOptions options = {});
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Binds sockets (port 0 picks an ephemeral port) and starts the threads.
    void start();

    std::uint16_t udp_port() const { return udp_port_; }
    std::uint16_t stream_port() const { return stream_port_; }

    /// Manual clock only: move the clock to the start of `clock_frame` and
    /// process every frame that is now due.
    void advance_to(std::int64_t clock_frame);

    /// Steady clock only: drive frames in real time until the fixed duration
    /// ends or stop() is called.
    void run();
    /// Async-signal-safe request to end run().
    void stop() { stop_requested_.store(true); }

    /// Stops all threads, closes the log (scoring the last bucket if it is
    /// complete) and writes `<session>.slog.jsonl` into log_dir.
    SessionLog finish();

    /// Parse and store one datagram at the current clock time.
    void handle_datagram(std::string_view payload);

    GatewayStats stats() const;
    std::filesystem::path log_path() const;
    const SessionConfig& config() const { return config_; }
    FanoutHub& hub() { return hub_; }

private:
    FrameClock::time_point now() const;
    void process_due(std::int64_t clock_frame);
    void udp_loop();
    void accept_loop();
    void serve_subscriber(int fd);
    void shutdown_threads();

    SessionConfig config_;
    GatewayOptions options_;
    FrameClock clock_;
    std::atomic<std::int64_t> manual_frame_{0};

    mutable std::mutex ingest_mu_;
    FrameAssembler assembler_;
    GatewayStats stats_;

    std::mutex engine_mu_;
    SessionEngine engine_;
    FanoutHub hub_;

    int udp_fd_ = -1;
    int listen_fd_ = -1;
    std::uint16_t udp_port_ = 0;
    std::uint16_t stream_port_ = 0;

    std::atomic<bool> running_{false};
    std::atomic<bool> stop_requested_{false};
    std::thread udp_thread_;
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::list<std::thread> conn_threads_;
    std::list<int> conn_fds_;
    bool finished_ = false;
};

/// UTC wall-clock time as ISO 8601.
std::string utc_timestamp();

} // namespace sealmates
