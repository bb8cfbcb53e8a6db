#include "sealmates/gateway.hpp"

#include "sealmates/log_io.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace sealmates {

namespace {

constexpr int kPollMs = 100;

[[noreturn]] void throw_errno(const std::string& what)
{
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_in make_addr(const std::string& host, int port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw std::runtime_error("bad bind address '" + host + "'");
    }
    return addr;
}

std::uint16_t bound_port(int fd)
{
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw_errno("getsockname");
    }
    return ntohs(addr.sin_port);
}

bool wait_readable(int fd)
{
    pollfd p{fd, POLLIN, 0};
    return ::poll(&p, 1, kPollMs) > 0 && (p.revents & POLLIN) != 0;
}

bool send_all(int fd, const std::string& bytes)
{
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const auto n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

void set_timeout(int fd, int option, int millis)
{
    timeval tv{millis / 1000, (millis % 1000) * 1000};
    ::setsockopt(fd, SOL_SOCKET, option, &tv, sizeof(tv));
}

// Log the first few drops of each kind, then every thousandth.
void warn_drop(const char* what, std::uint64_t count, const std::string& detail)
{
    if (count <= 5 || count % 1000 == 0) {
        std::cerr << "sealmates: dropped datagram #" << count << " (" << what << "): " << detail << '\n';
    }
}

SessionConfig finalized(SessionConfig c)
{
    c.finalize();
    return c;
}

} // namespace

std::string utc_timestamp()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    ::gmtime_r(&t, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

Gateway::Gateway(SessionConfig config, GatewayOptions options)
    : config_(finalized(std::move(config))), options_(options),
      clock_(std::chrono::steady_clock::now(), config_.sample_rate_hz), assembler_(config_.participant_count()),
      engine_(config_, utc_timestamp(), "gateway")
{
    if (options_.latency_frames < 0) {
        throw ContractViolation("latency_frames must be non-negative");
    }
    if (config_.policy != Policy::None) {
        engine_.on_scores([this](std::int64_t bucket, const std::vector<ParticipationScore>& scores) {
            hub_.publish_summary(bucket, scores);
        });
    }
}

Gateway::~Gateway()
{
    shutdown_threads();
    if (udp_fd_ >= 0) {
        ::close(udp_fd_);
    }
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
    }
}

void Gateway::start()
{
    if (running_.load()) {
        return;
    }
    udp_fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (udp_fd_ < 0) {
        throw_errno("udp socket");
    }
    auto udp_addr = make_addr(config_.bind_address, config_.udp_port);
    if (::bind(udp_fd_, reinterpret_cast<sockaddr*>(&udp_addr), sizeof(udp_addr)) != 0) {
        throw_errno("bind udp port " + std::to_string(config_.udp_port));
    }
    udp_port_ = bound_port(udp_fd_);

    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw_errno("stream socket");
    }
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    auto tcp_addr = make_addr(config_.bind_address, config_.stream_port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&tcp_addr), sizeof(tcp_addr)) != 0) {
        throw_errno("bind stream port " + std::to_string(config_.stream_port));
    }
    if (::listen(listen_fd_, 16) != 0) {
        throw_errno("listen");
    }
    stream_port_ = bound_port(listen_fd_);

    if (options_.clock == GatewayOptions::Clock::Steady) {
        clock_ = FrameClock(std::chrono::steady_clock::now(), config_.sample_rate_hz);
    }
    running_.store(true);
    udp_thread_ = std::thread([this] { udp_loop(); });
    accept_thread_ = std::thread([this] { accept_loop(); });
}

FrameClock::time_point Gateway::now() const
{
    if (options_.clock == GatewayOptions::Clock::Manual) {
        return clock_.frame_start(manual_frame_.load());
    }
    return std::chrono::steady_clock::now();
}

void Gateway::handle_datagram(std::string_view payload)
{
    const auto result = ingest_datagram(payload, {config_.session, config_.participant_count()});
    const auto arrival = now();

    std::lock_guard lock(ingest_mu_);
    ++stats_.received;
    if (const auto* err = std::get_if<IngestError>(&result)) {
        std::uint64_t* counter = nullptr;
        switch (err->kind) {
        case IngestErrorKind::MalformedDatagram: counter = &stats_.malformed; break;
        case IngestErrorKind::UnknownSession: counter = &stats_.unknown_session; break;
        case IngestErrorKind::UnknownParticipant: counter = &stats_.unknown_participant; break;
        case IngestErrorKind::UnsupportedType: counter = &stats_.unsupported_type; break;
        }
        warn_drop(to_string(err->kind), ++*counter, err->detail);
        return;
    }
    const auto frame = clock_.frame_at(arrival);
    if (!frame) {
        warn_drop("before session start", ++stats_.before_start, "");
        return;
    }
    const auto& dg = std::get<Datagram>(result);
    const auto outcome = std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, RawGazeDatagram>) {
                return assembler_.add_gaze(*frame, d.participant, remap(d));
            } else {
                return assembler_.add_audio(*frame, d.participant, d.level);
            }
        },
        dg);
    switch (outcome) {
    case FrameAssembler::Outcome::Stored: ++stats_.accepted; break;
    case FrameAssembler::Outcome::Duplicate: ++stats_.duplicates; break;
    case FrameAssembler::Outcome::Late: ++stats_.late; break;
    }
}

void Gateway::process_due(std::int64_t clock_frame)
{
    std::lock_guard engine_lock(engine_mu_);
    if (finished_) {
        return;
    }
    const int n = config_.participant_count();
    while (!engine_.done() && engine_.next_frame() + options_.latency_frames < clock_frame) {
        const auto f = engine_.next_frame();
        FrameAssembler::Slots slots;
        {
            std::lock_guard lock(ingest_mu_);
            slots = assembler_.take(f);
            stats_.frames_processed = f + 1;
        }
        FrameInput in = FrameInput::empty(n);
        in.gaze = std::move(slots.gaze);
        in.level = std::move(slots.level);
        engine_.step(in);
        if (config_.policy != Policy::None) {
            hub_.publish_states(f, engine_.render());
        }
    }
}

void Gateway::advance_to(std::int64_t clock_frame)
{
    if (options_.clock != GatewayOptions::Clock::Manual) {
        throw ContractViolation("advance_to needs the manual clock");
    }
    if (clock_frame < manual_frame_.load()) {
        throw ContractViolation("the clock cannot run backwards");
    }
    manual_frame_.store(clock_frame);
    process_due(clock_frame);
}

void Gateway::run()
{
    if (options_.clock != GatewayOptions::Clock::Steady) {
        throw ContractViolation("run needs the steady clock");
    }
    while (!stop_requested_.load()) {
        const auto c = clock_.frame_at(std::chrono::steady_clock::now()).value_or(0);
        process_due(c);
        {
            std::lock_guard lock(engine_mu_);
            if (engine_.done()) {
                break;
            }
        }
        std::this_thread::sleep_until(clock_.frame_start(c + 1));
    }
}

void Gateway::udp_loop()
{
    std::vector<char> buf(65536);
    while (running_.load()) {
        if (!wait_readable(udp_fd_)) {
            continue;
        }
        const auto n = ::recv(udp_fd_, buf.data(), buf.size(), 0);
        if (n < 0) {
            continue;
        }
        handle_datagram(std::string_view(buf.data(), static_cast<std::size_t>(n)));
    }
}

void Gateway::accept_loop()
{
    while (running_.load()) {
        if (!wait_readable(listen_fd_)) {
            continue;
        }
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            continue;
        }
        std::lock_guard lock(conn_mu_);
        conn_fds_.push_back(fd);
        conn_threads_.emplace_back([this, fd] { serve_subscriber(fd); });
    }
}

namespace {

// Viewers send nothing after the handshake, so a readable socket that
// yields no bytes has been closed by the peer.
bool peer_gone(int fd)
{
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, 0) <= 0) {
        return false;
    }
    if ((p.revents & (POLLHUP | POLLERR)) != 0) {
        return true;
    }
    std::array<char, 256> sink{};
    const auto n = ::recv(fd, sink.data(), sink.size(), MSG_DONTWAIT);
    return n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK);
}

} // namespace

void Gateway::serve_subscriber(int fd)
{
    auto release = [&] {
        std::lock_guard lock(conn_mu_);
        conn_fds_.remove(fd);
        ::close(fd);
    };

    // handshake: one length-prefixed subscribe message
    set_timeout(fd, SO_RCVTIMEO, 5000);
    set_timeout(fd, SO_SNDTIMEO, 1000);
    MessageDecoder decoder;
    std::optional<std::string> hello;
    std::array<char, 512> buf{};
    try {
        while (!hello && running_.load()) {
            const auto n = ::recv(fd, buf.data(), buf.size(), 0);
            if (n <= 0) {
                break;
            }
            decoder.feed(std::string_view(buf.data(), static_cast<std::size_t>(n)));
            hello = decoder.next();
        }
    } catch (const std::exception&) {
        hello.reset();
    }
    int viewer = -1;
    if (hello) {
        const auto j = nlohmann::json::parse(*hello, nullptr, false);
        if (j.is_object() && j.value("type", "") == "subscribe" && j.contains("viewer") &&
            j["viewer"].is_number_integer()) {
            viewer = j["viewer"].get<int>();
        }
    }
    if (viewer < 0 || viewer >= config_.participant_count()) {
        release();
        return;
    }

    auto box = hub_.subscribe(viewer);
    while (true) {
        auto msg = box->pop(std::chrono::milliseconds(kPollMs));
        if (msg) {
            if (!send_all(fd, frame_message(*msg))) {
                break;
            }
        } else if (box->closed() || !running_.load() || peer_gone(fd)) {
            break;
        }
    }
    hub_.unsubscribe(box);
    release();
}

void Gateway::shutdown_threads()
{
    running_.store(false);
    if (udp_thread_.joinable()) {
        udp_thread_.join();
    }
    if (accept_thread_.joinable()) {
        accept_thread_.join();
    }
    hub_.close_all();
    std::list<std::thread> threads;
    {
        std::lock_guard lock(conn_mu_);
        for (int fd : conn_fds_) {
            ::shutdown(fd, SHUT_RD);
        }
        threads.swap(conn_threads_);
    }
    for (auto& t : threads) {
        t.join();
    }
}

SessionLog Gateway::finish()
{
    SessionLog log;
    {
        std::lock_guard lock(engine_mu_);
        log = engine_.finish();
        finished_ = true;
    }
    shutdown_threads();
    if (options_.write_log) {
        std::filesystem::create_directories(config_.log_dir);
        save_log(log_path(), log);
    }
    return log;
}

GatewayStats Gateway::stats() const
{
    std::lock_guard lock(ingest_mu_);
    return stats_;
}

std::filesystem::path Gateway::log_path() const
{
    return std::filesystem::path(config_.log_dir) / log_file_name(config_.session);
}

} // namespace sealmates
