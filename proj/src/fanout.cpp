#include "sealmates/fanout.hpp"

#include <stdexcept>

#include <json.hpp>

namespace sealmates {

using nlohmann::json;

std::string encode_avatar_state(std::int64_t frame, const ViewerRenderState& s)
{
    return json{{"v", 1},
                {"type", "avatar_state"},
                {"frame", frame},
                {"viewer", s.viewer.ordinal},
                {"x", s.position.x},
                {"y", s.position.y},
                {"phase", s.phase.name()},
                {"rgb", s.color}}
        .dump();
}

std::string encode_score_summary(std::int64_t bucket, const std::vector<ParticipationScore>& scores)
{
    json arr = json::array();
    for (const auto& s : scores) {
        arr.push_back({{"p", s.participant.ordinal},
                       {"aps", s.aps},
                       {"cvps", s.collective_vps},
                       {"total", s.total_percent}});
    }
    return json{{"v", 1}, {"type", "score_summary"}, {"bucket", bucket}, {"scores", arr}}.dump();
}

std::string encode_subscribe(int viewer)
{
    return json{{"v", 1}, {"type", "subscribe"}, {"viewer", viewer}}.dump();
}

std::string frame_message(std::string_view body)
{
    const auto len = static_cast<std::uint32_t>(body.size());
    std::string out;
    out.reserve(body.size() + 4);
    out.push_back(static_cast<char>((len >> 24) & 0xFF));
    out.push_back(static_cast<char>((len >> 16) & 0xFF));
    out.push_back(static_cast<char>((len >> 8) & 0xFF));
    out.push_back(static_cast<char>(len & 0xFF));
    out.append(body);
    return out;
}

std::optional<std::string> MessageDecoder::next()
{
    if (buffer_.size() < 4) {
        return std::nullopt;
    }
    const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[i])); };
    const std::uint32_t len = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (len > kMaxMessage) {
        throw std::runtime_error("message length " + std::to_string(len) + " exceeds limit");
    }
    if (buffer_.size() < 4 + static_cast<std::size_t>(len)) {
        return std::nullopt;
    }
    std::string body = buffer_.substr(4, len);
    buffer_.erase(0, 4 + static_cast<std::size_t>(len));
    return body;
}

void Mailbox::put_state(std::string message, bool pinned)
{
    {
        std::lock_guard lock(mu_);
        if (closed_) {
            return;
        }
        if (!states_.empty() && !states_.back().pinned) {
            ++dropped_;
            states_.pop_back();
        }
        states_.push_back({std::move(message), pinned});
    }
    cv_.notify_one();
}

void Mailbox::put_summary(std::string message)
{
    {
        std::lock_guard lock(mu_);
        if (closed_) {
            return;
        }
        summaries_.push_back(std::move(message));
    }
    cv_.notify_one();
}

void Mailbox::close()
{
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

std::optional<std::string> Mailbox::pop(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || !states_.empty() || !summaries_.empty(); });
    if (!summaries_.empty()) {
        auto m = std::move(summaries_.front());
        summaries_.pop_front();
        return m;
    }
    if (!states_.empty()) {
        auto m = std::move(states_.front().message);
        states_.pop_front();
        return m;
    }
    return std::nullopt;
}

bool Mailbox::closed() const
{
    std::lock_guard lock(mu_);
    return closed_;
}

std::uint64_t Mailbox::dropped_states() const
{
    std::lock_guard lock(mu_);
    return dropped_;
}

std::shared_ptr<Mailbox> FanoutHub::subscribe(int viewer)
{
    auto box = std::make_shared<Mailbox>();
    std::lock_guard lock(mu_);
    if (auto it = snapshot_.find(viewer); it != snapshot_.end()) {
        box->put_state(it->second, true);
    }
    subs_.emplace(viewer, box);
    return box;
}

void FanoutHub::unsubscribe(const std::shared_ptr<Mailbox>& box)
{
    std::lock_guard lock(mu_);
    for (auto it = subs_.begin(); it != subs_.end(); ++it) {
        if (it->second == box) {
            subs_.erase(it);
            break;
        }
    }
    box->close();
}

void FanoutHub::publish_states(std::int64_t frame, const std::vector<ViewerRenderState>& states)
{
    std::lock_guard lock(mu_);
    for (const auto& s : states) {
        auto msg = encode_avatar_state(frame, s);
        const auto last = last_phase_.find(s.viewer.ordinal);
        const bool transition = last == last_phase_.end() || !(last->second == s.phase);
        last_phase_[s.viewer.ordinal] = s.phase;
        auto [begin, end] = subs_.equal_range(s.viewer.ordinal);
        for (auto it = begin; it != end; ++it) {
            it->second->put_state(msg, transition);
        }
        snapshot_[s.viewer.ordinal] = std::move(msg);
    }
}

void FanoutHub::publish_summary(std::int64_t bucket, const std::vector<ParticipationScore>& scores)
{
    const auto msg = encode_score_summary(bucket, scores);
    std::lock_guard lock(mu_);
    for (auto& [viewer, box] : subs_) {
        box->put_summary(msg);
    }
}

void FanoutHub::close_all()
{
    std::lock_guard lock(mu_);
    for (auto& [viewer, box] : subs_) {
        box->close();
    }
    subs_.clear();
}

std::size_t FanoutHub::subscriber_count() const
{
    std::lock_guard lock(mu_);
    return subs_.size();
}

} // namespace sealmates
