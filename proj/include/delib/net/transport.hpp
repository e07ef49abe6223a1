#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "delib/net/message.hpp"

namespace delib::net {

struct TransportConfig {
    double latency_min = 1.0;
    double latency_max = 3.0;
    double drop_probability = 0.0;
    std::uint64_t seed = 0;
};

// One record per sent message; drops keep their record with no delivery time.
struct EventRecord {
    std::size_t seq = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    MessageType type = MessageType::Announce;
    std::size_t bytes = 0;
    double sent = 0.0;
    double delivered = -1.0;
    bool dropped = false;
};

// Discrete-event message scheduler with seeded uniform latency and drops.
// Identical (seed, send sequence) produces an identical delivery schedule.
class SimTransport {
public:
    using Handler = std::function<void(std::size_t from, std::size_t to, const GossipMessage&)>;
    using Timer = std::function<void()>;

    explicit SimTransport(TransportConfig config);

    // Full mesh over `nodes` endpoints.
    void connect_full(std::size_t nodes);
    // Custom symmetric adjacency; implies the node count.
    void set_adjacency(std::vector<std::set<std::size_t>> adjacency);

    void set_handler(Handler handler) { handler_ = std::move(handler); }

    void send(std::size_t from, std::size_t to, GossipMessage message);
    void broadcast(std::size_t from, const GossipMessage& message);
    // Local timer: never dropped, not part of the message log.
    void schedule(double delay, Timer timer);
    // Moves the clock forward without delivering anything; models local
    // work such as prompt generation. Events already in flight are then
    // delivered no earlier than the advanced clock.
    void advance(double dt);

    // Delivers queued events in (time, seq) order up to and including
    // `until`; returns delivered message count. Throws if the event count
    // exceeds `max_events` (protocol runaway guard).
    std::size_t run_until(double until, std::size_t max_events = kDefaultMaxEvents);
    std::size_t run_until_quiescent(std::size_t max_events = kDefaultMaxEvents);

    double now() const { return now_; }
    std::size_t pending_events() const { return queue_.size(); }
    const std::vector<std::set<std::size_t>>& adjacency() const { return adjacency_; }

    const std::vector<EventRecord>& log() const { return log_; }
    std::string log_jsonl() const;
    std::size_t sent_bytes(MessageType type) const;
    std::size_t delivered_count(MessageType type) const;

    static constexpr std::size_t kDefaultMaxEvents = 10'000'000;

private:
    struct Event {
        double time;
        std::size_t seq;
        bool is_timer;
        std::size_t from, to;
        GossipMessage message;
        Timer timer;
        std::size_t log_index;
    };
    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    TransportConfig config_;
    std::mt19937_64 rng_;
    Handler handler_;
    std::vector<std::set<std::size_t>> adjacency_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::vector<EventRecord> log_;
    std::map<MessageType, std::size_t> sent_bytes_;
    std::map<MessageType, std::size_t> delivered_count_;
    double now_ = 0.0;
    std::size_t next_seq_ = 0;
};

}  // namespace delib::net
