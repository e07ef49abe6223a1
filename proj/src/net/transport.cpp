#include "delib/net/transport.hpp"

#include <algorithm>
#include <stdexcept>

#include "delib/core/rng.hpp"
#include "json.hpp"

namespace delib::net {

SimTransport::SimTransport(TransportConfig config)
    : config_(config), rng_(config.seed) {
    if (config_.latency_min < 0 || config_.latency_max < config_.latency_min) {
        throw std::invalid_argument("latency range must satisfy 0 <= min <= max");
    }
    if (config_.drop_probability < 0 || config_.drop_probability > 1) {
        throw std::invalid_argument("drop probability must be in [0,1]");
    }
}

void SimTransport::connect_full(std::size_t nodes) {
    adjacency_.assign(nodes, {});
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = 0; j < nodes; ++j) {
            if (i != j) adjacency_[i].insert(j);
        }
    }
}

void SimTransport::set_adjacency(std::vector<std::set<std::size_t>> adjacency) {
    for (std::size_t i = 0; i < adjacency.size(); ++i) {
        for (auto peer : adjacency[i]) {
            if (peer >= adjacency.size() || peer == i) {
                throw std::invalid_argument("adjacency references an invalid node");
            }
            if (!adjacency[peer].count(i)) {
                throw std::invalid_argument("adjacency must be symmetric");
            }
        }
    }
    adjacency_ = std::move(adjacency);
}

void SimTransport::send(std::size_t from, std::size_t to, GossipMessage message) {
    if (from >= adjacency_.size() || !adjacency_[from].count(to)) {
        throw std::invalid_argument("no link between sender and receiver");
    }
    // Both draws happen on every send so the stream position never depends
    // on the outcome.
    double latency = config_.latency_min +
                     core::uniform01(rng_) * (config_.latency_max - config_.latency_min);
    bool dropped = core::uniform01(rng_) < config_.drop_probability;

    EventRecord record;
    record.seq = next_seq_++;
    record.from = from;
    record.to = to;
    record.type = message.type;
    record.bytes = message.wire_size();
    record.sent = now_;
    record.dropped = dropped;
    sent_bytes_[message.type] += record.bytes;
    log_.push_back(record);

    if (dropped) return;
    queue_.push(Event{now_ + latency, record.seq, false, from, to, std::move(message), {},
                      log_.size() - 1});
}

void SimTransport::broadcast(std::size_t from, const GossipMessage& message) {
    if (from >= adjacency_.size()) throw std::invalid_argument("unknown sender");
    for (auto peer : adjacency_[from]) send(from, peer, message);
}

void SimTransport::schedule(double delay, Timer timer) {
    if (delay < 0) throw std::invalid_argument("timer delay must be non-negative");
    queue_.push(Event{now_ + delay, next_seq_++, true, 0, 0, {}, std::move(timer), 0});
}

void SimTransport::advance(double dt) {
    if (dt < 0) throw std::invalid_argument("clock advance must be non-negative");
    now_ += dt;
}

std::size_t SimTransport::run_until(double until, std::size_t max_events) {
    std::size_t delivered = 0;
    std::size_t processed = 0;
    while (!queue_.empty() && queue_.top().time <= until) {
        if (++processed > max_events) {
            throw std::runtime_error("transport exceeded event budget without quiescing");
        }
        Event event = queue_.top();
        queue_.pop();
        // advance() may have pushed the clock past this event's schedule.
        now_ = std::max(now_, event.time);
        if (event.is_timer) {
            event.timer();
            continue;
        }
        log_[event.log_index].delivered = now_;
        ++delivered_count_[event.message.type];
        ++delivered;
        if (handler_) handler_(event.from, event.to, event.message);
    }
    if (until != std::numeric_limits<double>::infinity() && now_ < until) now_ = until;
    return delivered;
}

std::size_t SimTransport::run_until_quiescent(std::size_t max_events) {
    return run_until(std::numeric_limits<double>::infinity(), max_events);
}

std::string SimTransport::log_jsonl() const {
    std::string out;
    for (const auto& record : log_) {
        nlohmann::json line = {
            {"seq", record.seq},
            {"from", record.from},
            {"to", record.to},
            {"type", static_cast<int>(record.type)},
            {"bytes", record.bytes},
            {"sent", record.sent},
            {"dropped", record.dropped},
        };
        if (record.delivered >= 0) line["delivered"] = record.delivered;
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::size_t SimTransport::sent_bytes(MessageType type) const {
    auto it = sent_bytes_.find(type);
    return it == sent_bytes_.end() ? 0 : it->second;
}

std::size_t SimTransport::delivered_count(MessageType type) const {
    auto it = delivered_count_.find(type);
    return it == delivered_count_.end() ? 0 : it->second;
}

}  // namespace delib::net
