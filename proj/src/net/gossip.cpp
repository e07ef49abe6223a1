#include "delib/net/gossip.hpp"

#include <algorithm>

namespace delib::net {

Node::Node(std::size_t index, NodeIdentity identity, const Directory* directory,
           GossipConfig config)
    : index_(index), identity_(std::move(identity)), directory_(directory), config_(config) {}

const Utterance* Node::find_utterance(const Digest& digest) const {
    auto it = store_.find(digest);
    return it == store_.end() ? nullptr : &it->second;
}

std::vector<const Utterance*> Node::transcript(const std::string& deliberation_id) const {
    std::vector<const Utterance*> result;
    for (const auto& [digest, utterance] : store_) {
        if (utterance.deliberation_id == deliberation_id) result.push_back(&utterance);
    }
    std::sort(result.begin(), result.end(), [](const Utterance* a, const Utterance* b) {
        if (a->round != b->round) return a->round < b->round;
        if (a->turn != b->turn) return a->turn < b->turn;
        return a->agent < b->agent;
    });
    return result;
}

std::vector<const Utterance*> Node::turn_utterances(const std::string& deliberation_id,
                                                    Round round, std::uint32_t turn) const {
    std::vector<const Utterance*> result;
    for (const auto* utterance : transcript(deliberation_id)) {
        if (utterance->round == round && utterance->turn == turn) result.push_back(utterance);
    }
    return result;
}

void Node::announce(SimTransport& transport, const std::vector<Digest>& digests) {
    std::set<Digest> unique(digests.begin(), digests.end());
    if (unique.empty()) return;
    transport.broadcast(index_,
                        GossipMessage::announce({unique.begin(), unique.end()}));
}

void Node::publish(SimTransport& transport, const Utterance& utterance) {
    auto digest = utterance.digest();
    store_.emplace(digest, utterance);
    announce(transport, {digest});
}

void Node::publish_block(SimTransport& transport, Bytes block_bytes) {
    auto digest = sha256(block_bytes);
    blocks_.emplace(digest, std::move(block_bytes));
    transport.broadcast(index_, GossipMessage::block_announce(digest));
}

void Node::handle(SimTransport& transport, std::size_t from, const GossipMessage& message) {
    switch (message.type) {
        case MessageType::Announce:
            handle_announce(transport, from, message.digests, false);
            break;
        case MessageType::BlockAnnounce:
            handle_announce(transport, from, message.digests, true);
            break;
        case MessageType::Request:
            handle_request(transport, from, message.digests);
            break;
        case MessageType::Data:
            handle_data(transport, message.utterances);
            break;
        case MessageType::BlockData:
            handle_block_data(transport, message.block_bytes);
            break;
    }
}

void Node::handle_announce(SimTransport& transport, std::size_t from,
                           const std::vector<Digest>& digests, bool blocks) {
    std::vector<Digest> missing;
    for (const auto& digest : digests) {
        bool held = blocks ? has_block(digest) : has_utterance(digest);
        if (!held && !pending_.count(digest)) missing.push_back(digest);
    }
    if (missing.empty()) return;
    request_missing(transport, from, std::move(missing));
}

void Node::request_missing(SimTransport& transport, std::size_t from,
                           std::vector<Digest> missing) {
    for (const auto& digest : missing) pending_.insert(digest);
    transport.send(index_, from, GossipMessage::request(missing));
    if (config_.request_retry_delay <= 0) return;

    transport.schedule(config_.request_retry_delay, [this, &transport, from, missing] {
        std::vector<Digest> still_missing;
        for (const auto& digest : missing) {
            if (pending_.count(digest) && !retried_.count(digest)) {
                still_missing.push_back(digest);
                retried_.insert(digest);
            }
        }
        if (!still_missing.empty()) {
            transport.send(index_, from, GossipMessage::request(std::move(still_missing)));
        }
    });
}

void Node::handle_request(SimTransport& transport, std::size_t from,
                          const std::vector<Digest>& digests) {
    std::vector<Utterance> held;
    for (const auto& digest : digests) {
        if (const auto* utterance = find_utterance(digest)) {
            held.push_back(*utterance);
        } else if (auto it = blocks_.find(digest); it != blocks_.end()) {
            transport.send(index_, from, GossipMessage::block_data(it->second));
        }
        // Unknown digests are silently omitted.
    }
    if (!held.empty()) transport.send(index_, from, GossipMessage::data(std::move(held)));
}

void Node::handle_data(SimTransport& transport, const std::vector<Utterance>& utterances) {
    std::vector<Digest> accepted;
    for (const auto& utterance : utterances) {
        auto digest = utterance.digest();
        if (store_.count(digest)) {
            ++duplicates_;
            pending_.erase(digest);
            continue;
        }
        const auto* key = directory_ ? directory_->find(utterance.agent) : nullptr;
        if (!key || !verify_utterance(utterance, *key)) {
            ++rejected_;
            continue;
        }
        store_.emplace(digest, utterance);
        pending_.erase(digest);
        retried_.erase(digest);
        accepted.push_back(digest);
    }
    announce(transport, accepted);
}

void Node::handle_block_data(SimTransport& transport, const Bytes& bytes) {
    auto digest = sha256(bytes);
    if (blocks_.count(digest)) {
        ++duplicates_;
        pending_.erase(digest);
        return;
    }
    blocks_.emplace(digest, bytes);
    pending_.erase(digest);
    retried_.erase(digest);
    transport.broadcast(index_, GossipMessage::block_announce(digest));
    if (block_sink_) block_sink_(digest, bytes);
}

Network::Network(std::uint64_t seed, const std::vector<std::uint64_t>& identity_tags,
                 TransportConfig transport_config, GossipConfig gossip_config)
    : transport_(transport_config) {
    std::vector<NodeIdentity> identities;
    identities.reserve(identity_tags.size());
    for (auto tag : identity_tags) {
        identities.push_back(derive_identity(seed, tag));
        directory_.add(identities.back().id, identities.back().public_key);
    }
    for (std::size_t i = 0; i < identities.size(); ++i) {
        nodes_.push_back(std::make_unique<Node>(i, identities[i], &directory_, gossip_config));
    }
    transport_.connect_full(nodes_.size());
    transport_.set_handler([this](std::size_t from, std::size_t to, const GossipMessage& msg) {
        nodes_.at(to)->handle(transport_, from, msg);
    });
}

std::size_t Network::proposer_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (nodes_[i]->identity().id < nodes_[best]->identity().id) best = i;
    }
    return best;
}

}  // namespace delib::net
