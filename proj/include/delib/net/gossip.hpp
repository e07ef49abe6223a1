#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "delib/net/transport.hpp"

namespace delib::net {

struct GossipConfig {
    // One retry per requested digest after this logical delay; 0 disables.
    double request_retry_delay = 10.0;
};

// One participant's utterance store, block store, and gossip protocol state.
// Handlers are invoked by the owning Network's transport dispatch.
class Node {
public:
    using BlockSink = std::function<void(const Digest&, const Bytes&)>;

    Node(std::size_t index, NodeIdentity identity, const Directory* directory,
         GossipConfig config);

    std::size_t index() const { return index_; }
    const NodeIdentity& identity() const { return identity_; }

    bool has_utterance(const Digest& digest) const { return store_.count(digest) > 0; }
    const Utterance* find_utterance(const Digest& digest) const;
    std::size_t utterance_count() const { return store_.size(); }

    // All stored utterances for one deliberation, ordered by
    // (round, turn, agent id): the canonical transcript order.
    std::vector<const Utterance*> transcript(const std::string& deliberation_id) const;
    // The subset of a transcript at one (round, turn).
    std::vector<const Utterance*> turn_utterances(const std::string& deliberation_id, Round round,
                                                  std::uint32_t turn) const;

    bool has_block(const Digest& digest) const { return blocks_.count(digest) > 0; }
    const std::map<Digest, Bytes>& blocks() const { return blocks_; }
    void set_block_sink(BlockSink sink) { block_sink_ = std::move(sink); }

    // Broadcasts an Announce for digests this node holds in full; the input
    // is deduplicated and an empty list sends nothing.
    void announce(SimTransport& transport, const std::vector<Digest>& digests);
    // Stores own signed utterance and announces its digest to all peers.
    void publish(SimTransport& transport, const Utterance& utterance);
    // Stores a locally built block and announces its digest to all peers.
    void publish_block(SimTransport& transport, Bytes block_bytes);

    void handle(SimTransport& transport, std::size_t from, const GossipMessage& message);

    std::size_t rejected_count() const { return rejected_; }
    std::size_t duplicate_count() const { return duplicates_; }

private:
    void handle_announce(SimTransport& transport, std::size_t from,
                         const std::vector<Digest>& digests, bool blocks);
    void handle_request(SimTransport& transport, std::size_t from,
                        const std::vector<Digest>& digests);
    void handle_data(SimTransport& transport, const std::vector<Utterance>& utterances);
    void handle_block_data(SimTransport& transport, const Bytes& bytes);
    void request_missing(SimTransport& transport, std::size_t from, std::vector<Digest> missing);

    std::size_t index_;
    NodeIdentity identity_;
    const Directory* directory_;
    GossipConfig config_;
    std::map<Digest, Utterance> store_;
    std::map<Digest, Bytes> blocks_;
    std::set<Digest> pending_;
    std::set<Digest> retried_;
    BlockSink block_sink_;
    std::size_t rejected_ = 0;
    std::size_t duplicates_ = 0;
};

// A set of nodes wired to one simulated transport. Identities derive from
// (seed, tag): the same seed and tags always rebuild the same network.
class Network {
public:
    Network(std::uint64_t seed, const std::vector<std::uint64_t>& identity_tags,
            TransportConfig transport_config, GossipConfig gossip_config = {});

    std::size_t size() const { return nodes_.size(); }
    Node& node(std::size_t index) { return *nodes_.at(index); }
    const Node& node(std::size_t index) const { return *nodes_.at(index); }
    SimTransport& transport() { return transport_; }
    const Directory& directory() const { return directory_; }

    // Node index with the lowest node id; the deterministic proposer.
    std::size_t proposer_index() const;

private:
    Directory directory_;
    SimTransport transport_;
    std::vector<std::unique_ptr<Node>> nodes_;
};

}  // namespace delib::net
