#pragma once

#include <cstdint>
#include <vector>

#include "delib/net/codec.hpp"
#include "delib/net/identity.hpp"
#include "delib/net/utterance.hpp"

namespace delib::net {

enum class MessageType : std::uint8_t {
    Announce = 1,      // digests the sender holds in full
    Request = 2,       // digests the sender wants (utterances or blocks)
    Data = 3,          // requested utterances
    BlockAnnounce = 4, // digest of a block the sender holds
    BlockData = 5,     // serialized block bytes
};

struct GossipMessage {
    MessageType type = MessageType::Announce;
    std::vector<Digest> digests;        // Announce / Request / BlockAnnounce
    std::vector<Utterance> utterances;  // Data
    Bytes block_bytes;                  // BlockData

    Bytes encode() const;
    static GossipMessage decode(std::span<const std::uint8_t> data);
    std::size_t wire_size() const { return encode().size(); }

    static GossipMessage announce(std::vector<Digest> digests);
    static GossipMessage request(std::vector<Digest> digests);
    static GossipMessage data(std::vector<Utterance> utterances);
    static GossipMessage block_announce(const Digest& digest);
    static GossipMessage block_data(Bytes bytes);
};

}  // namespace delib::net
