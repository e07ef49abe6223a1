#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "delib/core/types.hpp"
#include "delib/net/codec.hpp"
#include "delib/net/identity.hpp"

namespace delib::net {

enum class Round : std::uint8_t { Initial = 0, Reflection = 1, Conclusion = 2 };

class IdentityMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A signed statement by one agent in one turn. `action` is a locally derived
// cache (extracted from body); it is not on the wire and not compared.
struct Utterance {
    std::string deliberation_id;
    Round round = Round::Initial;
    std::uint32_t turn = 0;
    NodeId agent;
    std::string body;
    Signature signature{};
    std::optional<core::Action> action;

    // Canonical bytes cover, in order: deliberation id (length-prefixed),
    // round tag, turn, raw agent id, body (length-prefixed). The signature is
    // appended after them on the wire and excluded from the digest.
    Bytes canonical_bytes() const;
    Digest digest() const;
    Bytes wire_bytes() const;
    static Utterance from_wire(std::span<const std::uint8_t> data);

    bool operator==(const Utterance& other) const {
        return deliberation_id == other.deliberation_id && round == other.round &&
               turn == other.turn && agent == other.agent && body == other.body &&
               signature == other.signature;
    }
};

// Signs in place; the utterance's agent must match the signing identity.
Utterance sign_utterance(const NodeIdentity& identity, Utterance utterance);

bool verify_utterance(const Utterance& utterance, const PublicKey& key);

}  // namespace delib::net
