#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "delib/net/codec.hpp"

namespace delib::net {

using Digest = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 32>;
using SecretKey = std::array<std::uint8_t, 64>;
using Signature = std::array<std::uint8_t, 64>;

Digest sha256(std::span<const std::uint8_t> data);

// Node identifier: digest of the node's public signing key.
struct NodeId {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const NodeId&) const = default;

    std::string hex() const { return to_hex(bytes); }
    static NodeId from_hex(std::string_view hex);
};

struct NodeIdentity {
    NodeId id;
    PublicKey public_key{};
    SecretKey secret_key{};
};

// Deterministic identity: the signing keypair is derived from a digest of
// (seed, tag), so a scenario seed plus per-agent tag fixes every key.
NodeIdentity derive_identity(std::uint64_t seed, std::uint64_t tag);

Signature sign_bytes(const SecretKey& key, std::span<const std::uint8_t> data);
bool verify_bytes(const PublicKey& key, std::span<const std::uint8_t> data,
                  const Signature& signature);

// Public-key lookup shared by every node in a scenario.
class Directory {
public:
    void add(const NodeId& id, const PublicKey& key) { keys_[id] = key; }
    const PublicKey* find(const NodeId& id) const {
        auto it = keys_.find(id);
        return it == keys_.end() ? nullptr : &it->second;
    }
    std::size_t size() const { return keys_.size(); }
    const std::map<NodeId, PublicKey>& entries() const { return keys_; }

private:
    std::map<NodeId, PublicKey> keys_;
};

}  // namespace delib::net
