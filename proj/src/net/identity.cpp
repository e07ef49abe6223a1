#include "delib/net/identity.hpp"

#include <sodium.h>

#include <stdexcept>

namespace delib::net {

namespace {

void ensure_sodium() {
    static const bool ready = [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
        return true;
    }();
    (void)ready;
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
    ensure_sodium();
    Digest digest;
    crypto_hash_sha256(digest.data(), data.data(), data.size());
    return digest;
}

NodeId NodeId::from_hex(std::string_view hex) {
    auto bytes = delib::net::from_hex(hex);
    if (bytes.size() != 32) throw CodecError("node id must be 32 bytes");
    NodeId id;
    std::copy(bytes.begin(), bytes.end(), id.bytes.begin());
    return id;
}

NodeIdentity derive_identity(std::uint64_t seed, std::uint64_t tag) {
    ensure_sodium();
    Bytes material;
    put_u64(material, seed);
    put_var(material, std::string_view("agent"));
    put_u64(material, tag);
    auto key_seed = sha256(material);
    static_assert(sizeof(Digest) == crypto_sign_SEEDBYTES);

    NodeIdentity identity;
    crypto_sign_seed_keypair(identity.public_key.data(), identity.secret_key.data(),
                             key_seed.data());
    identity.id.bytes = sha256(identity.public_key);
    return identity;
}

Signature sign_bytes(const SecretKey& key, std::span<const std::uint8_t> data) {
    ensure_sodium();
    Signature signature;
    crypto_sign_detached(signature.data(), nullptr, data.data(), data.size(), key.data());
    return signature;
}

bool verify_bytes(const PublicKey& key, std::span<const std::uint8_t> data,
                  const Signature& signature) {
    ensure_sodium();
    return crypto_sign_verify_detached(signature.data(), data.data(), data.size(), key.data()) ==
           0;
}

}  // namespace delib::net
