#include "delib/net/utterance.hpp"

namespace delib::net {

Bytes Utterance::canonical_bytes() const {
    Bytes out;
    put_var(out, deliberation_id);
    put_u8(out, static_cast<std::uint8_t>(round));
    put_u32(out, turn);
    put_raw(out, agent.bytes);
    put_var(out, body);
    return out;
}

Digest Utterance::digest() const {
    auto canonical = canonical_bytes();
    return sha256(canonical);
}

Bytes Utterance::wire_bytes() const {
    auto out = canonical_bytes();
    put_raw(out, signature);
    return out;
}

Utterance Utterance::from_wire(std::span<const std::uint8_t> data) {
    Reader reader(data);
    Utterance utterance;
    utterance.deliberation_id = reader.var_string();
    auto round = reader.u8();
    if (round > static_cast<std::uint8_t>(Round::Conclusion)) {
        throw CodecError("unknown round tag");
    }
    utterance.round = static_cast<Round>(round);
    utterance.turn = reader.u32();
    auto agent = reader.raw(utterance.agent.bytes.size());
    std::copy(agent.begin(), agent.end(), utterance.agent.bytes.begin());
    utterance.body = reader.var_string();
    auto signature = reader.raw(utterance.signature.size());
    std::copy(signature.begin(), signature.end(), utterance.signature.begin());
    reader.expect_done();
    return utterance;
}

Utterance sign_utterance(const NodeIdentity& identity, Utterance utterance) {
    if (utterance.agent != identity.id) {
        throw IdentityMismatchError("utterance agent does not match signing identity");
    }
    auto canonical = utterance.canonical_bytes();
    utterance.signature = sign_bytes(identity.secret_key, canonical);
    return utterance;
}

bool verify_utterance(const Utterance& utterance, const PublicKey& key) {
    auto canonical = utterance.canonical_bytes();
    return verify_bytes(key, canonical, utterance.signature);
}

}  // namespace delib::net
