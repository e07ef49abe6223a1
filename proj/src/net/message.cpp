#include "delib/net/message.hpp"

namespace delib::net {

namespace {

constexpr std::size_t kMaxListLength = 1u << 20;

void put_digest_list(Bytes& out, const std::vector<Digest>& digests) {
    put_u32(out, static_cast<std::uint32_t>(digests.size()));
    for (const auto& digest : digests) put_raw(out, digest);
}

std::vector<Digest> read_digest_list(Reader& reader) {
    auto count = reader.u32();
    if (count > kMaxListLength) throw CodecError("digest list too long");
    std::vector<Digest> digests(count);
    for (auto& digest : digests) {
        auto bytes = reader.raw(digest.size());
        std::copy(bytes.begin(), bytes.end(), digest.begin());
    }
    return digests;
}

}  // namespace

Bytes GossipMessage::encode() const {
    Bytes out;
    put_u8(out, static_cast<std::uint8_t>(type));
    switch (type) {
        case MessageType::Announce:
        case MessageType::Request:
        case MessageType::BlockAnnounce:
            put_digest_list(out, digests);
            break;
        case MessageType::Data: {
            put_u32(out, static_cast<std::uint32_t>(utterances.size()));
            for (const auto& utterance : utterances) {
                auto wire = utterance.wire_bytes();
                put_var(out, std::span<const std::uint8_t>(wire));
            }
            break;
        }
        case MessageType::BlockData:
            put_var(out, std::span<const std::uint8_t>(block_bytes));
            break;
    }
    return out;
}

GossipMessage GossipMessage::decode(std::span<const std::uint8_t> data) {
    Reader reader(data);
    GossipMessage message;
    auto type = reader.u8();
    if (type < static_cast<std::uint8_t>(MessageType::Announce) ||
        type > static_cast<std::uint8_t>(MessageType::BlockData)) {
        throw CodecError("unknown message type");
    }
    message.type = static_cast<MessageType>(type);
    switch (message.type) {
        case MessageType::Announce:
        case MessageType::Request:
        case MessageType::BlockAnnounce:
            message.digests = read_digest_list(reader);
            break;
        case MessageType::Data: {
            auto count = reader.u32();
            if (count > kMaxListLength) throw CodecError("utterance list too long");
            message.utterances.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) {
                auto wire = reader.var_bytes();
                message.utterances.push_back(Utterance::from_wire(wire));
            }
            break;
        }
        case MessageType::BlockData:
            message.block_bytes = reader.var_bytes();
            break;
    }
    reader.expect_done();
    return message;
}

GossipMessage GossipMessage::announce(std::vector<Digest> digests) {
    return {MessageType::Announce, std::move(digests), {}, {}};
}

GossipMessage GossipMessage::request(std::vector<Digest> digests) {
    return {MessageType::Request, std::move(digests), {}, {}};
}

GossipMessage GossipMessage::data(std::vector<Utterance> utterances) {
    return {MessageType::Data, {}, std::move(utterances), {}};
}

GossipMessage GossipMessage::block_announce(const Digest& digest) {
    return {MessageType::BlockAnnounce, {digest}, {}, {}};
}

GossipMessage GossipMessage::block_data(Bytes bytes) {
    return {MessageType::BlockData, {}, {}, std::move(bytes)};
}

}  // namespace delib::net
