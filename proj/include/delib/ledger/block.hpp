#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "delib/core/types.hpp"
#include "delib/net/identity.hpp"
#include "delib/net/utterance.hpp"

namespace delib::ledger {

// Hard cap on a canonical block ("100 kb"); length fields stay 4 bytes wide,
// so the format itself could address 2^32 bytes.
inline constexpr std::size_t kBlockSizeCap = 102'400;

class OversizeBlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WrongOutcomeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class OutcomeTag : std::uint8_t { Success = 0, Hung = 1 };

struct BlockHeader {
    std::uint64_t height = 0;
    net::Digest previous{};  // all zero for the block after genesis
    std::uint64_t timestamp = 0;  // logical time, milli-units
    OutcomeTag outcome = OutcomeTag::Success;
    net::Digest body_digest{};

    bool operator==(const BlockHeader&) const = default;
};

// One deliberation on the chain: the record plus, for successful outcomes,
// the full ordered transcript. Hung blocks carry the record only.
struct Block {
    BlockHeader header;
    core::DeliberationRecord record;
    std::vector<net::Utterance> transcript;

    bool operator==(const Block&) const = default;
};

// Deterministic encoding: fixed field order, big-endian fixed-width
// integers, 4-byte length prefixes on variable fields. Throws
// OversizeBlockError past the cap.
net::Bytes canonical_serialize(const Block& block);
Block deserialize_block(std::span<const std::uint8_t> data);

net::Bytes encode_body(const core::DeliberationRecord& record,
                       const std::vector<net::Utterance>& transcript);
net::Digest body_digest(const core::DeliberationRecord& record,
                        const std::vector<net::Utterance>& transcript);
net::Digest block_digest(const Block& block);

// Builds a Success block on top of `prev` (null = genesis). The transcript
// must be sorted by (round, turn, agent) and every signature must verify
// against the directory.
Block build_block(const core::DeliberationRecord& record, std::vector<net::Utterance> transcript,
                  const Block* prev, std::uint64_t timestamp, const net::Directory& directory);

// Builds a Hung block: empty transcript, per-round actions dropped, record
// parameters preserved.
Block build_empty_block(core::DeliberationRecord record, const Block* prev,
                        std::uint64_t timestamp);

}  // namespace delib::ledger
