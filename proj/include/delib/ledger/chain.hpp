#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "delib/ledger/block.hpp"

namespace delib::ledger {

enum class RejectReason : std::uint8_t {
    None = 0,
    ParseError,
    LinkageError,
    Oversize,
    DigestMismatch,
    OutcomeMismatch,
    TranscriptOrder,
    SignatureInvalid,
    ConsensusMismatch,
};

std::string to_string(RejectReason reason);

// Rejection is a normal verification outcome, not an exception.
struct VerifyResult {
    bool ok = true;
    RejectReason reason = RejectReason::None;
    std::string detail;

    static VerifyResult pass() { return {}; }
    static VerifyResult fail(RejectReason reason, std::string detail) {
        return {false, reason, std::move(detail)};
    }
};

// Append-only block sequence. Heights start at 1 on top of an implicit
// genesis with an all-zero digest. Every append re-verifies the block:
// linkage, size, body digest, outcome shape, transcript signatures and
// order, and a recomputation of the recorded consensus.
class Chain {
public:
    explicit Chain(const net::Directory* directory) : directory_(directory) {}

    std::uint64_t height() const { return blocks_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& at(std::uint64_t height) const { return blocks_.at(height - 1); }
    const Block* tip() const { return blocks_.empty() ? nullptr : &blocks_.back(); }
    net::Digest tip_digest() const;

    VerifyResult verify_block(const Block& block) const;
    VerifyResult verify_and_append(Block block);
    VerifyResult append_bytes(std::span<const std::uint8_t> data);

    // Byte-identical persistence: [4-byte BE length][canonical block]*.
    void save(const std::filesystem::path& path) const;
    net::Bytes file_bytes() const;

private:
    const net::Directory* directory_;
    std::vector<Block> blocks_;
};

// Replays a chain file from genesis. Stops at the first invalid block; the
// report keeps everything accepted before it. An empty file is a valid
// height-0 chain.
struct ChainReport {
    Chain chain;
    bool ok = true;
    std::uint64_t failed_height = 0;  // 0 when ok
    VerifyResult failure;
};

ChainReport replay_chain_file(const std::filesystem::path& path, const net::Directory* directory);

}  // namespace delib::ledger
