#include "delib/ledger/chain.hpp"

#include <fstream>
#include <tuple>

#include "delib/core/consensus.hpp"

namespace delib::ledger {

std::string to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::None: return "none";
        case RejectReason::ParseError: return "parse error";
        case RejectReason::LinkageError: return "linkage error";
        case RejectReason::Oversize: return "oversize block";
        case RejectReason::DigestMismatch: return "body digest mismatch";
        case RejectReason::OutcomeMismatch: return "outcome mismatch";
        case RejectReason::TranscriptOrder: return "transcript out of order";
        case RejectReason::SignatureInvalid: return "invalid transcript signature";
        case RejectReason::ConsensusMismatch: return "consensus recomputation mismatch";
    }
    return "unknown";
}

net::Digest Chain::tip_digest() const {
    if (blocks_.empty()) return net::Digest{};
    return block_digest(blocks_.back());
}

namespace {

VerifyResult check_recorded_consensus(const core::DeliberationRecord& record) {
    if (record.actions_by_round.empty()) {
        return VerifyResult::fail(RejectReason::ConsensusMismatch,
                                  "success block carries no recorded rounds");
    }
    const auto& final_round = record.actions_by_round.back();
    if (final_round.empty()) {
        return VerifyResult::fail(RejectReason::ConsensusMismatch, "final round is empty");
    }
    try {
        auto outcome = core::evaluate_turn(final_round, record.problem.kind, record.theta);
        bool reached = record.problem.kind == core::ProblemKind::Definitive
                           ? outcome.status == core::ConsensusStatus::Unanimous
                           : outcome.status == core::ConsensusStatus::Graded;
        if (!reached) {
            return VerifyResult::fail(RejectReason::ConsensusMismatch,
                                      "final round does not reach consensus");
        }
        if (outcome.confidence != record.confidence) {
            return VerifyResult::fail(RejectReason::ConsensusMismatch,
                                      "recorded confidence disagrees with recomputation");
        }
    } catch (const std::exception& e) {
        return VerifyResult::fail(RejectReason::ConsensusMismatch, e.what());
    }
    return VerifyResult::pass();
}

}  // namespace

VerifyResult Chain::verify_block(const Block& block) const {
    if (block.header.height != height() + 1) {
        return VerifyResult::fail(RejectReason::LinkageError,
                                  "expected height " + std::to_string(height() + 1) + ", got " +
                                      std::to_string(block.header.height));
    }
    if (block.header.previous != tip_digest()) {
        return VerifyResult::fail(RejectReason::LinkageError, "previous digest does not match tip");
    }
    try {
        canonical_serialize(block);
    } catch (const OversizeBlockError& e) {
        return VerifyResult::fail(RejectReason::Oversize, e.what());
    }
    if (body_digest(block.record, block.transcript) != block.header.body_digest) {
        return VerifyResult::fail(RejectReason::DigestMismatch,
                                  "body digest does not cover the body bytes");
    }

    bool header_success = block.header.outcome == OutcomeTag::Success;
    if (header_success != block.record.outcome.success()) {
        return VerifyResult::fail(RejectReason::OutcomeMismatch,
                                  "header outcome tag disagrees with the record");
    }
    if (!header_success) {
        if (!block.transcript.empty() || !block.record.actions_by_round.empty()) {
            return VerifyResult::fail(RejectReason::OutcomeMismatch,
                                      "hung block must carry no transcript or round actions");
        }
        if (block.record.outcome.reason == core::HungReason::None) {
            return VerifyResult::fail(RejectReason::OutcomeMismatch, "hung block without a reason");
        }
        return VerifyResult::pass();
    }

    if (block.record.outcome.reason != core::HungReason::None) {
        return VerifyResult::fail(RejectReason::OutcomeMismatch,
                                  "success block carries a hung reason");
    }
    auto key = [](const net::Utterance& u) { return std::tuple(u.round, u.turn, u.agent); };
    for (std::size_t i = 1; i < block.transcript.size(); ++i) {
        if (!(key(block.transcript[i - 1]) < key(block.transcript[i]))) {
            return VerifyResult::fail(RejectReason::TranscriptOrder,
                                      "transcript not sorted by round, turn, agent");
        }
    }
    for (const auto& utterance : block.transcript) {
        const auto* pubkey = directory_ ? directory_->find(utterance.agent) : nullptr;
        if (!pubkey) {
            return VerifyResult::fail(RejectReason::SignatureInvalid,
                                      "transcript utterance from an unknown agent");
        }
        if (!verify_utterance(utterance, *pubkey)) {
            return VerifyResult::fail(RejectReason::SignatureInvalid,
                                      "transcript signature does not verify");
        }
    }
    return check_recorded_consensus(block.record);
}

VerifyResult Chain::verify_and_append(Block block) {
    auto result = verify_block(block);
    if (result.ok) blocks_.push_back(std::move(block));
    return result;
}

VerifyResult Chain::append_bytes(std::span<const std::uint8_t> data) {
    Block block;
    try {
        block = deserialize_block(data);
    } catch (const OversizeBlockError& e) {
        return VerifyResult::fail(RejectReason::Oversize, e.what());
    } catch (const net::CodecError& e) {
        return VerifyResult::fail(RejectReason::ParseError, e.what());
    }
    // Re-encoding must reproduce the input byte for byte; anything else is a
    // non-canonical encoding of the same content.
    auto reencoded = canonical_serialize(block);
    if (reencoded.size() != data.size() ||
        !std::equal(reencoded.begin(), reencoded.end(), data.begin())) {
        return VerifyResult::fail(RejectReason::ParseError, "non-canonical block encoding");
    }
    return verify_and_append(std::move(block));
}

net::Bytes Chain::file_bytes() const {
    net::Bytes out;
    for (const auto& block : blocks_) {
        auto bytes = canonical_serialize(block);
        net::put_var(out, std::span<const std::uint8_t>(bytes));
    }
    return out;
}

void Chain::save(const std::filesystem::path& path) const {
    auto bytes = file_bytes();
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open chain file for writing: " + path.string());
    file.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!file) throw std::runtime_error("failed writing chain file: " + path.string());
}

ChainReport replay_chain_file(const std::filesystem::path& path,
                              const net::Directory* directory) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open chain file: " + path.string());
    net::Bytes bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    ChainReport report{Chain(directory)};
    net::Reader reader(bytes);
    while (!reader.done()) {
        net::Bytes block_bytes;
        try {
            block_bytes = reader.var_bytes();
        } catch (const net::CodecError& e) {
            report.ok = false;
            report.failed_height = report.chain.height() + 1;
            report.failure = VerifyResult::fail(RejectReason::ParseError, e.what());
            return report;
        }
        auto result = report.chain.append_bytes(block_bytes);
        if (!result.ok) {
            report.ok = false;
            report.failed_height = report.chain.height() + 1;
            report.failure = result;
            return report;
        }
    }
    return report;
}

}  // namespace delib::ledger
