#include "delib/net/codec.hpp"

namespace delib::net {

namespace {

// Hard ceiling on variable-length fields; well above the block cap but small
// enough that hostile length prefixes cannot trigger huge allocations.
constexpr std::size_t kMaxVarLength = 1u << 26;

}  // namespace

void put_u8(Bytes& out, std::uint8_t value) { out.push_back(value); }

void put_u32(Bytes& out, std::uint32_t value) {
    out.push_back(static_cast<std::uint8_t>(value >> 24));
    out.push_back(static_cast<std::uint8_t>(value >> 16));
    out.push_back(static_cast<std::uint8_t>(value >> 8));
    out.push_back(static_cast<std::uint8_t>(value));
}

void put_u64(Bytes& out, std::uint64_t value) {
    put_u32(out, static_cast<std::uint32_t>(value >> 32));
    put_u32(out, static_cast<std::uint32_t>(value));
}

void put_raw(Bytes& out, std::span<const std::uint8_t> data) {
    out.insert(out.end(), data.begin(), data.end());
}

void put_var(Bytes& out, std::span<const std::uint8_t> data) {
    if (data.size() > kMaxVarLength) {
        throw CodecError("variable field too long to encode");
    }
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    put_raw(out, data);
}

void put_var(Bytes& out, std::string_view text) {
    put_var(out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(std::span<const std::uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string hex;
    hex.reserve(data.size() * 2);
    for (auto byte : data) {
        hex.push_back(digits[byte >> 4]);
        hex.push_back(digits[byte & 0xf]);
    }
    return hex;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw CodecError("hex string has odd length");
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
        throw CodecError("invalid hex digit");
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
    }
    return out;
}

void Reader::need(std::size_t n) const {
    if (remaining() < n) throw CodecError("truncated input");
}

std::uint8_t Reader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint32_t Reader::u32() {
    need(4);
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value = value << 8 | data_[pos_++];
    return value;
}

std::uint64_t Reader::u64() {
    std::uint64_t high = u32();
    return high << 32 | u32();
}

Bytes Reader::raw(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
}

Bytes Reader::var_bytes() {
    auto length = u32();
    if (length > kMaxVarLength) throw CodecError("variable field too long");
    return raw(length);
}

std::string Reader::var_string() {
    auto bytes = var_bytes();
    return std::string(bytes.begin(), bytes.end());
}

void Reader::expect_done() const {
    if (!done()) throw CodecError("trailing bytes after message");
}

}  // namespace delib::net
