#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace delib::net {

using Bytes = std::vector<std::uint8_t>;

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void put_u8(Bytes& out, std::uint8_t value);
void put_u32(Bytes& out, std::uint32_t value);
void put_u64(Bytes& out, std::uint64_t value);
void put_raw(Bytes& out, std::span<const std::uint8_t> data);
// 4-byte big-endian length prefix followed by the raw bytes.
void put_var(Bytes& out, std::span<const std::uint8_t> data);
void put_var(Bytes& out, std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

// Sequential reader over canonical bytes; every accessor throws CodecError on
// truncated or overlong input.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes raw(std::size_t n);
    Bytes var_bytes();
    std::string var_string();

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    void expect_done() const;

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace delib::net
