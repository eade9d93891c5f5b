#include "grb/crc64.hpp"

#include <array>

namespace grb {

namespace {

constexpr std::uint64_t kPoly = 0xC96C5795D7870F42ULL;  // reflected ECMA-182

std::array<std::uint64_t, 256> make_table() {
    std::array<std::uint64_t, 256> table{};
    for (std::uint64_t i = 0; i < 256; ++i) {
        std::uint64_t crc = i;
        for (int b = 0; b < 8; ++b) {
            crc = (crc & 1) ? (crc >> 1) ^ kPoly : crc >> 1;
        }
        table[static_cast<std::size_t>(i)] = crc;
    }
    return table;
}

const std::array<std::uint64_t, 256>& table() {
    static const auto t = make_table();
    return t;
}

}  // namespace

Crc64::Crc64() : state_(~0ULL) {}

void Crc64::update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    const auto& t = table();
    for (std::size_t i = 0; i < size; ++i) {
        state_ = t[(state_ ^ bytes[i]) & 0xFF] ^ (state_ >> 8);
    }
}

std::uint64_t Crc64::value() const noexcept { return ~state_; }

std::uint64_t Crc64::of(const void* data, std::size_t size) {
    Crc64 crc;
    crc.update(data, size);
    return crc.value();
}

}  // namespace grb
