#pragma once

#include <cstddef>
#include <cstdint>

namespace grb {

// CRC-64/XZ (reflected ECMA-182 polynomial, init and xorout all-ones).
class Crc64 {
public:
    Crc64();
    void update(const void* data, std::size_t size);
    std::uint64_t value() const noexcept;

    static std::uint64_t of(const void* data, std::size_t size);

private:
    std::uint64_t state_;
};

}  // namespace grb
