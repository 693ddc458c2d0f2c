#include "hald/binio.hpp"

#include <cstdio>
#include <fstream>

namespace hald {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(IoErrorKind::open_failed, "cannot open for reading: " + path.string());
    in.seekg(0, std::ios::end);
    auto len = in.tellg();
    if (len < 0)
        throw IoError(IoErrorKind::open_failed, "cannot determine size of: " + path.string());
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(data.data()), len);
    if (!in)
        throw IoError(IoErrorKind::open_failed, "short read from: " + path.string());
    return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError(IoErrorKind::open_failed, "cannot open for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError(IoErrorKind::open_failed, "short write to: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError(IoErrorKind::open_failed, "cannot move into place: " + path.string());
    }
}

std::uint16_t f32_to_f16(float value) {
    std::uint32_t x = std::bit_cast<std::uint32_t>(value);
    std::uint32_t sign = (x >> 16) & 0x8000u;
    std::uint32_t biased = (x >> 23) & 0xffu;
    std::uint32_t mant = x & 0x7fffffu;

    if (biased == 0xffu) {  // inf / nan: keep the distinction, quiet the nan
        if (mant == 0) return static_cast<std::uint16_t>(sign | 0x7c00u);
        return static_cast<std::uint16_t>(sign | 0x7c00u | 0x200u | (mant >> 13));
    }

    std::int32_t exp = static_cast<std::int32_t>(biased) - 127 + 15;
    if (exp >= 0x1f)  // too large: round to infinity
        return static_cast<std::uint16_t>(sign | 0x7c00u);

    if (exp <= 0) {  // subnormal half (or underflow to zero)
        if (exp < -10) return static_cast<std::uint16_t>(sign);
        mant |= 0x800000u;  // restore the implicit bit
        std::uint32_t shift = static_cast<std::uint32_t>(14 - exp);
        std::uint32_t half_mant = mant >> shift;
        std::uint32_t rem = mant & ((1u << shift) - 1u);
        std::uint32_t halfway = 1u << (shift - 1u);
        if (rem > halfway || (rem == halfway && (half_mant & 1u))) half_mant += 1u;
        return static_cast<std::uint16_t>(sign | half_mant);
    }

    // Normal range: drop 13 mantissa bits with round-to-nearest-even.  A
    // carry out of the mantissa lands in the exponent field, which is the
    // correct behavior (1.9995 -> 2.0, 65504 + eps -> inf).
    std::uint32_t half = sign | (static_cast<std::uint32_t>(exp) << 10) | (mant >> 13);
    std::uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) half += 1u;
    return static_cast<std::uint16_t>(half);
}

float f16_to_f32(std::uint16_t half) {
    std::uint32_t sign = static_cast<std::uint32_t>(half & 0x8000u) << 16;
    std::uint32_t exp = (half >> 10) & 0x1fu;
    std::uint32_t mant = half & 0x3ffu;
    std::uint32_t x;
    if (exp == 0) {
        if (mant == 0) {
            x = sign;
        } else {  // subnormal: renormalize into float's range
            // value = mant * 2^-24; shifting the leading bit up to the
            // implicit position gives 1.f * 2^(-14 - shift).
            int shift = 0;
            while (!(mant & 0x400u)) {
                mant <<= 1;
                ++shift;
            }
            mant &= 0x3ffu;
            x = sign | (static_cast<std::uint32_t>(127 - 14 - shift) << 23) | (mant << 13);
        }
    } else if (exp == 0x1fu) {
        x = sign | 0x7f800000u | (mant << 13);
    } else {
        x = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(x);
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace hald
