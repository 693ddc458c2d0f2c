#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hald {

enum class IoErrorKind {
    open_failed,     ///< file missing or unreadable/unwritable
    corrupt_header,  ///< bad magic, version, or nonsensical header fields
    truncated,       ///< payload shorter than the header promises
    bad_checksum,    ///< stored checksum does not match payload
    bad_value,       ///< a decoded field violates its documented range
};

/// IO failure carrying a machine-checkable kind alongside the message, so
/// callers (and tests) can distinguish truncation from corruption without
/// string matching.
class IoError : public std::runtime_error {
public:
    IoError(IoErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    IoErrorKind kind() const { return kind_; }

private:
    IoErrorKind kind_;
};

/// Append-only little-endian byte buffer.  All on-disk formats in this
/// project are written through this class so the byte order is pinned
/// regardless of host endianness.
class BufWriter {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_u16(std::uint16_t v) { put_le(v, 2); }
    void put_u32(std::uint32_t v) { put_le(v, 4); }
    void put_u64(std::uint64_t v) { put_le(v, 8); }
    void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
    void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }
    void put_bytes(std::span<const std::uint8_t> bytes) {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    }
    void put_magic(std::string_view magic) {
        for (char c : magic) buf_.push_back(static_cast<std::uint8_t>(c));
    }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::size_t size() const { return buf_.size(); }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> buf_;
};

/// Cursor over an in-memory byte image of a file.  Every read checks the
/// remaining length and throws IoError{truncated} on shortfall.
class BufReader {
public:
    explicit BufReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8() { return static_cast<std::uint8_t>(get_le(1)); }
    std::uint16_t get_u16() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t get_u64() { return get_le(8); }
    float get_f32() { return std::bit_cast<float>(get_u32()); }
    double get_f64() { return std::bit_cast<double>(get_u64()); }

    void expect_magic(std::string_view magic, std::string_view what) {
        if (remaining() < magic.size())
            throw IoError(IoErrorKind::truncated, std::string(what) + ": file shorter than its magic");
        for (char c : magic) {
            if (data_[pos_++] != static_cast<std::uint8_t>(c))
                throw IoError(IoErrorKind::corrupt_header, std::string(what) + ": bad magic");
        }
    }

    std::span<const std::uint8_t> get_span(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        if (remaining() < n)
            throw IoError(IoErrorKind::truncated, "unexpected end of data");
    }
    std::uint64_t get_le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

/// Reads a whole file into memory.  Throws IoError{open_failed} when the
/// path does not exist or cannot be read.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes bytes to a file atomically enough for our purposes (temp name,
/// then rename).  Throws IoError{open_failed} on failure.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// IEEE 754 binary16 encode with round-to-nearest-even, including
/// subnormal and overflow handling.
std::uint16_t f32_to_f16(float value);

/// IEEE 754 binary16 decode.
float f16_to_f32(std::uint16_t half);

/// FNV-1a 64-bit hash; used to fingerprint configurations in sidecar
/// provenance files.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace hald
