#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace kpath {

/// Malformed binary input. offset() is the byte position where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

/// Little-endian writer over a std::ostream.
class LeWriter {
public:
    explicit LeWriter(std::ostream& os) : os_(os) {}

    void magic(std::string_view m) { os_.write(m.data(), static_cast<std::streamsize>(m.size())); }

    template <typename T>
    void put(T v) {
        static_assert(std::is_arithmetic_v<T>);
        v = byteswap_if_big(v);
        os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

private:
    std::ostream& os_;
};

/// Little-endian reader over an in-memory buffer, tracking its offset.
class LeReader {
public:
    explicit LeReader(const std::vector<char>& buf) : buf_(buf) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return buf_.size() - pos_; }

    void expect_magic(std::string_view m) {
        need(m.size(), "truncated magic");
        if (std::string_view(buf_.data() + pos_, m.size()) != m)
            throw ParseError("bad magic (expected '" + std::string(m) + "')", pos_);
        pos_ += m.size();
    }

    template <typename T>
    T get(const char* what) {
        static_assert(std::is_arithmetic_v<T>);
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return byteswap_if_big(v);
    }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) throw ParseError(std::string(what) + ": unexpected end of file", pos_);
    }

private:
    const std::vector<char>& buf_;
    std::size_t pos_ = 0;
};

std::vector<char> read_file_bytes(const std::string& path);

}  // namespace kpath
