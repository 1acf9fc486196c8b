#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "geoflow/errors.hpp"

/// Little-endian encoding helpers shared by the binary formats.
namespace geoflow::bytes {

template <class T>
void put(std::string &out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    out.append(buf, sizeof(T));
}

/// Sequential reader that throws FormatError(Truncated) past the end.
class Reader {
public:
    Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    template <class T>
    T get() {
        need(sizeof(T));
        char buf[sizeof(T)];
        std::memcpy(buf, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
        }
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, buf, sizeof(T));
        return value;
    }

    std::string_view take(std::size_t n) {
        need(n);
        std::string_view s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void need(std::size_t n) const {
        if (remaining() < n) {
            throw FormatError(FormatError::Kind::Truncated, what_ + ": truncated (need " + std::to_string(n) +
                                                                " bytes, have " + std::to_string(remaining()) + ")");
        }
    }

private:
    std::string_view data_;
    std::string what_;
    std::size_t pos_ = 0;
};

} // namespace geoflow::bytes
