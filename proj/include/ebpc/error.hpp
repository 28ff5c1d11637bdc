//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ebpc {

enum class ErrorKind {
    contract_violation,
    invalid_config,
    truncated_stream,
    malformed_stream,
    flag_count_mismatch,
    trailing_data,
    bad_magic,
    unsupported_version,
    length_mismatch,
    unknown_dtype,
    unknown_layout,
    unsatisfiable,
    io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::contract_violation: return "contract violation";
    case ErrorKind::invalid_config: return "invalid config";
    case ErrorKind::truncated_stream: return "truncated stream";
    case ErrorKind::malformed_stream: return "malformed stream";
    case ErrorKind::flag_count_mismatch: return "flag count mismatch";
    case ErrorKind::trailing_data: return "trailing data";
    case ErrorKind::bad_magic: return "bad magic";
    case ErrorKind::unsupported_version: return "unsupported version";
    case ErrorKind::length_mismatch: return "length mismatch";
    case ErrorKind::unknown_dtype: return "unknown dtype";
    case ErrorKind::unknown_layout: return "unknown layout";
    case ErrorKind::unsatisfiable: return "unsatisfiable";
    case ErrorKind::io: return "i/o error";
    }
    return "error";
}

// Every failure raised by the library. Stream errors carry the bit offset
// at which decoding stopped.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what,
          std::optional<std::uint64_t> bit_offset = std::nullopt)
        : std::runtime_error(compose(kind, what, bit_offset)),
          kind_(kind),
          bit_offset_(bit_offset)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::uint64_t> bit_offset() const noexcept { return bit_offset_; }

private:
    static std::string compose(ErrorKind kind, const std::string& what,
                               std::optional<std::uint64_t> bit_offset)
    {
        std::string msg{to_string(kind)};
        if (!what.empty()) {
            msg += ": ";
            msg += what;
        }
        if (bit_offset) {
            msg += " (at bit ";
            msg += std::to_string(*bit_offset);
            msg += ")";
        }
        return msg;
    }

    ErrorKind kind_;
    std::optional<std::uint64_t> bit_offset_;
};

} // namespace ebpc
