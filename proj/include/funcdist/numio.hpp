#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace funcdist {

// Locale-independent numeric text I/O. All emitted files go through these so
// reruns are byte-identical; doubles use the shortest round-trip form.
std::string format_double(double v);
std::string format_double_fixed(double v, int precision);
std::string format_int(long long v);

// Parses a full token; empty/NA/na/N/A/. count as missing (nullopt).
// Malformed non-missing tokens throw Error(Validation).
std::optional<double> parse_double_opt(std::string_view token);
double parse_double(std::string_view token, const std::string& context);
long long parse_int(std::string_view token, const std::string& context);

// FNV-1a 64-bit, used to derive child seeds from subsystem tags.
std::uint64_t fnv1a64(std::string_view s);

// Child seed for a named subsystem: seed XOR hash(tag).
inline std::uint64_t child_seed(std::uint64_t seed, std::string_view tag) {
    return seed ^ fnv1a64(tag);
}

}  // namespace funcdist
