#include "funcdist/numio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "funcdist/error.hpp"

namespace funcdist {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) fail_io("format_double: conversion failed");
    return std::string(buf, ptr);
}

std::string format_double_fixed(double v, int precision) {
    char buf[64];
    auto [ptr, ec] =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    if (ec != std::errc{}) fail_io("format_double_fixed: conversion failed");
    return std::string(buf, ptr);
}

std::string format_int(long long v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) fail_io("format_int: conversion failed");
    return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

bool is_missing(std::string_view t) {
    return t.empty() || t == "NA" || t == "na" || t == "N/A" || t == ".";
}

}  // namespace

std::optional<double> parse_double_opt(std::string_view token) {
    std::string_view t = trim(token);
    if (is_missing(t)) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail_validation("non-numeric value '" + std::string(token) + "'");
    return v;
}

double parse_double(std::string_view token, const std::string& context) {
    auto v = parse_double_opt(token);
    if (!v) fail_validation(context + ": missing numeric value");
    return *v;
}

long long parse_int(std::string_view token, const std::string& context) {
    std::string_view t = trim(token);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail_validation(context + ": expected integer, got '" + std::string(token) + "'");
    return v;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace funcdist
