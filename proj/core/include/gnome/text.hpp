#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gnome {

std::string_view trim(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

// Replaces every run of ASCII whitespace with a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t v);

}  // namespace gnome
