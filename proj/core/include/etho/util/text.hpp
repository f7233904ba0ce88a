#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace etho::util {

// Shortest round-trip decimal representation; locale independent.
std::string fmt_double(double value);

// Fixed number of decimals, used for human-facing tables.
std::string fmt_fixed(double value, int decimals);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces "{view}", "{frame}" and zero-padded "{frame:06}" style fields.
std::string expand_template(std::string_view pattern, std::string_view view, long long frame);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// splitmix64 finalizer; used to derive independent RNG streams from a base
// seed and a tuple of integers so results do not depend on call order.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);
std::uint64_t hash_string(std::string_view text);

}  // namespace etho::util
