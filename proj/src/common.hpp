#ifndef PAREVO_COMMON_HPP
#define PAREVO_COMMON_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parevo {

// Error taxonomy. InfraError is environment trouble (missing toolchain,
// unwritable scratch, dead endpoint) and must never be conflated with a
// candidate verdict.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct InfraError : Error {
    using Error::Error;
};
struct PreconditionError : Error {
    using Error::Error;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Last `max_bytes` of `text`, starting at a line boundary when possible.
std::string tail_bytes(std::string_view text, std::size_t max_bytes);

// Shortest round-trip decimal form of a double (to_chars).
std::string format_double(double value);
double parse_double(std::string_view text);

std::string iso8601_now();

// splitmix64 step; used to derive per-generation RNG streams from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Median as the lower middle element: sorted[(n-1)/2]. Never interpolates,
// so the result is always a measured value.
double median_of(std::vector<double> values);

std::string short_id(std::string_view id, std::size_t n = 12);

bool starts_with(std::string_view s, std::string_view prefix);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace parevo

#endif
