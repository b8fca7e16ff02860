#ifndef PAREVO_SHA256_HPP
#define PAREVO_SHA256_HPP

#include <string>
#include <string_view>

namespace parevo {

// SHA-256 (FIPS 180-4), lowercase hex digest. Self-contained so candidate
// identity never depends on the linked crypto library.
std::string sha256_hex(std::string_view data);

}  // namespace parevo

#endif
