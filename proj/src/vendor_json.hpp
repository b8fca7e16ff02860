#ifndef PAREVO_VENDOR_JSON_HPP
#define PAREVO_VENDOR_JSON_HPP

// Single include point for the vendored nlohmann/json header so warning
// pragmas and the include path quirk live in one place.
#include <json.hpp>

#endif
