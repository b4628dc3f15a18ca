#include "spincharge/version.hpp"

#ifndef SPINCHARGE_VERSION
#define SPINCHARGE_VERSION "unknown"
#endif

namespace spincharge {

const char* version_string() { return SPINCHARGE_VERSION; }

} // namespace spincharge
