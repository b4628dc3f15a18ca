#pragma once

namespace spincharge {

/// Project version plus `git describe` at configure time.
const char* version_string();

} // namespace spincharge
