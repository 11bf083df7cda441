#pragma once

namespace hybridsim {

constexpr const char* version_string() { return "0.1.0"; }

} // namespace hybridsim
