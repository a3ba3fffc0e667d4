#pragma once

#include <chrono>
#include <cstdint>
#include <string_view>

namespace linksched {

/// All simulation and scheduling arithmetic happens on integer microseconds.
using Micros = std::chrono::duration<std::int64_t, std::micro>;

/// Converts a value in seconds to microseconds. Throws InputError when the
/// value is not an exact multiple of one microsecond (up to parse noise).
/// `what` names the field in the error message.
Micros seconds_to_micros(double seconds, std::string_view what);

inline double to_seconds(Micros t)
{
    return static_cast<double>(t.count()) / 1e6;
}

} // namespace linksched
