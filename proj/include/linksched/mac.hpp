#pragma once

#include "linksched/time.hpp"

namespace linksched {

/// Channel-access timing for a single access category.
///
/// Defaults are those of a 10 MHz OCB channel (13 us slot, 32 us SIFS) with
/// AIFSN 2 and CWmin 15, i.e. 16 backoff values.
struct MacTiming
{
    Micros slot_time{13};
    Micros sifs_time{32};
    int aifsn = 2;
    int cw_min = 15;

    /// AIFSN * aSlotTime + aSIFSTime.
    [[nodiscard]] Micros aifs() const { return aifsn * slot_time + sifs_time; }

    /// Throws InputError if aifsn < 2, cw_min < 0, negative slot/SIFS or a
    /// non-positive AIFS.
    void validate() const;
};

} // namespace linksched
