#ifndef UBRSIM_SIM_TIME_H
#define UBRSIM_SIM_TIME_H

#include <cstdint>

namespace ubrsim {

// Simulation time in integer nanoseconds since the start of the run.
// All timing arithmetic is integral so that repeated composition of cell
// times and coarse timer ticks is exact and reproducible.
using SimTime = std::int64_t;

constexpr SimTime kNsPerUs = 1000;
constexpr SimTime kNsPerMs = 1000 * 1000;
constexpr SimTime kNsPerSec = 1000 * 1000 * 1000;

constexpr SimTime from_us(std::int64_t us) { return us * kNsPerUs; }
constexpr SimTime from_ms(std::int64_t ms) { return ms * kNsPerMs; }
constexpr SimTime from_sec(std::int64_t s) { return s * kNsPerSec; }

// Transmission time of `bits` on a link of `rate_bps`, rounded half up to a
// whole nanosecond.
constexpr SimTime transmission_time_ns(std::int64_t bits, std::int64_t rate_bps) {
    return (bits * kNsPerSec + rate_bps / 2) / rate_bps;
}

// A free-running slotted cell serializer: slot k spans
// [boundary(k), boundary(k+1)) where boundary(k) = phase + k * bits / rate,
// computed from the exact product so rounding never accumulates. Real links
// run independent bit clocks, so each link gets its own phase; keeping the
// lattice exact (cell time is not a whole number of nanoseconds) is what
// makes relative phases between links rotate instead of locking.
class SlotClock {
public:
    SlotClock() = default;
    SlotClock(SimTime phase, std::int64_t cell_bits, std::int64_t rate_bps)
        : phase_(phase), cell_bits_(cell_bits), rate_bps_(rate_bps) {}

    SimTime boundary(std::int64_t k) const {
        return phase_ + transmission_time_ns(k * cell_bits_, rate_bps_);
    }

    // First slot index whose start is at or after t.
    std::int64_t slot_at_or_after(SimTime t) const {
        if (t <= phase_)
            return 0;
        std::int64_t k = (t - phase_) * rate_bps_ / (cell_bits_ * kNsPerSec);
        while (boundary(k) < t)
            k++;
        while (k > 0 && boundary(k - 1) >= t)
            k--;
        return k;
    }

private:
    SimTime phase_ = 0;
    std::int64_t cell_bits_ = 424;
    std::int64_t rate_bps_ = 155520000;
};

} // namespace ubrsim

#endif
