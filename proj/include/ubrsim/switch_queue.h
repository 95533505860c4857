#ifndef UBRSIM_SWITCH_QUEUE_H
#define UBRSIM_SWITCH_QUEUE_H

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ubrsim/cell.h"
#include "ubrsim/sim_error.h"
#include "ubrsim/sim_time.h"
#include "ubrsim/trace.h"

namespace ubrsim {

enum class PolicyKind : std::uint8_t {
    kTailDrop = 0,
    kEpd = 1,
    kSelectiveDrop = 2,
    kFba = 3,
};

const char* policy_kind_name(PolicyKind kind);

// Admission policy for the bottleneck buffer. `r_cells` is the occupancy
// threshold above which frame-level dropping starts; z is an exact rational
// so the load-ratio comparisons stay in integer arithmetic.
struct DropPolicy {
    PolicyKind kind = PolicyKind::kTailDrop;
    std::int64_t r_cells = 0;
    std::int64_t z_num = 0;
    std::int64_t z_den = 1;
};

struct SwitchStats {
    std::int64_t cells_accepted = 0;
    std::int64_t cells_dropped = 0;
    std::int64_t max_occupancy = 0;
    std::int64_t frame_starts_seen = 0;
    std::int64_t frame_starts_dropped = 0;
    std::int64_t frames_fully_dropped = 0;
};

// Output-port FIFO cell buffer with per-VC accounting and a pluggable drop
// policy. Occupancy X counts buffered cells; a VC is active while it has at
// least one cell buffered.
class SwitchQueue {
public:
    SwitchQueue(std::int64_t capacity_cells, const DropPolicy& policy, int n_vcs,
                TraceSink& trace);

    // Admission decision for an arriving cell; accepted cells are enqueued.
    // Returns true on accept.
    bool admit(const Cell& cell, SimTime now);

    // FIFO service: removes the head cell, if any.
    std::optional<Cell> dequeue(SimTime now);

    std::int64_t occupancy() const { return occupancy_; }
    std::int64_t capacity() const { return capacity_; }
    std::int64_t per_vc(int vc) const { return per_vc_[static_cast<std::size_t>(vc)]; }
    std::int64_t active_vcs() const { return active_; }
    bool empty() const { return fifo_.empty(); }
    const DropPolicy& policy() const { return policy_; }
    const SwitchStats& stats() const { return stats_; }

    // Bytes of data payload of each distinct frame currently buffered,
    // visited once per frame (end-of-run conservation scan).
    template <typename Fn>
    void for_each_buffered_cell(Fn&& fn) const {
        for (const Cell& c : fifo_)
            fn(c);
    }

    // Re-evaluation of the frame-start drop rule from externally observed
    // state. This is the same arithmetic admit() uses; tests compare it
    // against independently coded oracles.
    static bool frame_start_drop(const DropPolicy& policy, std::int64_t capacity,
                                 std::int64_t x, std::int64_t y_vc, std::int64_t active);

    // Frames that lost every cell to the policy are resolved here rather
    // than at the receiver (no cell survives to trigger reassembly).
    struct FullyDroppedFrame {
        std::uint16_t vc;
        std::uint32_t frame;
        std::uint32_t data_len;
    };
    std::vector<FullyDroppedFrame> take_fully_dropped();

private:
    void accept_cell(const Cell& cell, SimTime now);
    void drop_cell(const Cell& cell, SimTime now, DropReason reason);

    std::int64_t capacity_;
    DropPolicy policy_;
    std::deque<Cell> fifo_;
    std::int64_t occupancy_ = 0;
    std::vector<std::int64_t> per_vc_;
    std::int64_t active_ = 0;

    // Frame progress per VC as seen at the admission point; cells of a VC
    // arrive in order, so this classifies every frame exactly once.
    std::vector<std::uint8_t> discarding_;
    std::vector<DropReason> discard_reason_;
    std::vector<std::uint32_t> vc_frame_;
    std::vector<std::uint32_t> vc_frame_dropped_;
    std::vector<std::uint32_t> vc_frame_seen_;

    std::vector<FullyDroppedFrame> fully_dropped_;
    SwitchStats stats_;
    TraceSink& trace_;
};

} // namespace ubrsim

#endif
