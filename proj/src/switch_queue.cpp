#include "ubrsim/switch_queue.h"

namespace ubrsim {

const char* policy_kind_name(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::kTailDrop: return "tail";
    case PolicyKind::kEpd: return "epd";
    case PolicyKind::kSelectiveDrop: return "selective_drop";
    case PolicyKind::kFba: return "fba";
    }
    return "?";
}

namespace {

// Policy part of the frame-start decision (buffer-full handling excluded).
// Exact integer arithmetic: the published inequalities are cross-multiplied
// so no rounding is involved.
bool policy_frame_drop(const DropPolicy& p, std::int64_t capacity, std::int64_t x,
                       std::int64_t y_vc, std::int64_t active) {
    using Wide = __int128;
    switch (p.kind) {
    case PolicyKind::kTailDrop:
        return false;
    case PolicyKind::kEpd:
        return x > p.r_cells;
    case PolicyKind::kSelectiveDrop:
        // Y_i * N_a / X > Z, evaluated as Y_i * N_a * Zden > Znum * X.
        return x > p.r_cells &&
               Wide(y_vc) * active * p.z_den > Wide(p.z_num) * x;
    case PolicyKind::kFba:
        // Y_i * N_a / X > Z * (K - R) / (X - R); X > R keeps X - R positive.
        return x > p.r_cells &&
               Wide(y_vc) * active * p.z_den * (x - p.r_cells) >
                   Wide(p.z_num) * x * (capacity - p.r_cells);
    }
    return false;
}

DropReason policy_reason(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::kEpd: return DropReason::kEpdThreshold;
    case PolicyKind::kSelectiveDrop: return DropReason::kLoadRatio;
    case PolicyKind::kFba: return DropReason::kFbaThreshold;
    case PolicyKind::kTailDrop: break;
    }
    return DropReason::kTail;
}

} // namespace

SwitchQueue::SwitchQueue(std::int64_t capacity_cells, const DropPolicy& policy,
                         int n_vcs, TraceSink& trace)
    : capacity_(capacity_cells),
      policy_(policy),
      per_vc_(static_cast<std::size_t>(n_vcs), 0),
      discarding_(static_cast<std::size_t>(n_vcs), 0),
      discard_reason_(static_cast<std::size_t>(n_vcs), DropReason::kTail),
      vc_frame_(static_cast<std::size_t>(n_vcs), 0xffffffffu),
      vc_frame_dropped_(static_cast<std::size_t>(n_vcs), 0),
      vc_frame_seen_(static_cast<std::size_t>(n_vcs), 0),
      trace_(trace) {
    if (capacity_ <= 0)
        throw SimError("switch_capacity", "capacity must be positive");
}

bool SwitchQueue::frame_start_drop(const DropPolicy& policy, std::int64_t capacity,
                                   std::int64_t x, std::int64_t y_vc,
                                   std::int64_t active) {
    return policy_frame_drop(policy, capacity, x, y_vc, active) || x >= capacity;
}

void SwitchQueue::accept_cell(const Cell& cell, SimTime now) {
    fifo_.push_back(cell);
    occupancy_++;
    if (per_vc_[cell.vc]++ == 0)
        active_++;
    if (occupancy_ > stats_.max_occupancy)
        stats_.max_occupancy = occupancy_;
    stats_.cells_accepted++;
    trace_.on_queue(QueueRecord{now, static_cast<std::uint32_t>(occupancy_),
                                QueueEvent::kAccept});
}

void SwitchQueue::drop_cell(const Cell& cell, SimTime now, DropReason reason) {
    stats_.cells_dropped++;
    trace_.on_queue(QueueRecord{now, static_cast<std::uint32_t>(occupancy_),
                                QueueEvent::kDrop});
    trace_.on_drop(DropRecord{now, cell.vc, cell.frame, reason});
}

bool SwitchQueue::admit(const Cell& cell, SimTime now) {
    std::size_t vc = cell.vc;
    if (vc_frame_[vc] != cell.frame) {
        vc_frame_[vc] = cell.frame;
        vc_frame_dropped_[vc] = 0;
        vc_frame_seen_[vc] = 0;
    }
    vc_frame_seen_[vc]++;

    bool drop;
    DropReason reason = DropReason::kTail;

    if (policy_.kind == PolicyKind::kTailDrop) {
        drop = occupancy_ >= capacity_;
        if (cell.is_frame_start()) {
            stats_.frame_starts_seen++;
            if (drop)
                stats_.frame_starts_dropped++;
            trace_.on_admission(AdmissionRecord{
                now, cell.vc, cell.frame, static_cast<std::uint32_t>(occupancy_),
                static_cast<std::uint32_t>(per_vc_[vc]),
                static_cast<std::uint32_t>(active_),
                static_cast<std::uint8_t>(drop ? 0 : 1)});
        }
    } else if (cell.is_frame_start()) {
        stats_.frame_starts_seen++;
        bool by_policy = policy_frame_drop(policy_, capacity_, occupancy_,
                                           per_vc_[vc], active_);
        bool by_tail = occupancy_ >= capacity_;
        drop = by_policy || by_tail;
        reason = by_policy ? policy_reason(policy_.kind) : DropReason::kTail;
        if (drop) {
            discarding_[vc] = 1;
            discard_reason_[vc] = reason;
            stats_.frame_starts_dropped++;
        } else {
            discarding_[vc] = 0;
        }
        trace_.on_admission(AdmissionRecord{
            now, cell.vc, cell.frame, static_cast<std::uint32_t>(occupancy_),
            static_cast<std::uint32_t>(per_vc_[vc]),
            static_cast<std::uint32_t>(active_),
            static_cast<std::uint8_t>(drop ? 0 : 1)});
    } else {
        // Mid-frame: either the frame is already being discarded, or the
        // cell is accepted while room remains. Overflow mid-frame dooms the
        // rest of the frame too.
        if (discarding_[vc]) {
            drop = true;
            reason = discard_reason_[vc];
        } else if (occupancy_ >= capacity_) {
            drop = true;
            reason = DropReason::kTail;
            discarding_[vc] = 1;
            discard_reason_[vc] = DropReason::kTail;
        } else {
            drop = false;
        }
    }

    if (drop) {
        drop_cell(cell, now, reason);
        vc_frame_dropped_[vc]++;
        if (cell.eom && vc_frame_dropped_[vc] == cell.cell_count) {
            fully_dropped_.push_back(FullyDroppedFrame{cell.vc, cell.frame,
                                                       cell.data_len});
            stats_.frames_fully_dropped++;
        }
        return false;
    }
    accept_cell(cell, now);
    return true;
}

std::optional<Cell> SwitchQueue::dequeue(SimTime now) {
    if (fifo_.empty())
        return std::nullopt;
    Cell head = fifo_.front();
    fifo_.pop_front();
    occupancy_--;
    if (--per_vc_[head.vc] == 0)
        active_--;
    trace_.on_queue(QueueRecord{now, static_cast<std::uint32_t>(occupancy_),
                                QueueEvent::kDepart});
    return head;
}

std::vector<SwitchQueue::FullyDroppedFrame> SwitchQueue::take_fully_dropped() {
    return std::move(fully_dropped_);
}

} // namespace ubrsim
