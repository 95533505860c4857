#ifndef UBRSIM_METRICS_H
#define UBRSIM_METRICS_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ubrsim/sim_time.h"
#include "ubrsim/trace.h"

namespace ubrsim {

// Highest throughput the TCP layer can attain on a link of `link_rate_mbps`
// with `mss`-byte segments, in Mbps: the useful-data fraction of the framed,
// cell-padded wire footprint.
double max_tcp_throughput_mbps(double link_rate_mbps, int mss);

// Aggregate goodput divided by the attainable maximum.
double efficiency(const std::vector<double>& throughputs_mbps, double c_mbps);

// Jain index over throughputs normalized by their fair shares. Undefined for
// an all-zero vector (returned as nullopt, never a number).
std::optional<double> fairness_index(const std::vector<double>& throughputs,
                                     const std::vector<double>& fair_shares);

// Worst-case recovery round trips for a selective-acknowledgment sender that
// lost a 1/n fraction of its window, 2 < n <= 4. Near n = 2 the bound blows
// up and recovery degenerates to slow-start-like doubling, reported via the
// flag instead of a round-trip count.
struct SackRecoveryBound {
    int rtts = 0;
    bool slow_start_regime = false;
};
SackRecoveryBound sack_recovery_bound(double n);

// Per-VC byte conservation. Every data byte handed to the adaptation layer
// ends up in exactly one of: delivered frames, frames discarded during
// reassembly, frames wholly dropped at the switch, or still in flight when
// the run ended. Delivered frames split further at the receiver.
struct LedgerTotals {
    std::int64_t emitted_bytes = 0;          // sender data handed to adaptation
    std::int64_t delivered_frame_bytes = 0;  // frames reassembled at the sink
    std::int64_t reasm_discard_bytes = 0;    // frames discarded in reassembly
    std::int64_t fully_dropped_bytes = 0;    // frames with every cell dropped
    std::int64_t pending_bytes = 0;          // frames physically in flight at end

    std::int64_t app_delivered_bytes = 0;    // in-order bytes the app consumed
    std::int64_t duplicate_bytes = 0;        // arrived but already held
    std::int64_t ooo_held_bytes = 0;         // buffered out of order at end

    bool balances() const {
        return emitted_bytes == delivered_frame_bytes + reasm_discard_bytes +
                                    fully_dropped_bytes + pending_bytes &&
               delivered_frame_bytes ==
                   app_delivered_bytes + duplicate_bytes + ooo_held_bytes;
    }
    std::string describe() const;
};

struct VcReport {
    std::int64_t delivered_bytes = 0;  // in-order bytes handed to the app
    std::int64_t timeouts = 0;
    std::int64_t fast_retransmits = 0;
    std::int64_t retransmits = 0;
    std::int64_t segments_sent = 0;
};

// Everything a finished run reports.
struct RunReport {
    std::vector<VcReport> per_vc;
    SimTime duration_ns = 0;
    std::int64_t max_queue_cells = 0;
    std::int64_t wasted_wire_bytes = 0;  // 53 bytes per delivered-then-discarded cell
    std::int64_t cells_dropped = 0;
    std::int64_t cells_through = 0;
    LedgerTotals ledger;
    std::vector<AdmissionRecord> admissions;  // filled when capture enabled
    std::vector<std::string> trace_files;     // streams written for this run
    std::uint64_t events_delivered = 0;

    // Derived metrics, filled by finalize().
    std::vector<double> throughputs_mbps;
    double max_throughput_mbps = 0;
    double efficiency = 0;
    std::optional<double> fairness;

    // Computes throughputs against equal fair shares of `c_mbps`.
    void finalize(double c_mbps);
};

} // namespace ubrsim

#endif
