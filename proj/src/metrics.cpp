#include "ubrsim/metrics.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ubrsim/cell.h"

namespace ubrsim {

double max_tcp_throughput_mbps(double link_rate_mbps, int mss) {
    if (mss <= 0)
        throw std::invalid_argument("mss must be positive");
    int cells = cells_for_segment(mss);
    return link_rate_mbps * mss / (static_cast<double>(kCellWireBytes) * cells);
}

double efficiency(const std::vector<double>& throughputs_mbps, double c_mbps) {
    if (c_mbps <= 0)
        throw std::invalid_argument("link capacity must be positive");
    double sum = 0;
    for (double x : throughputs_mbps)
        sum += x;
    return sum / c_mbps;
}

std::optional<double> fairness_index(const std::vector<double>& throughputs,
                                     const std::vector<double>& fair_shares) {
    if (throughputs.size() != fair_shares.size() || throughputs.empty())
        throw std::invalid_argument("throughput and fair-share vectors must match");
    std::vector<double> ratios(throughputs.size());
    double top = 0;
    for (std::size_t i = 0; i < throughputs.size(); i++) {
        if (fair_shares[i] <= 0)
            throw std::invalid_argument("fair shares must be positive");
        ratios[i] = throughputs[i] / fair_shares[i];
        top = std::max(top, ratios[i]);
    }
    if (top == 0)
        return std::nullopt;
    // Normalizing by the largest ratio keeps the index scale-free and makes
    // the equal-share case land on 1 without rounding residue.
    double sum = 0, sum_sq = 0;
    for (double& r : ratios) {
        r /= top;
        sum += r;
        sum_sq += r * r;
    }
    double n = static_cast<double>(throughputs.size());
    return (sum * sum) / (n * sum_sq);
}

SackRecoveryBound sack_recovery_bound(double n) {
    if (!(n > 2.0) || n > 4.0)
        throw std::invalid_argument("n must satisfy 2 < n <= 4");
    double raw = std::log2(n / (n - 2.0));
    // Past ~2^16 round trips the bound says nothing useful; the sender is in
    // the doubling regime where recovery proceeds no slower than slow start.
    if (raw > 16.0)
        return SackRecoveryBound{0, true};
    return SackRecoveryBound{static_cast<int>(std::ceil(raw)), false};
}

std::string LedgerTotals::describe() const {
    std::ostringstream os;
    os << "emitted=" << emitted_bytes << " delivered=" << delivered_frame_bytes
       << " reasm_discard=" << reasm_discard_bytes
       << " fully_dropped=" << fully_dropped_bytes << " pending=" << pending_bytes
       << " | app=" << app_delivered_bytes << " dup=" << duplicate_bytes
       << " ooo_held=" << ooo_held_bytes;
    return os.str();
}

void RunReport::finalize(double c_mbps) {
    max_throughput_mbps = c_mbps;
    throughputs_mbps.clear();
    throughputs_mbps.reserve(per_vc.size());
    double dur_s = static_cast<double>(duration_ns) / 1e9;
    for (const VcReport& vc : per_vc)
        throughputs_mbps.push_back(static_cast<double>(vc.delivered_bytes) * 8.0 /
                                   dur_s / 1e6);
    efficiency = ubrsim::efficiency(throughputs_mbps, c_mbps);
    std::vector<double> shares(per_vc.size(),
                               c_mbps / static_cast<double>(per_vc.size()));
    fairness = fairness_index(throughputs_mbps, shares);
}

} // namespace ubrsim
