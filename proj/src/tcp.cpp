#include "ubrsim/tcp.h"

#include <algorithm>
#include <cstdlib>

namespace ubrsim {

namespace {
constexpr int kInitialRtoTicks = 3;
constexpr int kMaxRtoTicks = 64;
constexpr int kDupAckThreshold = 3;
} // namespace

const char* cc_variant_name(CcVariant v) {
    switch (v) {
    case CcVariant::kVanilla: return "vanilla";
    case CcVariant::kReno: return "reno";
    case CcVariant::kNewReno: return "newreno";
    case CcVariant::kSack: return "sack";
    }
    return "?";
}

TcpSender::TcpSender(int vc, CcVariant variant, std::int64_t mss, std::int64_t rcvwnd,
                     std::int64_t ssthresh_init, TcpSenderEnv& env, TraceSink& trace)
    : vc_(vc),
      variant_(variant),
      mss_(mss),
      rcvwnd_(rcvwnd),
      cwnd_(mss),
      ssthresh_(ssthresh_init),
      rto_ticks_(kInitialRtoTicks),
      env_(env),
      trace_(trace) {
    this->trace(CwndTag::kInit);
}

int TcpSender::effective_rto_ticks() const {
    std::int64_t rto = static_cast<std::int64_t>(rto_ticks_) << backoff_shift_;
    return static_cast<int>(std::clamp<std::int64_t>(rto, 1, kMaxRtoTicks));
}

std::int64_t TcpSender::loss_ssthresh() const {
    return std::max(2 * mss_, std::min(cwnd_ / 2, rcvwnd_));
}

void TcpSender::trace(CwndTag tag) {
    trace_.on_cwnd(CwndRecord{env_.now_ns(), static_cast<std::uint16_t>(vc_),
                              static_cast<std::uint32_t>(cwnd_),
                              static_cast<std::uint32_t>(ssthresh_), tag});
}

void TcpSender::arm_timer() {
    timer_epoch_++;
    timer_armed_ = true;
    env_.arm_rtx_timer(effective_rto_ticks(), timer_epoch_);
}

void TcpSender::restart_or_stop_timer() {
    if (snd_una_ < snd_max_) {
        arm_timer();
    } else {
        timer_armed_ = false;
        timer_epoch_++;
    }
}

void TcpSender::send_segment(std::int64_t seq) {
    bool is_retransmission = seq < snd_max_;

    if (variant_ == CcVariant::kSack) {
        auto [it, inserted] = scoreboard_.try_emplace(seq);
        if (is_retransmission)
            it->second.retransmitted = true;
    }

    // Karn: a retransmitted segment can no longer provide an RTT sample.
    if (timing_ && is_retransmission && seq == timed_seq_)
        timing_ = false;
    if (!timing_ && !is_retransmission) {
        timing_ = true;
        timed_seq_ = seq;
        timed_tick_ = env_.now_tick();
    }

    if (seq == snd_nxt_)
        snd_nxt_ += mss_;
    snd_max_ = std::max(snd_max_, snd_nxt_);

    stats_.segments_sent++;
    stats_.data_bytes_sent += mss_;
    if (is_retransmission)
        stats_.retransmits++;

    TcpSegment seg;
    seg.vc = vc_;
    seg.seq = seq;
    seg.data_len = static_cast<std::int32_t>(mss_);
    env_.transmit(seg);

    if (!timer_armed_)
        arm_timer();
}

std::int64_t TcpSender::find_sack_hole() const {
    // A hole is a sent, unacknowledged, never-retransmitted segment below the
    // highest SACKed byte. Segments above the SACKed region carry no loss
    // information yet and are left alone.
    std::int64_t high_sacked = 0;
    for (auto it = scoreboard_.rbegin(); it != scoreboard_.rend(); ++it) {
        if (it->second.sacked) {
            high_sacked = it->first + mss_;
            break;
        }
    }
    for (auto it = scoreboard_.lower_bound(snd_una_); it != scoreboard_.end(); ++it) {
        if (it->first + mss_ > high_sacked)
            break;
        if (!it->second.sacked && !it->second.retransmitted)
            return it->first;
    }
    return -1;
}

bool TcpSender::is_sacked(std::int64_t seq) const {
    auto it = scoreboard_.find(seq);
    return it != scoreboard_.end() && it->second.sacked;
}

void TcpSender::mark_sacked(const TcpSegment& seg) {
    for (int i = 0; i < seg.n_sack; i++) {
        const SackBlock& b = seg.sack[i];
        for (auto it = scoreboard_.lower_bound(b.left);
             it != scoreboard_.end() && it->first < b.right; ++it)
            it->second.sacked = true;
    }
}

void TcpSender::try_send() {
    if (variant_ == CcVariant::kSack && in_recovery_) {
        // Transmission in recovery is gated by PIPE, and scoreboard holes are
        // retransmitted before any new data.
        while (pipe_ < cwnd_) {
            std::int64_t hole = find_sack_hole();
            if (hole >= 0) {
                send_segment(hole);
            } else if ((app_limit_ < 0 || snd_nxt_ < app_limit_) &&
                       snd_nxt_ - snd_una_ < rcvwnd_) {
                send_segment(snd_nxt_);
            } else {
                break;
            }
            pipe_ += mss_;
        }
        return;
    }

    std::int64_t wnd = std::min(cwnd_, rcvwnd_);
    while (snd_nxt_ - snd_una_ < wnd && (app_limit_ < 0 || snd_nxt_ < app_limit_))
        send_segment(snd_nxt_);
}

void TcpSender::enter_fast_retransmit() {
    ssthresh_ = loss_ssthresh();
    if (variant_ == CcVariant::kNewReno || variant_ == CcVariant::kSack)
        recover_ = snd_max_;
    in_recovery_ = true;
    stats_.fast_retransmits++;

    if (variant_ == CcVariant::kSack) {
        // PIPE starts at the old window less the three segments the
        // duplicate ACKs reported as having left the network.
        pipe_ = std::max<std::int64_t>(0, cwnd_ - 3 * mss_);
        cwnd_ = ssthresh_;
        trace(CwndTag::kFastRetransmit);
        send_segment(snd_una_);
        pipe_ += mss_;
    } else {
        cwnd_ = ssthresh_ + 3 * mss_;
        trace(CwndTag::kFastRetransmit);
        send_segment(snd_una_);
    }
}

void TcpSender::on_ack(const TcpSegment& seg) {
    std::int64_t ack = seg.ack;
    if (ack > snd_max_)
        throw SimError("tcp_ack_beyond_snd_max",
                       "vc " + std::to_string(vc_) + " ack " + std::to_string(ack) +
                           " snd_max " + std::to_string(snd_max_));

    if (variant_ == CcVariant::kSack && seg.n_sack > 0)
        mark_sacked(seg);

    if (ack > snd_una_) {
        if (timing_ && ack > timed_seq_) {
            timing_ = false;
            update_rtt(env_.now_tick() - timed_tick_);
            backoff_shift_ = 0;
        }

        snd_una_ = ack;
        if (snd_nxt_ < snd_una_)
            snd_nxt_ = snd_una_;
        scoreboard_.erase(scoreboard_.begin(), scoreboard_.lower_bound(ack));

        if (in_recovery_) {
            bool partial = (variant_ == CcVariant::kNewReno ||
                            variant_ == CcVariant::kSack) &&
                           ack < recover_;
            if (partial) {
                dupacks_ = 0;
                if (variant_ == CcVariant::kNewReno) {
                    trace(CwndTag::kPartialAck);
                    // The ACK names the next missing segment; resend it now
                    // without waiting for more duplicate ACKs.
                    send_segment(snd_una_);
                } else {
                    // Retransmitted segment left the pipe, and the original
                    // it replaced is now known lost.
                    pipe_ = std::max<std::int64_t>(0, pipe_ - 2 * mss_);
                    trace(CwndTag::kPartialAck);
                }
            } else {
                in_recovery_ = false;
                cwnd_ = ssthresh_;
                pipe_ = 0;
                dupacks_ = 0;
                trace(CwndTag::kRecoveryExit);
            }
        } else {
            // Window growth is per ACK received, not per byte acknowledged.
            if (cwnd_ < ssthresh_) {
                cwnd_ += mss_;
                trace(CwndTag::kSlowStart);
            } else {
                cwnd_ += std::max<std::int64_t>(1, mss_ * mss_ / cwnd_);
                trace(CwndTag::kCongAvoid);
            }
            dupacks_ = 0;
        }
        restart_or_stop_timer();
    } else if (ack == snd_una_ && snd_max_ > snd_una_ && seg.data_len == 0) {
        dupacks_++;
        stats_.dup_acks_seen++;
        if (in_recovery_) {
            if (variant_ == CcVariant::kSack) {
                pipe_ = std::max<std::int64_t>(0, pipe_ - mss_);
            } else {
                cwnd_ += mss_;
                trace(CwndTag::kDupInflate);
            }
        } else if (dupacks_ == kDupAckThreshold && variant_ != CcVariant::kVanilla) {
            enter_fast_retransmit();
        }
    }

    try_send();
}

void TcpSender::handle_timeout() {
    stats_.timeouts++;
    ssthresh_ = loss_ssthresh();
    cwnd_ = mss_;
    snd_nxt_ = snd_una_;  // go-back-N: resend everything outstanding
    in_recovery_ = false;
    dupacks_ = 0;
    pipe_ = 0;
    scoreboard_.clear();
    timing_ = false;
    backoff_shift_ = std::min(backoff_shift_ + 1, 8);
    trace(CwndTag::kTimeout);
    arm_timer();
    try_send();
}

void TcpSender::on_timer(std::uint64_t epoch) {
    if (!timer_armed_ || epoch != timer_epoch_)
        return;  // stale timer from a superseded arm
    handle_timeout();
}

void TcpSender::update_rtt(std::int64_t sample_ticks) {
    if (!rtt_valid_) {
        srtt_x8_ = sample_ticks * 8;
        rttvar_x8_ = sample_ticks * 4;
        rtt_valid_ = true;
    } else {
        std::int64_t err = sample_ticks * 8 - srtt_x8_;
        srtt_x8_ += err >> 3;
        std::int64_t abs_err = err < 0 ? -err : err;
        rttvar_x8_ += (abs_err - rttvar_x8_) >> 2;
        if (rttvar_x8_ < 0)
            rttvar_x8_ = 0;
    }
    std::int64_t rto = (srtt_x8_ + 4 * rttvar_x8_ + 7) >> 3;
    rto_ticks_ = static_cast<int>(std::clamp<std::int64_t>(rto, 1, kMaxRtoTicks));
}

TcpSegment TcpReceiver::on_segment(const TcpSegment& seg) {
    stats_.segments_received++;
    std::int64_t s = seg.seq;
    std::int64_t e = seg.seq + seg.data_len;

    // Bytes of this segment we already hold, for the conservation ledger.
    std::int64_t dup = std::max<std::int64_t>(0, std::min(e, rcv_nxt_) - s);
    for (const Block& b : blocks_) {
        std::int64_t lo = std::max(s, b.left);
        std::int64_t hi = std::min(e, b.right);
        if (hi > lo)
            dup += hi - lo;
    }
    stats_.duplicate_bytes += dup;

    int merged_idx = -1;
    if (e <= rcv_nxt_) {
        // Stale duplicate; re-acknowledge.
    } else if (s <= rcv_nxt_) {
        rcv_nxt_ = e;
        while (!blocks_.empty() && blocks_.front().left <= rcv_nxt_) {
            rcv_nxt_ = std::max(rcv_nxt_, blocks_.front().right);
            blocks_.erase(blocks_.begin());
        }
    } else {
        // Out of order: merge [s,e) with any touching blocks.
        Block nb{s, e, ++touch_counter_};
        std::size_t i = 0;
        while (i < blocks_.size() && blocks_[i].right < s)
            i++;
        while (i < blocks_.size() && blocks_[i].left <= e) {
            nb.left = std::min(nb.left, blocks_[i].left);
            nb.right = std::max(nb.right, blocks_[i].right);
            blocks_.erase(blocks_.begin() + static_cast<std::ptrdiff_t>(i));
        }
        blocks_.insert(blocks_.begin() + static_cast<std::ptrdiff_t>(i), nb);
        merged_idx = static_cast<int>(i);
    }

    TcpSegment ack;
    ack.vc = vc_;
    ack.ack = rcv_nxt_;
    if (sack_enabled_ && !blocks_.empty()) {
        // Most recent information first: the block holding the segment that
        // triggered this ACK, then the remaining blocks by recency.
        std::vector<int> order;
        order.reserve(blocks_.size());
        for (int i = 0; i < static_cast<int>(blocks_.size()); i++)
            if (i != merged_idx)
                order.push_back(i);
        std::sort(order.begin(), order.end(), [this](int a, int b) {
            return blocks_[static_cast<std::size_t>(a)].touched >
                   blocks_[static_cast<std::size_t>(b)].touched;
        });
        if (merged_idx >= 0)
            order.insert(order.begin(), merged_idx);
        for (int idx : order) {
            if (ack.n_sack == 3)
                break;
            const Block& b = blocks_[static_cast<std::size_t>(idx)];
            ack.sack[static_cast<std::size_t>(ack.n_sack++)] = SackBlock{b.left, b.right};
        }
    }
    return ack;
}

std::int64_t TcpReceiver::out_of_order_bytes() const {
    std::int64_t total = 0;
    for (const Block& b : blocks_)
        total += b.right - b.left;
    return total;
}

} // namespace ubrsim
