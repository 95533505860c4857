#ifndef UBRSIM_TCP_H
#define UBRSIM_TCP_H

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "ubrsim/sim_error.h"
#include "ubrsim/sim_time.h"
#include "ubrsim/trace.h"

namespace ubrsim {

enum class CcVariant : std::uint8_t {
    kVanilla = 0,  // slow start + congestion avoidance only
    kReno = 1,     // + fast retransmit / fast recovery
    kNewReno = 2,  // + partial-ACK retransmission inside recovery
    kSack = 3,     // + selective acknowledgments with PIPE accounting
};

const char* cc_variant_name(CcVariant v);

struct SackBlock {
    std::int64_t left = 0;   // first byte of the block
    std::int64_t right = 0;  // one past the last byte
};

struct TcpSegment {
    int vc = 0;
    std::int64_t seq = 0;
    std::int32_t data_len = 0;
    std::int64_t ack = 0;
    std::array<SackBlock, 3> sack{};
    int n_sack = 0;

    bool has_data() const { return data_len > 0; }
};

// Services a sender needs from its host: segment transmission and the coarse
// retransmission-timer machinery. `now_tick` is the free-running timer tick
// count (ticks since t=0, not since connection start).
class TcpSenderEnv {
public:
    virtual ~TcpSenderEnv() = default;
    virtual void transmit(const TcpSegment& seg) = 0;
    // Arm (or re-arm) the retransmission timer for rto ticks; fires aligned
    // to tick boundaries. Earlier epochs become stale.
    virtual void arm_rtx_timer(int rto_ticks, std::uint64_t epoch) = 0;
    virtual std::int64_t now_tick() const = 0;
    virtual SimTime now_ns() const = 0;
};

struct TcpSenderStats {
    std::int64_t segments_sent = 0;
    std::int64_t retransmits = 0;
    std::int64_t fast_retransmits = 0;
    std::int64_t timeouts = 0;
    std::int64_t data_bytes_sent = 0;  // includes retransmissions
    std::int64_t dup_acks_seen = 0;
};

// One TCP data sender. Greedy by default (always has data); a byte limit can
// be set for harness runs. Sequence space starts at 0 and all emissions are
// full MSS segments.
class TcpSender {
public:
    TcpSender(int vc, CcVariant variant, std::int64_t mss, std::int64_t rcvwnd,
              std::int64_t ssthresh_init, TcpSenderEnv& env, TraceSink& trace);

    // Emits as many segments as the window rules allow right now.
    void try_send();

    // Cumulative (possibly duplicate) acknowledgment from the receiver.
    void on_ack(const TcpSegment& seg);

    // Retransmission timer fired with this epoch; stale epochs are ignored.
    void on_timer(std::uint64_t epoch);

    std::int64_t cwnd() const { return cwnd_; }
    std::int64_t ssthresh() const { return ssthresh_; }
    std::int64_t snd_una() const { return snd_una_; }
    std::int64_t snd_nxt() const { return snd_nxt_; }
    std::int64_t snd_max() const { return snd_max_; }
    std::int64_t pipe() const { return pipe_; }
    std::int64_t recover() const { return recover_; }
    bool in_recovery() const { return in_recovery_; }
    int dupacks() const { return dupacks_; }
    int rto_ticks() const { return rto_ticks_; }
    int effective_rto_ticks() const;
    std::int64_t srtt_x8() const { return srtt_x8_; }
    std::int64_t rttvar_x8() const { return rttvar_x8_; }
    bool rtx_timer_armed() const { return timer_armed_; }
    const TcpSenderStats& stats() const { return stats_; }

    // Restrict the application supply (default unlimited).
    void set_app_limit_bytes(std::int64_t bytes) { app_limit_ = bytes; }

    // RTT estimator update, exposed for direct testing. `sample_ticks` is a
    // whole-tick RTT measurement.
    void update_rtt(std::int64_t sample_ticks);

    // True if byte range [seq, seq+mss) is marked SACKed (test hook).
    bool is_sacked(std::int64_t seq) const;

private:
    struct Scoreboard {
        bool sacked = false;
        bool retransmitted = false;
    };

    void send_segment(std::int64_t seq);
    void enter_fast_retransmit();
    void handle_timeout();
    std::int64_t loss_ssthresh() const;
    std::int64_t find_sack_hole() const;
    void mark_sacked(const TcpSegment& seg);
    void restart_or_stop_timer();
    void arm_timer();
    void trace(CwndTag tag);

    int vc_;
    CcVariant variant_;
    std::int64_t mss_;
    std::int64_t rcvwnd_;

    std::int64_t cwnd_;
    std::int64_t ssthresh_;
    std::int64_t snd_una_ = 0;
    std::int64_t snd_nxt_ = 0;
    std::int64_t snd_max_ = 0;  // highest byte ever sent
    int dupacks_ = 0;
    bool in_recovery_ = false;
    std::int64_t recover_ = 0;
    std::int64_t pipe_ = 0;
    std::map<std::int64_t, Scoreboard> scoreboard_;

    // Round-trip estimator, fixed point scaled by 8. rto = srtt + 4*rttvar
    // in whole ticks, never below one tick.
    std::int64_t srtt_x8_ = 0;
    std::int64_t rttvar_x8_ = 0;
    bool rtt_valid_ = false;
    int rto_ticks_;
    int backoff_shift_ = 0;

    bool timing_ = false;  // one concurrently timed segment (Karn's rule)
    std::int64_t timed_seq_ = 0;
    std::int64_t timed_tick_ = 0;

    std::uint64_t timer_epoch_ = 0;
    bool timer_armed_ = false;

    std::int64_t app_limit_ = -1;

    TcpSenderEnv& env_;
    TraceSink& trace_;
    TcpSenderStats stats_;
};

struct TcpReceiverStats {
    std::int64_t segments_received = 0;
    std::int64_t duplicate_bytes = 0;  // arrived data already held
};

// TCP data receiver: immediate cumulative ACK per segment, out-of-order data
// buffered, selective-acknowledgment blocks reported when enabled.
class TcpReceiver {
public:
    TcpReceiver(int vc, bool sack_enabled) : vc_(vc), sack_enabled_(sack_enabled) {}

    // Processes a data segment and returns the acknowledgment to send.
    TcpSegment on_segment(const TcpSegment& seg);

    std::int64_t rcv_nxt() const { return rcv_nxt_; }
    std::int64_t out_of_order_bytes() const;
    const TcpReceiverStats& stats() const { return stats_; }

private:
    struct Block {
        std::int64_t left;
        std::int64_t right;
        std::uint64_t touched;  // recency stamp for SACK block ordering
    };

    int vc_;
    bool sack_enabled_;
    std::int64_t rcv_nxt_ = 0;
    std::vector<Block> blocks_;  // disjoint, sorted by left edge
    std::uint64_t touch_counter_ = 0;
    TcpReceiverStats stats_;
};

} // namespace ubrsim

#endif
