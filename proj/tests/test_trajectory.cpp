#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/loss_harness.h"

using namespace ubrsim;
using harness::LossHarness;

namespace {

constexpr std::int64_t kMss = 512;

LossHarness::Params params(CcVariant v, std::int64_t ssthresh_init) {
    LossHarness::Params p;
    p.variant = v;
    p.ssthresh_init = ssthresh_init;
    return p;
}

// Runs until cwnd reaches `target` bytes; requires success.
void grow_to(LossHarness& h, std::int64_t target) {
    h.start();
    bool ok = h.run_until_cond([&] { return h.sender().cwnd() >= target; },
                               30 * kNsPerSec);
    REQUIRE(ok);
}

// cwnd of the trace record immediately preceding the given one.
std::int64_t cwnd_before(const LossHarness& h, const CwndRecord* rec) {
    std::int64_t prev = kMss;
    for (const auto& r : h.cwnd_trace()) {
        if (&r == rec)
            return prev;
        prev = r.cwnd;
    }
    return prev;
}

int rtts_between(const LossHarness& h, SimTime a, SimTime b) {
    return static_cast<int>(std::llround(static_cast<double>(b - a) /
                                         static_cast<double>(h.rtt())));
}

} // namespace

TEST_CASE("slow start doubles the window every round trip") {
    LossHarness h(params(CcVariant::kVanilla, 64 * kMss));
    h.start();
    h.run_until(6 * h.rtt());
    // Between bursts the window sits at 2^k segments.
    double c35 = static_cast<double>(h.cwnd_at(h.rtt() * 7 / 2));
    double c45 = static_cast<double>(h.cwnd_at(h.rtt() * 9 / 2));
    double ratio = c45 / c35;
    CHECK(ratio >= 1.9);
    CHECK(ratio <= 2.1);
    CHECK(h.sender().stats().timeouts == 0);
    CHECK(h.sender().stats().retransmits == 0);
}

TEST_CASE("congestion avoidance adds at most one segment per round trip") {
    LossHarness h(params(CcVariant::kVanilla, 4 * kMss));
    h.start();
    h.run_until(10 * h.rtt());
    for (int k = 10; k < 30; k++) {
        std::int64_t a = h.cwnd_at(h.rtt() * (2 * k + 1) / 2);
        std::int64_t b = h.cwnd_at(h.rtt() * (2 * k + 3) / 2);
        CHECK(b - a <= kMss);
        CHECK(b >= a);
    }
    CHECK(h.sender().stats().retransmits == 0);
}

TEST_CASE("reno: one isolated loss recovers in-window with no timeout") {
    LossHarness h(params(CcVariant::kReno, 16 * kMss));
    grow_to(h, 40 * kMss);
    h.arm_fresh_drops(1);
    bool recovered = h.run_until_cond(
        [&] { return h.first_tagged(CwndTag::kRecoveryExit) != nullptr; },
        h.engine().now() + 5 * kNsPerSec);
    REQUIRE(recovered);

    CHECK(h.sender().stats().timeouts == 0);
    CHECK(h.sender().stats().fast_retransmits == 1);

    const CwndRecord* entry = h.first_tagged(CwndTag::kFastRetransmit);
    const CwndRecord* exit = h.first_tagged(CwndTag::kRecoveryExit);
    REQUIRE(entry);
    REQUIRE(exit);
    std::int64_t cwnd0 = cwnd_before(h, entry);
    // Halved window, exactly: rcvwnd is far larger than cwnd here.
    CHECK(entry->ssthresh == cwnd0 / 2);
    CHECK(exit->cwnd == entry->ssthresh);
    // Recovery completes within ~one round trip of learning about the loss.
    CHECK(rtts_between(h, entry->time_ns, exit->time_ns) <= 1);
}

TEST_CASE("reno: three contiguous losses force a retransmission timeout") {
    LossHarness h(params(CcVariant::kReno, 16 * kMss));
    grow_to(h, 40 * kMss);
    h.arm_fresh_drops(3);
    bool timed_out = h.run_until_cond(
        [&] { return h.sender().stats().timeouts >= 1; },
        h.engine().now() + 30 * kNsPerSec);
    CHECK(timed_out);
    // The doomed pattern: retransmit fast, twice, then stall.
    CHECK(h.sender().stats().fast_retransmits >= 1);

    // Timeout semantics: window collapses to one segment and ssthresh takes
    // max(2 MSS, min(cwnd/2, rcvwnd)) of the pre-timeout window.
    const CwndRecord* to = h.first_tagged(CwndTag::kTimeout);
    REQUIRE(to);
    std::int64_t before = cwnd_before(h, to);
    std::int64_t expect = std::max(
        2 * kMss, std::min(before / 2, std::int64_t(1) << 20));
    CHECK(to->cwnd == kMss);
    CHECK(to->ssthresh == expect);

    // Go-back-N: the first transmission after the timeout is a resend.
    bool found = false;
    for (const auto& t : h.transmissions()) {
        if (t.time >= to->time_ns && !t.dropped) {
            CHECK(!t.fresh);
            found = true;
            break;
        }
    }
    CHECK(found);
}

TEST_CASE("newreno: k contiguous losses recover in about k round trips") {
    for (int k = 2; k <= 4; k++) {
        CAPTURE(k);
        LossHarness h(params(CcVariant::kNewReno, 16 * kMss));
        grow_to(h, 40 * kMss);
        h.arm_fresh_drops(k);
        bool recovered = h.run_until_cond(
            [&] { return h.first_tagged(CwndTag::kRecoveryExit) != nullptr; },
            h.engine().now() + 30 * kNsPerSec);
        REQUIRE(recovered);
        CHECK(h.sender().stats().timeouts == 0);

        const CwndRecord* entry = h.first_tagged(CwndTag::kFastRetransmit);
        const CwndRecord* exit = h.first_tagged(CwndTag::kRecoveryExit);
        REQUIRE(entry);
        REQUIRE(exit);
        int rtts = rtts_between(h, entry->time_ns, exit->time_ns);
        CHECK(rtts >= k - 1);
        CHECK(rtts <= k + 1);
        // One forced retransmission per partial ACK.
        CHECK(h.sender().stats().fast_retransmits == 1);
    }
}

TEST_CASE("sack: losing a quarter of the window recovers in one round trip") {
    LossHarness h(params(CcVariant::kSack, 32 * kMss));
    grow_to(h, 32 * kMss);
    // Let congestion avoidance settle for a couple of round trips.
    h.run_until(h.engine().now() + 2 * h.rtt());
    std::int64_t w = h.sender().cwnd();
    h.arm_fresh_drops(static_cast<int>(w / kMss / 4));

    bool recovered = h.run_until_cond(
        [&] { return h.first_tagged(CwndTag::kRecoveryExit) != nullptr; },
        h.engine().now() + 30 * kNsPerSec);
    REQUIRE(recovered);
    CHECK(h.sender().stats().timeouts == 0);

    const CwndRecord* entry = h.first_tagged(CwndTag::kFastRetransmit);
    const CwndRecord* exit = h.first_tagged(CwndTag::kRecoveryExit);
    REQUIRE(entry);
    REQUIRE(exit);
    CHECK(rtts_between(h, entry->time_ns, exit->time_ns) <= 1);
    std::int64_t cwnd0 = cwnd_before(h, entry);
    CHECK(exit->cwnd == cwnd0 / 2);

    // The pipe gate never let a sacked range go out again.
    CHECK(h.sacked_retransmissions() == 0);
}

TEST_CASE("sack: a lost retransmission falls back to a timeout, table reset") {
    LossHarness h(params(CcVariant::kSack, 16 * kMss));
    grow_to(h, 16 * kMss);
    // Drop the next fresh segment twice: the original and its fast
    // retransmission. The sender marked it retransmitted, so only the timer
    // can rescue the connection.
    std::int64_t victim = h.sender().snd_max();
    h.drop_transmissions_of(victim, 2);
    bool entered = h.run_until_cond(
        [&] { return h.sender().in_recovery(); },
        h.engine().now() + 10 * kNsPerSec);
    REQUIRE(entered);
    bool timed_out = h.run_until_cond(
        [&] { return h.sender().stats().timeouts >= 1; },
        h.engine().now() + 60 * kNsPerSec);
    CHECK(timed_out);
    // After the timeout the table was reset and go-back-N refills the window;
    // everything eventually gets through.
    bool healed = h.run_until_cond(
        [&] { return h.sender().snd_una() > victim; },
        h.engine().now() + 60 * kNsPerSec);
    CHECK(healed);
}

TEST_CASE("vanilla: any loss waits out the coarse timer, then goes back to snd_una") {
    LossHarness h(params(CcVariant::kVanilla, 16 * kMss));
    grow_to(h, 20 * kMss);
    h.arm_fresh_drops(1);
    bool timed_out = h.run_until_cond(
        [&] { return h.sender().stats().timeouts >= 1; },
        h.engine().now() + 30 * kNsPerSec);
    REQUIRE(timed_out);
    CHECK(h.sender().stats().fast_retransmits == 0);
    const CwndRecord* to = h.first_tagged(CwndTag::kTimeout);
    REQUIRE(to);
    CHECK(to->cwnd == kMss);
    // Cumulative ACK from buffered out-of-order data ends go-back-N early.
    bool done = h.run_until_cond(
        [&] { return h.sender().stats().timeouts >= 1 &&
                     !h.sender().in_recovery() &&
                     h.sender().snd_una() > 0; },
        h.engine().now() + 5 * kNsPerSec);
    CHECK(done);
}

TEST_CASE("coarse timer: expiry lands on a tick boundary plus the backoff") {
    LossHarness h(params(CcVariant::kVanilla, 16 * kMss));
    grow_to(h, 8 * kMss);
    h.arm_fresh_drops(1);
    REQUIRE(h.run_until_cond([&] { return h.sender().stats().timeouts >= 1; },
                             h.engine().now() + 30 * kNsPerSec));
    const CwndRecord* to = h.first_tagged(CwndTag::kTimeout);
    REQUIRE(to);
    // Quantized: expiry time is an exact multiple of the 100 ms tick.
    CHECK(to->time_ns % (100 * kNsPerMs) == 0);
}
