#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "ubrsim/adaptation.h"
#include "ubrsim/switch_queue.h"

#include "support/oracles.h"

using namespace ubrsim;

namespace {

DropPolicy tail_policy() {
    return DropPolicy{PolicyKind::kTailDrop, 0, 0, 1};
}

DropPolicy epd_policy(std::int64_t r) {
    return DropPolicy{PolicyKind::kEpd, r, 0, 1};
}

DropPolicy sd_policy(std::int64_t r, std::int64_t zn, std::int64_t zd) {
    return DropPolicy{PolicyKind::kSelectiveDrop, r, zn, zd};
}

DropPolicy fba_policy(std::int64_t r, std::int64_t zn, std::int64_t zd) {
    return DropPolicy{PolicyKind::kFba, r, zn, zd};
}

Cell make_cell(int vc, std::uint32_t frame, int index, int count) {
    Cell c;
    c.vc = static_cast<std::uint16_t>(vc);
    c.frame = frame;
    c.index = static_cast<std::uint8_t>(index);
    c.cell_count = static_cast<std::uint8_t>(count);
    c.eom = index == count - 1 ? 1 : 0;
    c.data_len = 512;
    return c;
}

// Feeds a whole frame; returns how many of its cells were accepted.
int feed_frame(SwitchQueue& q, int vc, std::uint32_t frame, int count) {
    int accepted = 0;
    for (int i = 0; i < count; i++)
        if (q.admit(make_cell(vc, frame, i, count), 0))
            accepted++;
    return accepted;
}

} // namespace

TEST_CASE("frame-start drop rule matches hand-evaluated inequalities") {
    // X=950, N_a=5, Y_i=250, K=1000, R=900, Z=0.8:
    // load ratio 250*5/950 = 1.316 > 0.8 -> selective drop rejects
    CHECK(SwitchQueue::frame_start_drop(sd_policy(900, 8, 10), 1000, 950, 250, 5));
    // fba threshold 0.8*(1000-900)/(950-900) = 1.6 > 1.316 -> accepted
    CHECK(!SwitchQueue::frame_start_drop(fba_policy(900, 8, 10), 1000, 950, 250, 5));
    // empty buffer accepts everywhere
    CHECK(!SwitchQueue::frame_start_drop(tail_policy(), 1000, 0, 0, 0));
    CHECK(!SwitchQueue::frame_start_drop(epd_policy(900), 1000, 0, 0, 0));
    CHECK(!SwitchQueue::frame_start_drop(sd_policy(900, 8, 10), 1000, 0, 0, 0));
    CHECK(!SwitchQueue::frame_start_drop(fba_policy(900, 8, 10), 1000, 0, 0, 0));
    // at or below R nothing is policy-dropped
    CHECK(!SwitchQueue::frame_start_drop(sd_policy(900, 8, 10), 1000, 900, 900, 1));
    // full buffer always drops
    CHECK(SwitchQueue::frame_start_drop(tail_policy(), 1000, 1000, 1, 1));
    CHECK(SwitchQueue::frame_start_drop(epd_policy(999), 1000, 1000, 1, 1));
}

TEST_CASE("selective drop with one active source drops whenever z < 1") {
    // N_a = 1 means Y_i = X, so the load ratio is exactly 1.
    CHECK(SwitchQueue::frame_start_drop(sd_policy(100, 9, 10), 1000, 150, 150, 1));
    CHECK(!SwitchQueue::frame_start_drop(sd_policy(100, 1, 1), 1000, 150, 150, 1));
}

TEST_CASE("the built queue state reproduces the hand-worked verdicts") {
    CaptureTraceSink cap;
    SwitchQueue q(1000, sd_policy(900, 8, 10), 5, cap);
    // One long frame per VC keeps every cell mid-frame (policy applies only
    // to frame starts), building X=950 with Y = 250,175,175,175,175.
    REQUIRE(feed_frame(q, 0, 0, 250) == 250);
    for (int vc = 1; vc < 5; vc++)
        REQUIRE(feed_frame(q, vc, 0, 175) == 175);
    CHECK(q.occupancy() == 950);
    CHECK(q.active_vcs() == 5);
    CHECK(q.per_vc(0) == 250);

    // Next frame start from the overloading VC is rejected...
    CHECK(!q.admit(make_cell(0, 1, 0, 12), 0));
    // ...and the admission log captured the decision state.
    REQUIRE(!cap.admissions.empty());
    const AdmissionRecord& r = cap.admissions.back();
    CHECK(r.x == 950);
    CHECK(r.y_vc == 250);
    CHECK(r.active == 5);
    CHECK(r.accepted == 0);

    // The same state under fair buffer allocation accepts.
    CaptureTraceSink cap2;
    SwitchQueue q2(1000, fba_policy(900, 8, 10), 5, cap2);
    REQUIRE(feed_frame(q2, 0, 0, 250) == 250);
    for (int vc = 1; vc < 5; vc++)
        REQUIRE(feed_frame(q2, vc, 0, 175) == 175);
    CHECK(q2.admit(make_cell(0, 1, 0, 12), 0));
}

TEST_CASE("tail drop rejects only at a full buffer, with no frame awareness") {
    SwitchQueue q(10, tail_policy(), 2, null_trace_sink());
    CHECK(feed_frame(q, 0, 0, 10) == 10);
    CHECK(q.occupancy() == 10);
    // Mid-frame cell of VC1's frame bounces at the full buffer...
    CHECK(!q.admit(make_cell(1, 0, 0, 3), 0));
    // ...but after one departure the very next cell of the same frame fits:
    // no per-frame discard state under tail drop.
    REQUIRE(q.dequeue(0).has_value());
    CHECK(q.admit(make_cell(1, 0, 1, 3), 0));
    CHECK(q.stats().cells_dropped == 1);
}

TEST_CASE("epd drops whole new frames above the threshold") {
    CaptureTraceSink cap;
    SwitchQueue q(100, epd_policy(50), 2, cap);
    REQUIRE(feed_frame(q, 0, 0, 60) == 60);  // single frame, mid-frame cells pass R

    // New frame from VC1 starts above R: every cell of it is refused.
    CHECK(feed_frame(q, 1, 0, 12) == 0);
    CHECK(q.occupancy() == 60);
    REQUIRE(cap.drops.size() == 12);
    for (const DropRecord& d : cap.drops)
        CHECK(d.reason == DropReason::kEpdThreshold);

    // Drain below R; the next VC1 frame is accepted in full.
    for (int i = 0; i < 20; i++)
        q.dequeue(0);
    CHECK(q.occupancy() == 40);
    CHECK(feed_frame(q, 1, 1, 12) == 12);
}

TEST_CASE("epd keeps accepting a frame that began below the threshold") {
    SwitchQueue q(100, epd_policy(50), 2, null_trace_sink());
    // VC0's frame starts at X=0; VC1's long frame pushes X past R midway.
    CHECK(q.admit(make_cell(0, 0, 0, 4), 0));
    REQUIRE(feed_frame(q, 1, 0, 70) == 70);
    CHECK(q.occupancy() == 71);  // above R = 50
    // Continuation cells of VC0's in-progress frame still get in.
    CHECK(q.admit(make_cell(0, 0, 1, 4), 0));
    CHECK(q.admit(make_cell(0, 0, 2, 4), 0));
    CHECK(q.admit(make_cell(0, 0, 3, 4), 0));
}

TEST_CASE("mid-frame overflow dooms the rest of the frame") {
    SwitchQueue q(10, epd_policy(8), 1, null_trace_sink());
    // Frame starts below R, overflows mid-way: cells 0..9 fit, 10..11 bounce.
    int accepted = 0;
    for (int i = 0; i < 12; i++)
        if (q.admit(make_cell(0, 0, i, 14), 0))
            accepted++;
    CHECK(accepted == 10);
    // Free space; the remaining cells of this frame must still be refused.
    q.dequeue(0);
    q.dequeue(0);
    CHECK(!q.admit(make_cell(0, 0, 12, 14), 0));
    CHECK(!q.admit(make_cell(0, 0, 13, 14), 0));
    // Only partially dropped, so no fully-dropped record for it.
    CHECK(q.stats().frames_fully_dropped == 0);
}

TEST_CASE("a frame dropped from its first cell is reported as fully dropped") {
    SwitchQueue q(100, epd_policy(50), 2, null_trace_sink());
    REQUIRE(feed_frame(q, 0, 0, 60) == 60);
    CHECK(feed_frame(q, 1, 0, 12) == 0);
    auto gone = q.take_fully_dropped();
    REQUIRE(gone.size() == 1);
    CHECK(gone[0].vc == 1);
    CHECK(gone[0].frame == 0);
    CHECK(gone[0].data_len == 512);
}

TEST_CASE("fifo order is preserved globally and per vc") {
    SwitchQueue q(100, tail_policy(), 3, null_trace_sink());
    std::vector<std::pair<int, std::uint32_t>> fed;
    oracle::Lcg rng(3);
    std::uint32_t frames[3] = {0, 0, 0};
    for (int i = 0; i < 50; i++) {
        int vc = static_cast<int>(rng.below(3));
        q.admit(make_cell(vc, frames[vc]++, 0, 1), 0);
        fed.emplace_back(vc, frames[vc] - 1);
    }
    for (auto& [vc, frame] : fed) {
        auto c = q.dequeue(0);
        REQUIRE(c.has_value());
        CHECK(c->vc == vc);
        CHECK(c->frame == frame);
    }
    CHECK(!q.dequeue(0).has_value());
    CHECK(q.active_vcs() == 0);
}

TEST_CASE("active count tracks VCs with at least one buffered cell") {
    SwitchQueue q(100, tail_policy(), 3, null_trace_sink());
    q.admit(make_cell(0, 0, 0, 2), 0);
    q.admit(make_cell(0, 0, 1, 2), 0);
    q.admit(make_cell(2, 0, 0, 1), 0);
    CHECK(q.active_vcs() == 2);
    q.dequeue(0);  // one of VC0's two cells
    CHECK(q.active_vcs() == 2);
    q.dequeue(0);  // VC0 now empty
    CHECK(q.active_vcs() == 1);
    q.dequeue(0);
    CHECK(q.active_vcs() == 0);
}

TEST_CASE("randomized stress: accounting invariants and oracle equivalence") {
    for (int pol = 0; pol < 4; pol++) {
        DropPolicy policy;
        switch (pol) {
        case 0: policy = tail_policy(); break;
        case 1: policy = epd_policy(40); break;
        case 2: policy = sd_policy(40, 8, 10); break;
        default: policy = fba_policy(40, 8, 10); break;
        }
        const std::int64_t k = 60;
        const int n_vcs = 4;
        CaptureTraceSink cap;
        SwitchQueue q(k, policy, n_vcs, cap);
        oracle::Lcg rng(1234 + static_cast<std::uint64_t>(pol));

        // Replay admissions with independent bookkeeping.
        std::vector<std::int64_t> y(n_vcs, 0);
        std::int64_t x = 0, max_x = 0;
        std::uint32_t frames[4] = {0, 0, 0, 0};
        int pending_checks = 0;

        for (int step = 0; step < 30000; step++) {
            if (rng.below(100) < 45) {
                auto c = q.dequeue(0);
                if (c) {
                    x--;
                    y[c->vc]--;
                }
            } else {
                int vc = static_cast<int>(rng.below(n_vcs));
                int len = 1 + static_cast<int>(rng.below(6));
                std::uint32_t frame = frames[vc]++;
                for (int i = 0; i < len; i++) {
                    bool accepted = q.admit(make_cell(vc, frame, i, len), step);
                    if (i == 0) {
                        // Independent verdict for the frame start.
                        std::int64_t na = 0;
                        for (std::int64_t v : y)
                            na += v >= 1 ? 1 : 0;
                        bool oracle_drop;
                        switch (policy.kind) {
                        case PolicyKind::kTailDrop:
                            oracle_drop = oracle::tail_drop_start(k, x);
                            break;
                        case PolicyKind::kEpd:
                            oracle_drop = oracle::epd_drop_start(k, policy.r_cells, x);
                            break;
                        case PolicyKind::kSelectiveDrop:
                            oracle_drop = oracle::selective_drop_start(
                                k, policy.r_cells, policy.z_num, policy.z_den, x,
                                y[vc], na);
                            break;
                        default:
                            oracle_drop = oracle::fba_drop_start(
                                k, policy.r_cells, policy.z_num, policy.z_den, x,
                                y[vc], na);
                            break;
                        }
                        CHECK(accepted == !oracle_drop);
                        pending_checks++;
                    }
                    if (accepted) {
                        x++;
                        y[vc]++;
                        max_x = std::max(max_x, x);
                    }
                }
            }
            // Shadow state must agree with the queue's accounting.
            REQUIRE(q.occupancy() == x);
            std::int64_t sum = 0, na = 0;
            for (int vc = 0; vc < n_vcs; vc++) {
                sum += q.per_vc(vc);
                na += q.per_vc(vc) >= 1 ? 1 : 0;
            }
            REQUIRE(sum == x);
            REQUIRE(q.active_vcs() == na);
            REQUIRE(x <= k);
        }
        CHECK(pending_checks > 1000);
        CHECK(q.stats().max_occupancy == max_x);

        // The captured admission log re-verifies against the static rule.
        for (const AdmissionRecord& r : cap.admissions) {
            bool drop = SwitchQueue::frame_start_drop(policy, k, r.x, r.y_vc, r.active);
            CHECK(r.accepted == (drop ? 0 : 1));
        }
    }
}

TEST_CASE("tail drop never rejects below capacity (property)") {
    SwitchQueue q(30, tail_policy(), 2, null_trace_sink());
    oracle::Lcg rng(777);
    std::uint32_t frame = 0;
    for (int i = 0; i < 5000; i++) {
        if (rng.below(2) == 0) {
            std::int64_t before = q.occupancy();
            bool accepted = q.admit(make_cell(0, frame++, 0, 1), 0);
            CHECK(accepted == (before < 30));
        } else {
            q.dequeue(0);
        }
    }
}

TEST_CASE("epd behaves exactly like an unfilled tail-drop queue below R") {
    // Occupancy never exceeds R: no drops may occur at all.
    SwitchQueue q(100, epd_policy(50), 1, null_trace_sink());
    oracle::Lcg rng(9);
    std::uint32_t frame = 0;
    for (int i = 0; i < 4000; i++) {
        if (q.occupancy() < 45 && rng.below(2) == 0) {
            CHECK(q.admit(make_cell(0, frame++, 0, 1), 0));
        } else {
            q.dequeue(0);
        }
    }
    CHECK(q.stats().cells_dropped == 0);
}
