#include "ubrsim/simulation.h"

#include <algorithm>
#include <unordered_set>

namespace ubrsim {

namespace {

// Capture admission records in memory while still forwarding everything to
// the configured sink.
class AdmissionCapture : public TraceSink {
public:
    AdmissionCapture(TraceSink& inner, std::vector<AdmissionRecord>& out)
        : inner_(inner), out_(out) {}

    void on_cwnd(const CwndRecord& r) override { inner_.on_cwnd(r); }
    void on_queue(const QueueRecord& r) override { inner_.on_queue(r); }
    void on_drop(const DropRecord& r) override { inner_.on_drop(r); }
    void on_admission(const AdmissionRecord& r) override {
        out_.push_back(r);
        inner_.on_admission(r);
    }
    void flush() override { inner_.flush(); }

private:
    TraceSink& inner_;
    std::vector<AdmissionRecord>& out_;
};

} // namespace

// Data sender endpoint: TCP sender plus AAL5 segmentation and the access
// link. Cells occupy consecutive slots of the link's clock and are scheduled
// straight to their switch arrival times; no separate transmit queue exists.
class Simulation::SourceHost : public Actor, public TcpSenderEnv {
public:
    SourceHost(Simulation& sim, int vc)
        : sim_(sim),
          vc_(vc),
          sender_(vc, sim.cfg_.variant, sim.cfg_.mss_bytes, sim.cfg_.rcvwnd_bytes,
                  sim.cfg_.ssthresh_init_bytes, *this, sim.trace_),
          nic_clock_(vc * sim.cell_time_ / sim.cfg_.n_sources, kCellWireBits,
                     access_link_rate(sim.cfg_, vc)) {}

    // Each access link runs its own oscillator: the nominal cell rate plus a
    // deterministic offset inside the standard +/-20 ppm free-run tolerance.
    // Relative link phases therefore rotate slowly instead of locking, which
    // is what physical independently-clocked links do.
    static std::int64_t access_link_rate(const ScenarioConfig& cfg, int vc) {
        int span = cfg.n_sources > 1 ? cfg.n_sources - 1 : 1;
        std::int64_t ppm = 5 + 14 * vc / span;
        if (vc % 2 == 1)
            ppm = -ppm;
        return cfg.link_rate_bps + cfg.link_rate_bps * ppm / 1000000;
    }

    void on_event(const Event& ev) override {
        switch (ev.payload.kind) {
        case EvKind::kSourceStart:
            sender_.try_send();
            break;
        case EvKind::kAckAtSender: {
            const AckWire& w = ev.payload.ack;
            TcpSegment ack;
            ack.vc = vc_;
            ack.ack = w.ack;
            ack.n_sack = w.n_sack;
            for (int i = 0; i < w.n_sack; i++)
                ack.sack[static_cast<std::size_t>(i)] =
                    SackBlock{static_cast<std::int64_t>(w.sack_left[i]),
                              static_cast<std::int64_t>(w.sack_right[i])};
            sender_.on_ack(ack);
            break;
        }
        case EvKind::kRtxTimer:
            sender_.on_timer(ev.payload.timer.epoch);
            break;
        default:
            throw SimError("event_routing", "unexpected event at source");
        }
    }

    // TcpSenderEnv
    void transmit(const TcpSegment& seg) override {
        emitted_bytes_ += seg.data_len;
        segment_to_cells(seg, next_frame_++, scratch_);
        std::int64_t slot = nic_clock_.slot_at_or_after(sim_.engine_.now());
        if (slot < nic_next_slot_)
            slot = nic_next_slot_;
        for (const Cell& c : scratch_) {
            EventPayload p;
            p.kind = EvKind::kCellAtSwitch;
            p.cell = c;
            sim_.engine_.schedule(
                nic_clock_.boundary(slot + 1) + sim_.cfg_.link_delay_ns,
                sim_.switch_actor(), p);
            slot++;
        }
        nic_next_slot_ = slot;
    }

    void arm_rtx_timer(int rto_ticks, std::uint64_t epoch) override {
        SimTime tick = sim_.cfg_.timer_tick_ns;
        SimTime fire = (sim_.engine_.now() / tick + 1 + rto_ticks) * tick;
        EventPayload p;
        p.kind = EvKind::kRtxTimer;
        p.timer = TimerFire{epoch, static_cast<std::uint16_t>(vc_)};
        sim_.engine_.schedule(fire, this, p);
    }

    std::int64_t now_tick() const override {
        return sim_.engine_.now() / sim_.cfg_.timer_tick_ns;
    }

    SimTime now_ns() const override { return sim_.engine_.now(); }

    TcpSender& sender() { return sender_; }
    std::int64_t emitted_bytes() const { return emitted_bytes_; }

private:
    Simulation& sim_;
    int vc_;
    TcpSender sender_;
    std::uint32_t next_frame_ = 0;
    SlotClock nic_clock_;
    std::int64_t nic_next_slot_ = 0;
    std::int64_t emitted_bytes_ = 0;
    std::vector<Cell> scratch_;
};

// Bottleneck output port. Arriving cells stage per input and are admitted in
// round-robin input order at the next output slot boundary, the way a
// cell-fabric scans its ports; the scan origin rotates every slot. The
// serializer itself is a free-running slotted link.
class Simulation::SwitchActor : public Actor {
public:
    SwitchActor(Simulation& sim, TraceSink& trace)
        : sim_(sim),
          queue_(sim.cfg_.buffer_cells, sim.cfg_.resolved_policy(),
                 sim.cfg_.n_sources, trace),
          out_clock_(0, kCellWireBits, sim.cfg_.link_rate_bps) {}

    void on_event(const Event& ev) override {
        switch (ev.payload.kind) {
        case EvKind::kCellAtSwitch:
            staged_.push_back(ev.payload.cell);
            if (!busy_ && !flush_pending_) {
                flush_pending_ = true;
                std::int64_t slot = out_clock_.slot_at_or_after(sim_.engine_.now());
                if (slot < next_slot_)
                    slot = next_slot_;
                EventPayload p;
                p.kind = EvKind::kSlotFlush;
                sim_.engine_.schedule(out_clock_.boundary(slot), this, p);
            }
            break;
        case EvKind::kSlotFlush:
            flush_pending_ = false;
            flush_and_serve();
            break;
        case EvKind::kSwitchTxDone: {
            // Serialization finished; the cell reaches its sink after the
            // inter-switch hop and the second switch's output link.
            EventPayload p;
            p.kind = EvKind::kCellAtDest;
            p.cell = ev.payload.cell;
            sim_.engine_.schedule(
                sim_.engine_.now() + sim_.cell_time_ + 2 * sim_.cfg_.link_delay_ns,
                sim_.dest(ev.payload.cell.vc), p);
            busy_ = false;
            flush_and_serve();
            break;
        }
        default:
            throw SimError("event_routing", "unexpected event at switch");
        }
    }

    SwitchQueue& queue() { return queue_; }

    template <typename Fn>
    void for_each_staged(Fn&& fn) const {
        for (const Cell& c : staged_)
            fn(c);
    }

private:
    void flush_and_serve() {
        SimTime now = sim_.engine_.now();
        std::int64_t slot = out_clock_.slot_at_or_after(now);
        if (slot < next_slot_)
            slot = next_slot_;

        if (!staged_.empty()) {
            int n = sim_.cfg_.n_sources;
            int origin = static_cast<int>(slot % n);
            for (int off = 0; off < n; off++) {
                int vc = (origin + off) % n;
                for (const Cell& c : staged_)
                    if (c.vc == vc)
                        queue_.admit(c, now);
            }
            staged_.clear();
        }
        if (!queue_.empty()) {
            auto cell = queue_.dequeue(now);
            busy_ = true;
            next_slot_ = slot + 1;
            EventPayload p;
            p.kind = EvKind::kSwitchTxDone;
            p.cell = *cell;
            sim_.engine_.schedule(out_clock_.boundary(slot + 1), this, p);
        }
    }

    Simulation& sim_;
    SwitchQueue queue_;
    bool busy_ = false;
    bool flush_pending_ = false;
    std::vector<Cell> staged_;
    SlotClock out_clock_;
    std::int64_t next_slot_ = 0;
};

// Receiving endpoint: reassembly, the TCP receiver, and the fixed-latency
// acknowledgment return path.
class Simulation::DestHost : public Actor {
public:
    DestHost(Simulation& sim, int vc)
        : sim_(sim), vc_(vc), reasm_(static_cast<std::uint16_t>(vc)),
          receiver_(vc, sim.cfg_.variant == CcVariant::kSack) {}

    void on_event(const Event& ev) override {
        if (ev.payload.kind != EvKind::kCellAtDest)
            throw SimError("event_routing", "unexpected event at destination");
        discards_.clear();
        std::optional<Frame> frame = reasm_.on_cell(ev.payload.cell, discards_);
        for (const Reassembler::Discard& d : discards_) {
            reasm_discard_bytes_ += d.data_len;
            wasted_wire_bytes_ +=
                static_cast<std::int64_t>(d.cells_received) * kCellWireBytes;
        }
        if (frame) {
            delivered_frame_bytes_ += frame->segment.data_len;
            TcpSegment ack = receiver_.on_segment(frame->segment);
            if (ack.ack > 0xffffffffLL)
                throw SimError("seq_overflow", "ack beyond 32-bit wire range");
            EventPayload p;
            p.kind = EvKind::kAckAtSender;
            p.ack.ack = static_cast<std::uint32_t>(ack.ack);
            p.ack.vc = static_cast<std::uint16_t>(vc_);
            p.ack.n_sack = static_cast<std::uint8_t>(ack.n_sack);
            for (int i = 0; i < ack.n_sack; i++) {
                p.ack.sack_left[i] =
                    static_cast<std::uint32_t>(ack.sack[static_cast<std::size_t>(i)].left);
                p.ack.sack_right[i] =
                    static_cast<std::uint32_t>(ack.sack[static_cast<std::size_t>(i)].right);
            }
            sim_.engine_.schedule(sim_.engine_.now() + sim_.ack_delay_,
                                  sim_.source(vc_), p);
        }
    }

    TcpReceiver& receiver() { return receiver_; }
    const Reassembler& reassembler() const { return reasm_; }
    std::int64_t delivered_frame_bytes() const { return delivered_frame_bytes_; }
    std::int64_t reasm_discard_bytes() const { return reasm_discard_bytes_; }
    std::int64_t wasted_wire_bytes() const { return wasted_wire_bytes_; }

private:
    Simulation& sim_;
    int vc_;
    Reassembler reasm_;
    TcpReceiver receiver_;
    std::vector<Reassembler::Discard> discards_;
    std::int64_t delivered_frame_bytes_ = 0;
    std::int64_t reasm_discard_bytes_ = 0;
    std::int64_t wasted_wire_bytes_ = 0;
};

Simulation::Simulation(const ScenarioConfig& config, TraceSink& trace)
    : cfg_(config), trace_(trace) {
    cfg_.validate();
    cell_time_ = cfg_.cell_time_ns();
    // Acknowledgments cross three uncongested hops: pipelined store-and-
    // forward of a 2-cell frame plus three propagation delays.
    int ack_cells = cells_for_segment(0);
    ack_delay_ = (ack_cells + 2) * cell_time_ + 3 * cfg_.link_delay_ns;

    TraceSink* sink = &trace_;
    if (cfg_.capture_admissions) {
        capture_ = std::make_unique<AdmissionCapture>(trace_, captured_admissions_);
        sink = capture_.get();
    }

    switch_ = std::make_unique<SwitchActor>(*this, *sink);
    for (int i = 0; i < cfg_.n_sources; i++) {
        sources_.push_back(std::make_unique<SourceHost>(*this, i));
        dests_.push_back(std::make_unique<DestHost>(*this, i));
    }
}

Simulation::~Simulation() = default;

RunReport Simulation::run() {
    for (int i = 0; i < cfg_.n_sources; i++) {
        EventPayload p;
        p.kind = EvKind::kSourceStart;
        engine_.schedule(i * cfg_.start_stagger_ns, sources_[static_cast<std::size_t>(i)].get(), p);
    }
    engine_.run_until(cfg_.duration_ns);
    return collect();
}

RunReport Simulation::collect() {
    RunReport report;
    report.duration_ns = cfg_.duration_ns;
    report.events_delivered = engine_.events_delivered();

    const SwitchStats& sw = switch_->queue().stats();
    report.max_queue_cells = sw.max_occupancy;
    report.cells_dropped = sw.cells_dropped;
    report.cells_through = sw.cells_accepted;

    LedgerTotals& ledger = report.ledger;
    for (int i = 0; i < cfg_.n_sources; i++) {
        auto& src = *sources_[static_cast<std::size_t>(i)];
        auto& dst = *dests_[static_cast<std::size_t>(i)];
        VcReport vc;
        vc.delivered_bytes = dst.receiver().rcv_nxt();
        vc.timeouts = src.sender().stats().timeouts;
        vc.fast_retransmits = src.sender().stats().fast_retransmits;
        vc.retransmits = src.sender().stats().retransmits;
        vc.segments_sent = src.sender().stats().segments_sent;
        report.per_vc.push_back(vc);

        ledger.emitted_bytes += src.emitted_bytes();
        ledger.delivered_frame_bytes += dst.delivered_frame_bytes();
        ledger.reasm_discard_bytes += dst.reasm_discard_bytes();
        ledger.app_delivered_bytes += dst.receiver().rcv_nxt();
        ledger.duplicate_bytes += dst.receiver().stats().duplicate_bytes;
        ledger.ooo_held_bytes += dst.receiver().out_of_order_bytes();
        report.wasted_wire_bytes += dst.wasted_wire_bytes();
    }

    for (const auto& f : switch_->queue().take_fully_dropped())
        ledger.fully_dropped_bytes += f.data_len;

    // Frames physically somewhere at end of run: in scheduled cell events,
    // buffered in the switch, or partially reassembled. Each distinct frame
    // counts its data once.
    std::unordered_set<std::uint64_t> pending_frames;
    auto note_cell = [&](const Cell& c) {
        std::uint64_t key = (static_cast<std::uint64_t>(c.vc) << 32) | c.frame;
        if (pending_frames.insert(key).second)
            ledger.pending_bytes += c.data_len;
    };
    engine_.for_each_pending([&](const Event& ev) {
        if (ev.payload.kind == EvKind::kCellAtSwitch ||
            ev.payload.kind == EvKind::kSwitchTxDone ||
            ev.payload.kind == EvKind::kCellAtDest)
            note_cell(ev.payload.cell);
    });
    switch_->queue().for_each_buffered_cell(note_cell);
    switch_->for_each_staged(note_cell);
    for (int i = 0; i < cfg_.n_sources; i++) {
        const Reassembler& r = dests_[static_cast<std::size_t>(i)]->reassembler();
        if (r.has_partial()) {
            std::uint64_t key =
                (static_cast<std::uint64_t>(i) << 32) | r.partial_frame();
            if (pending_frames.insert(key).second)
                ledger.pending_bytes += r.partial_data_len();
        }
    }

    if (!ledger.balances())
        throw SimError("byte_conservation", ledger.describe());

    report.admissions = std::move(captured_admissions_);
    // Attainable throughput against the line rate, or against the SONET
    // payload rate (26/27 of it) when configured.
    double rate_mbps = cfg_.link_rate_mbps();
    if (cfg_.sonet)
        rate_mbps = rate_mbps * 26.0 / 27.0;
    report.finalize(max_tcp_throughput_mbps(rate_mbps, cfg_.mss_bytes));
    trace_.flush();
    return report;
}

Actor* Simulation::switch_actor() { return switch_.get(); }
Actor* Simulation::source(int vc) { return sources_[static_cast<std::size_t>(vc)].get(); }
Actor* Simulation::dest(int vc) { return dests_[static_cast<std::size_t>(vc)].get(); }

RunReport run_scenario(const ScenarioConfig& config, TraceSink& trace) {
    Simulation sim(config, trace);
    return sim.run();
}

} // namespace ubrsim
