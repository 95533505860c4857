#ifndef UBRSIM_ENGINE_H
#define UBRSIM_ENGINE_H

#include <cstdint>
#include <vector>

#include "ubrsim/cell.h"
#include "ubrsim/sim_error.h"
#include "ubrsim/sim_time.h"

namespace ubrsim {

class Actor;

enum class EvKind : std::uint8_t {
    kCellAtSwitch,   // cell has fully arrived at the bottleneck input
    kSwitchTxDone,   // output serializer finished putting a cell on the wire
    kCellAtDest,     // cell has fully arrived at its destination
    kAckAtSender,    // acknowledgment segment reached the data sender
    kRtxTimer,       // retransmission timer expiry (carries an epoch)
    kSourceStart,    // source begins transmitting
    kSlotFlush,      // output-port slot boundary while the port is idle
};

struct AckWire {
    std::uint32_t ack = 0;
    std::uint16_t vc = 0;
    std::uint8_t n_sack = 0;
    std::uint32_t sack_left[3] = {0, 0, 0};
    std::uint32_t sack_right[3] = {0, 0, 0};
};

struct TimerFire {
    std::uint64_t epoch = 0;
    std::uint16_t vc = 0;
};

// Small fixed-size message delivered with an event. The engine never looks
// inside; actors switch on `kind`.
struct EventPayload {
    EvKind kind = EvKind::kSourceStart;
    union {
        Cell cell;
        AckWire ack;
        TimerFire timer;
    };

    EventPayload() : cell() {}
};

struct Event {
    SimTime fire_at = 0;
    std::uint64_t seq = 0;  // scheduling order, ties broken by this
    Actor* target = nullptr;
    EventPayload payload;
};

class Actor {
public:
    virtual ~Actor() = default;
    virtual void on_event(const Event& ev) = 0;
};

// Deterministic discrete-event core. Events fire in strict (fire_at, seq)
// order where seq is the scheduling sequence number, so simultaneous events
// are delivered in the order they were scheduled.
class Engine {
public:
    SimTime now() const { return now_; }

    void schedule(SimTime fire_at, Actor* target, const EventPayload& payload) {
        if (fire_at < now_)
            throw SimError("engine_schedule_in_past",
                           "fire_at " + std::to_string(fire_at) + " < now " +
                               std::to_string(now_));
        heap_.push_back(Event{fire_at, next_seq_++, target, payload});
        sift_up(heap_.size() - 1);
    }

    // Delivers every event with fire_at <= t_end, then advances the clock to
    // t_end. Events scheduled during delivery participate if they qualify.
    void run_until(SimTime t_end) {
        while (!heap_.empty() && heap_.front().fire_at <= t_end) {
            Event ev = heap_.front();
            pop_top();
            now_ = ev.fire_at;
            events_delivered_++;
            ev.target->on_event(ev);
        }
        if (t_end > now_)
            now_ = t_end;
    }

    bool empty() const { return heap_.empty(); }
    std::size_t pending() const { return heap_.size(); }
    std::uint64_t events_delivered() const { return events_delivered_; }

    // End-of-run inspection of undelivered events (conservation accounting).
    template <typename Fn>
    void for_each_pending(Fn&& fn) const {
        for (const Event& ev : heap_)
            fn(ev);
    }

private:
    // Hand-rolled binary min-heap on (fire_at, seq); avoids the comparator
    // indirection of priority_queue on the hottest loop in the simulator.
    static bool before(const Event& a, const Event& b) {
        if (a.fire_at != b.fire_at)
            return a.fire_at < b.fire_at;
        return a.seq < b.seq;
    }

    void sift_up(std::size_t i) {
        Event ev = heap_[i];
        while (i > 0) {
            std::size_t parent = (i - 1) / 2;
            if (!before(ev, heap_[parent]))
                break;
            heap_[i] = heap_[parent];
            i = parent;
        }
        heap_[i] = ev;
    }

    void pop_top() {
        Event last = heap_.back();
        heap_.pop_back();
        if (heap_.empty())
            return;
        std::size_t i = 0;
        std::size_t n = heap_.size();
        for (;;) {
            std::size_t child = 2 * i + 1;
            if (child >= n)
                break;
            if (child + 1 < n && before(heap_[child + 1], heap_[child]))
                child++;
            if (!before(heap_[child], last))
                break;
            heap_[i] = heap_[child];
            i = child;
        }
        heap_[i] = last;
    }

    std::vector<Event> heap_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t events_delivered_ = 0;
};

} // namespace ubrsim

#endif
