#ifndef UBRSIM_SIMULATION_H
#define UBRSIM_SIMULATION_H

#include <memory>
#include <vector>

#include "ubrsim/adaptation.h"
#include "ubrsim/engine.h"
#include "ubrsim/metrics.h"
#include "ubrsim/scenario.h"
#include "ubrsim/switch_queue.h"
#include "ubrsim/tcp.h"
#include "ubrsim/trace.h"

namespace ubrsim {

// One bottleneck topology instance: N greedy senders, each on its own access
// link, merging at the first switch's output port onto the inter-switch
// link, fanning out to per-VC sinks. Acknowledgments ride an uncongested
// reverse path with fixed latency. Single-threaded; independent simulations
// may run concurrently.
class Simulation {
public:
    Simulation(const ScenarioConfig& config, TraceSink& trace);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    // Runs to the configured duration and assembles the report. The byte
    // conservation ledger is checked; imbalance is a fatal invariant error.
    RunReport run();

    Engine& engine() { return engine_; }

private:
    class SourceHost;
    class SwitchActor;
    class DestHost;
    friend class SourceHost;
    friend class SwitchActor;
    friend class DestHost;

    RunReport collect();
    Actor* switch_actor();
    Actor* source(int vc);
    Actor* dest(int vc);

    ScenarioConfig cfg_;
    TraceSink& trace_;
    Engine engine_;

    SimTime cell_time_;
    SimTime ack_delay_;

    std::vector<std::unique_ptr<SourceHost>> sources_;
    std::unique_ptr<SwitchActor> switch_;
    std::vector<std::unique_ptr<DestHost>> dests_;

    std::unique_ptr<TraceSink> capture_;
    std::vector<AdmissionRecord> captured_admissions_;
};

// Convenience: construct and run one scenario.
RunReport run_scenario(const ScenarioConfig& config, TraceSink& trace);

} // namespace ubrsim

#endif
