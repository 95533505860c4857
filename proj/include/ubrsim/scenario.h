#ifndef UBRSIM_SCENARIO_H
#define UBRSIM_SCENARIO_H

#include <cstdint>
#include <string>
#include <vector>

#include "ubrsim/sim_error.h"
#include "ubrsim/sim_time.h"
#include "ubrsim/switch_queue.h"
#include "ubrsim/tcp.h"

namespace ubrsim {

// Exact decimal parameter (e.g. z = 0.8 is 8/10); keeps threshold arithmetic
// free of floating point.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string text() const;  // shortest exact decimal form
};

Rational parse_decimal(const std::string& text);  // throws ConfigError(0, ...)

enum class Preset : std::uint8_t { kLan = 0, kWan = 1 };
const char* preset_name(Preset p);

constexpr std::int64_t kInfiniteBufferCells = std::int64_t(1) << 32;

// Full description of one run. Presets fill the latency/window/duration
// fields; anything can be overridden explicitly.
struct ScenarioConfig {
    std::string scenario_id;  // derived from the fields when empty
    Preset preset = Preset::kLan;
    int n_sources = 5;
    std::int64_t link_rate_bps = 155520000;
    SimTime link_delay_ns = 5 * kNsPerUs;
    int mss_bytes = 512;
    std::int64_t rcvwnd_bytes = 65535;
    std::int64_t ssthresh_init_bytes = 65535;
    SimTime timer_tick_ns = 100 * kNsPerMs;
    SimTime duration_ns = 10 * kNsPerSec;
    std::int64_t buffer_cells = 1000;
    PolicyKind policy = PolicyKind::kTailDrop;
    Rational r_fraction{9, 10};       // selective_drop / fba threshold R = r*K
    Rational z{8, 10};                // load-ratio cutoff
    std::int64_t epd_headroom_cells = 200;  // EPD threshold R = K - headroom
    CcVariant variant = CcVariant::kVanilla;
    SimTime start_stagger_ns = 0;  // source i starts at i * stagger
    bool sonet = false;  // rate attainable metrics against the SONET payload rate
    bool traces = true;
    bool admission_trace = true;
    bool capture_admissions = false;  // keep admission records in the report

    // Throws ConfigError naming the offending field combination.
    void validate() const;

    // Resolves thresholds into an admission policy (validate() must pass).
    DropPolicy resolved_policy() const;

    std::string derived_id() const;
    std::string id() const { return scenario_id.empty() ? derived_id() : scenario_id; }

    SimTime cell_time_ns() const {
        return transmission_time_ns(kCellWireBits, link_rate_bps);
    }
    double link_rate_mbps() const { return static_cast<double>(link_rate_bps) / 1e6; }
};

ScenarioConfig preset_defaults(Preset p);

// One key=value entry of a config file, with its source line for messages.
struct ConfigEntry {
    int line;
    std::string key;
    std::string value;
};

std::vector<ConfigEntry> parse_config_text(const std::string& text);
std::vector<ConfigEntry> load_config_file(const std::string& path);

ScenarioConfig scenario_from_entries(const std::vector<ConfigEntry>& entries);

// A parameter sweep: base settings plus axes expanded as a cross product.
// Axis order follows declaration order; the last-declared axis varies
// fastest, so expansion is lexicographic over the declared axes.
struct SweepAxis {
    int line;
    std::string key;
    std::vector<std::string> values;
};

struct SweepSpec {
    std::vector<ConfigEntry> base;  // non-axis entries
    std::vector<SweepAxis> axes;
};

SweepSpec sweep_from_entries(const std::vector<ConfigEntry>& entries);
std::vector<ScenarioConfig> expand(const SweepSpec& sweep);

} // namespace ubrsim

#endif
