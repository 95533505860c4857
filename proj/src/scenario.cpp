#include "ubrsim/scenario.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ubrsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        a++;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        b--;
    return s.substr(a, b - a);
}

std::int64_t parse_int(const ConfigEntry& e) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(e.line, "key '" + e.key + "': not an integer: '" + e.value + "'");
    }
    if (pos != e.value.size())
        throw ConfigError(e.line, "key '" + e.key + "': trailing characters in '" + e.value + "'");
    return v;
}

bool parse_bool(const ConfigEntry& e) {
    if (e.value == "on" || e.value == "true" || e.value == "1")
        return true;
    if (e.value == "off" || e.value == "false" || e.value == "0")
        return false;
    throw ConfigError(e.line, "key '" + e.key + "': expected on|off, got '" + e.value + "'");
}

Preset parse_preset(const ConfigEntry& e) {
    if (e.value == "lan")
        return Preset::kLan;
    if (e.value == "wan")
        return Preset::kWan;
    throw ConfigError(e.line, "key 'preset': expected lan|wan, got '" + e.value + "'");
}

PolicyKind parse_policy(const ConfigEntry& e) {
    if (e.value == "tail")
        return PolicyKind::kTailDrop;
    if (e.value == "epd")
        return PolicyKind::kEpd;
    if (e.value == "selective_drop")
        return PolicyKind::kSelectiveDrop;
    if (e.value == "fba")
        return PolicyKind::kFba;
    throw ConfigError(e.line, "key 'policy': expected tail|epd|selective_drop|fba, got '" +
                                  e.value + "'");
}

CcVariant parse_variant(const ConfigEntry& e) {
    if (e.value == "vanilla")
        return CcVariant::kVanilla;
    if (e.value == "reno")
        return CcVariant::kReno;
    if (e.value == "newreno")
        return CcVariant::kNewReno;
    if (e.value == "sack")
        return CcVariant::kSack;
    throw ConfigError(e.line, "key 'variant': expected vanilla|reno|newreno|sack, got '" +
                                  e.value + "'");
}

const std::vector<std::string> kSweepableKeys = {
    "preset", "variant", "policy", "n_sources", "buffer_cells", "r_fraction", "z",
};

} // namespace

const char* preset_name(Preset p) {
    return p == Preset::kLan ? "lan" : "wan";
}

std::string Rational::text() const {
    // den is always a power of ten here (decimal input).
    std::int64_t ip = num / den;
    std::int64_t frac = num % den;
    std::ostringstream os;
    os << ip;
    if (frac != 0) {
        std::string digits;
        std::int64_t d = den;
        while (d > 1) {
            d /= 10;
            digits.push_back(static_cast<char>('0' + (frac / std::max<std::int64_t>(d, 1)) % 10));
        }
        while (!digits.empty() && digits.back() == '0')
            digits.pop_back();
        if (!digits.empty())
            os << '.' << digits;
    }
    return os.str();
}

Rational parse_decimal(const std::string& text) {
    std::string t = trim(text);
    if (t.empty())
        throw ConfigError(0, "empty decimal value");
    std::size_t dot = t.find('.');
    std::string ip = dot == std::string::npos ? t : t.substr(0, dot);
    std::string fp = dot == std::string::npos ? "" : t.substr(dot + 1);
    if (ip.empty())
        ip = "0";
    for (char c : ip + fp)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ConfigError(0, "not a decimal number: '" + text + "'");
    if (fp.size() > 9)
        throw ConfigError(0, "too many fractional digits: '" + text + "'");
    Rational r;
    r.den = 1;
    for (std::size_t i = 0; i < fp.size(); i++)
        r.den *= 10;
    r.num = std::stoll(ip) * r.den + (fp.empty() ? 0 : std::stoll(fp));
    return r;
}

ScenarioConfig preset_defaults(Preset p) {
    ScenarioConfig cfg;
    cfg.preset = p;
    if (p == Preset::kWan) {
        cfg.link_delay_ns = 5 * kNsPerMs;
        cfg.rcvwnd_bytes = 600000;
        // The scaled window is usable from the start: slow start must be able
        // to open the full pipe, as the zero-loss queue peaks demand.
        cfg.ssthresh_init_bytes = 600000;
        cfg.duration_ns = 20 * kNsPerSec;
        cfg.buffer_cells = 12000;
    }
    return cfg;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError(0, what); };
    if (n_sources < 1)
        fail("n_sources: must be at least 1");
    if (mss_bytes <= 0)
        fail("mss_bytes: must be positive");
    if (rcvwnd_bytes < mss_bytes)
        fail("rcvwnd_bytes: must be at least one segment");
    if (ssthresh_init_bytes < 2 * mss_bytes)
        fail("ssthresh_bytes: must be at least two segments");
    if (link_rate_bps <= 0)
        fail("link_rate_mbps: must be positive");
    if (link_delay_ns < 0)
        fail("link_delay_us: must be non-negative");
    if (timer_tick_ns <= 0)
        fail("timer_tick_ms: must be positive");
    if (duration_ns <= 0)
        fail("duration_ms: must be positive");
    if (buffer_cells <= 0)
        fail("buffer_cells: must be positive");
    if (start_stagger_ns < 0)
        fail("start_stagger_ns: must be non-negative");
    if (buffer_cells == kInfiniteBufferCells && policy != PolicyKind::kTailDrop)
        fail("buffer_cells: infinite buffer requires policy = tail");
    if (policy == PolicyKind::kEpd) {
        if (epd_headroom_cells <= 0 || epd_headroom_cells >= buffer_cells)
            fail("epd_headroom_cells: must be in (0, buffer_cells)");
    }
    if (policy == PolicyKind::kSelectiveDrop || policy == PolicyKind::kFba) {
        if (r_fraction.num <= 0 || r_fraction.num >= r_fraction.den)
            fail("r_fraction: must be in (0, 1)");
        std::int64_t r_cells = buffer_cells * r_fraction.num / r_fraction.den;
        if (r_cells <= 0)
            fail("r_fraction: resolves to zero cells");
        if (z.num <= 0)
            fail("z: must be positive");
        if (z.num > 2 * z.den)
            fail("z: must not exceed 2");
    }
}

DropPolicy ScenarioConfig::resolved_policy() const {
    DropPolicy p;
    p.kind = policy;
    switch (policy) {
    case PolicyKind::kTailDrop:
        break;
    case PolicyKind::kEpd:
        p.r_cells = buffer_cells - epd_headroom_cells;
        break;
    case PolicyKind::kSelectiveDrop:
    case PolicyKind::kFba:
        p.r_cells = buffer_cells * r_fraction.num / r_fraction.den;
        p.z_num = z.num;
        p.z_den = z.den;
        break;
    }
    return p;
}

std::string ScenarioConfig::derived_id() const {
    std::ostringstream os;
    os << preset_name(preset) << '_' << cc_variant_name(variant) << '_'
       << policy_kind_name(policy) << "_n" << n_sources << "_k";
    if (buffer_cells == kInfiniteBufferCells)
        os << "inf";
    else
        os << buffer_cells;
    if (policy == PolicyKind::kEpd)
        os << "_h" << epd_headroom_cells;
    if (policy == PolicyKind::kSelectiveDrop || policy == PolicyKind::kFba)
        os << "_r" << r_fraction.text() << "_z" << z.text();
    return os.str();
}

std::vector<ConfigEntry> parse_config_text(const std::string& text) {
    std::vector<ConfigEntry> entries;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        line++;
        std::string s = raw;
        std::size_t hash = s.find('#');
        if (hash != std::string::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "expected 'key = value', got '" + trim(raw) + "'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError(line, "missing key");
        if (value.empty())
            throw ConfigError(line, "key '" + key + "': missing value");
        for (const ConfigEntry& e : entries)
            if (e.key == key)
                throw ConfigError(line, "key '" + key + "': duplicate (first on line " +
                                            std::to_string(e.line) + ")");
        entries.push_back(ConfigEntry{line, key, value});
    }
    return entries;
}

std::vector<ConfigEntry> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(0, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

// Applies one key to a config under construction. `preset` is handled by the
// caller (it determines the defaults everything else overrides).
void apply_entry(ScenarioConfig& cfg, const ConfigEntry& e) {
    try {
        if (e.key == "scenario_id") {
            cfg.scenario_id = e.value;
        } else if (e.key == "n_sources") {
            cfg.n_sources = static_cast<int>(parse_int(e));
        } else if (e.key == "variant") {
            cfg.variant = parse_variant(e);
        } else if (e.key == "policy") {
            cfg.policy = parse_policy(e);
        } else if (e.key == "buffer_cells") {
            cfg.buffer_cells = e.value == "infinite" ? kInfiniteBufferCells : parse_int(e);
        } else if (e.key == "rcvwnd_bytes") {
            cfg.rcvwnd_bytes = parse_int(e);
        } else if (e.key == "ssthresh_bytes") {
            cfg.ssthresh_init_bytes = parse_int(e);
        } else if (e.key == "mss_bytes") {
            cfg.mss_bytes = static_cast<int>(parse_int(e));
        } else if (e.key == "link_rate_mbps") {
            Rational r = parse_decimal(e.value);
            if ((r.num * 1000000) % r.den != 0)
                throw ConfigError(e.line, "key 'link_rate_mbps': finer than 1 bps");
            cfg.link_rate_bps = r.num * 1000000 / r.den;
        } else if (e.key == "link_delay_us") {
            cfg.link_delay_ns = parse_int(e) * kNsPerUs;
        } else if (e.key == "timer_tick_ms") {
            cfg.timer_tick_ns = parse_int(e) * kNsPerMs;
        } else if (e.key == "duration_ms") {
            cfg.duration_ns = parse_int(e) * kNsPerMs;
        } else if (e.key == "r_fraction") {
            cfg.r_fraction = parse_decimal(e.value);
        } else if (e.key == "z") {
            cfg.z = parse_decimal(e.value);
        } else if (e.key == "epd_headroom_cells") {
            cfg.epd_headroom_cells = parse_int(e);
        } else if (e.key == "start_stagger_ns") {
            cfg.start_stagger_ns = parse_int(e);
        } else if (e.key == "sonet") {
            cfg.sonet = parse_bool(e);
        } else if (e.key == "traces") {
            cfg.traces = parse_bool(e);
        } else if (e.key == "admission_trace") {
            cfg.admission_trace = parse_bool(e);
        } else {
            throw ConfigError(e.line, "unknown key '" + e.key + "'");
        }
    } catch (const ConfigError& ce) {
        if (ce.line() == 0)
            throw ConfigError(e.line, "key '" + e.key + "': " + ce.what());
        throw;
    }
}

ScenarioConfig build_scenario(const std::vector<ConfigEntry>& entries) {
    Preset preset = Preset::kLan;
    bool preset_given = false;
    for (const ConfigEntry& e : entries) {
        if (e.key == "preset") {
            preset = parse_preset(e);
            preset_given = true;
        }
    }
    if (!preset_given)
        throw ConfigError(0, "missing required key 'preset'");
    ScenarioConfig cfg = preset_defaults(preset);
    for (const ConfigEntry& e : entries)
        if (e.key != "preset")
            apply_entry(cfg, e);
    cfg.validate();
    return cfg;
}

} // namespace

ScenarioConfig scenario_from_entries(const std::vector<ConfigEntry>& entries) {
    return build_scenario(entries);
}

SweepSpec sweep_from_entries(const std::vector<ConfigEntry>& entries) {
    SweepSpec spec;
    for (const ConfigEntry& e : entries) {
        if (e.key.rfind("sweep.", 0) == 0) {
            SweepAxis axis;
            axis.line = e.line;
            axis.key = e.key.substr(6);
            if (std::find(kSweepableKeys.begin(), kSweepableKeys.end(), axis.key) ==
                kSweepableKeys.end())
                throw ConfigError(e.line, "key '" + e.key + "': axis not sweepable");
            std::istringstream vs(e.value);
            std::string item;
            while (std::getline(vs, item, ',')) {
                item = trim(item);
                if (item.empty())
                    throw ConfigError(e.line, "key '" + e.key + "': empty value in list");
                axis.values.push_back(item);
            }
            if (axis.values.empty())
                throw ConfigError(e.line, "key '" + e.key + "': no values");
            spec.axes.push_back(std::move(axis));
        } else {
            spec.base.push_back(e);
        }
    }
    if (spec.axes.empty())
        throw ConfigError(0, "sweep file declares no sweep.* axes");
    return spec;
}

std::vector<ScenarioConfig> expand(const SweepSpec& sweep) {
    std::vector<std::size_t> idx(sweep.axes.size(), 0);
    std::vector<ScenarioConfig> out;
    for (;;) {
        std::vector<ConfigEntry> entries;
        // Axis values override base entries; base 'scenario_id' is dropped so
        // every member gets a distinct derived id.
        for (const ConfigEntry& e : sweep.base) {
            bool swept = false;
            for (const SweepAxis& axis : sweep.axes)
                if (axis.key == e.key)
                    swept = true;
            if (!swept && e.key != "scenario_id")
                entries.push_back(e);
        }
        for (std::size_t a = 0; a < sweep.axes.size(); a++)
            entries.push_back(ConfigEntry{sweep.axes[a].line, sweep.axes[a].key,
                                          sweep.axes[a].values[idx[a]]});
        out.push_back(build_scenario(entries));

        // Odometer: last axis varies fastest.
        std::size_t a = sweep.axes.size();
        while (a > 0) {
            a--;
            if (++idx[a] < sweep.axes[a].values.size())
                break;
            idx[a] = 0;
            if (a == 0)
                return out;
        }
    }
}

} // namespace ubrsim
