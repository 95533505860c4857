#include "ubrsim/cli.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "ubrsim/simulation.h"
#include "ubrsim/trace.h"

namespace fs = std::filesystem;

namespace ubrsim {

const char* const kCsvHeader =
    "scenario_id,preset,variant,policy,n_sources,buffer_cells,r,z,"
    "efficiency,fairness,max_queue_cells,wasted_bytes,duration_ms";

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct MemberOutput {
    std::string csv;
    std::vector<std::string> files;  // trace files written
};

} // namespace

std::string csv_row(const ScenarioConfig& cfg, const RunReport& report) {
    DropPolicy p = cfg.resolved_policy();
    std::ostringstream os;
    os << cfg.id() << ',' << preset_name(cfg.preset) << ','
       << cc_variant_name(cfg.variant) << ',' << policy_kind_name(cfg.policy) << ','
       << cfg.n_sources << ',' << cfg.buffer_cells << ',' << p.r_cells << ','
       << (cfg.policy == PolicyKind::kSelectiveDrop || cfg.policy == PolicyKind::kFba
               ? cfg.z.text()
               : "0")
       << ',' << format_double(report.efficiency) << ','
       << (report.fairness ? format_double(*report.fairness) : "nan") << ','
       << report.max_queue_cells << ',' << report.wasted_wire_bytes << ','
       << report.duration_ns / kNsPerMs;
    return os.str();
}

bool files_identical(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb)
        return false;
    constexpr std::size_t kChunk = 1 << 16;
    std::vector<char> ba(kChunk), bb(kChunk);
    for (;;) {
        fa.read(ba.data(), kChunk);
        fb.read(bb.data(), kChunk);
        if (fa.gcount() != fb.gcount())
            return false;
        if (!std::equal(ba.begin(), ba.begin() + fa.gcount(), bb.begin()))
            return false;
        if (fa.gcount() == 0)
            return fa.eof() && fb.eof();
        if (fa.eof() || fb.eof())
            return fa.eof() && fb.eof();
    }
}

std::string format_round_half_even(double v, int decimals) {
    double scale = std::pow(10.0, decimals);
    // nearbyint under the default rounding mode resolves ties to even.
    double r = std::nearbyint(v * scale) / scale;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
    return buf;
}

namespace {

MemberOutput run_one(const ScenarioConfig& cfg, const std::string& out_dir,
                     const std::string& prefix) {
    MemberOutput out;
    std::unique_ptr<TraceSink> sink;
    if (cfg.traces) {
        sink = std::make_unique<BinaryTraceSink>(out_dir, prefix, cfg.admission_trace);
        out.files = {out_dir + "/" + prefix + "cwnd.trace",
                     out_dir + "/" + prefix + "queue.trace",
                     out_dir + "/" + prefix + "drops.trace"};
        if (cfg.admission_trace)
            out.files.push_back(out_dir + "/" + prefix + "admission.trace");
    }
    RunReport report = run_scenario(cfg, sink ? *sink : null_trace_sink());
    out.csv = csv_row(cfg, report);
    // Streams are created lazily; keep only files that exist.
    std::erase_if(out.files, [](const std::string& f) { return !fs::exists(f); });
    report.trace_files = out.files;
    return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw SimError("output_write", "cannot open " + path);
    for (const std::string& line : lines)
        f << line << '\n';
}

int diff_outputs(const std::vector<std::string>& a, const std::vector<std::string>& b,
                 std::ostream& out, std::ostream& err) {
    if (a.size() != b.size()) {
        err << "seedless check: file sets differ\n";
        return 1;
    }
    for (std::size_t i = 0; i < a.size(); i++) {
        if (!files_identical(a[i], b[i])) {
            err << "seedless check: mismatch between " << a[i] << " and " << b[i]
                << "\n";
            return 1;
        }
    }
    out << "seedless check: " << a.size() << " file(s) identical across runs\n";
    return 0;
}

} // namespace

int run_command(const std::string& config_path, const std::string& out_dir,
                bool seedless_check, std::ostream& out, std::ostream& err) {
    (void)err;
    ScenarioConfig cfg = scenario_from_entries(load_config_file(config_path));
    fs::create_directories(out_dir);

    std::string prefix = cfg.id() + ".";
    MemberOutput first = run_one(cfg, out_dir, prefix);
    write_lines(out_dir + "/report.csv", {kCsvHeader, first.csv});
    out << kCsvHeader << "\n" << first.csv << "\n";

    if (seedless_check) {
        std::string check_dir = out_dir + "/seedless_check";
        fs::create_directories(check_dir);
        MemberOutput second = run_one(cfg, check_dir, prefix);
        write_lines(check_dir + "/report.csv", {kCsvHeader, second.csv});
        std::vector<std::string> fa = first.files, fb = second.files;
        fa.insert(fa.begin(), out_dir + "/report.csv");
        fb.insert(fb.begin(), check_dir + "/report.csv");
        return diff_outputs(fa, fb, out, err);
    }
    return 0;
}

namespace {

struct SweepResult {
    std::vector<std::string> rows;
    std::vector<std::string> files;
    std::vector<std::string> failures;
};

SweepResult run_sweep_members(const std::vector<ScenarioConfig>& configs,
                              const std::string& out_dir, int parallel) {
    SweepResult result;
    result.rows.assign(configs.size(), "");
    std::vector<std::vector<std::string>> files(configs.size());
    std::vector<std::string> failures(configs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= configs.size())
                return;
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "%04zu.", i);
            try {
                MemberOutput m = run_one(configs[i], out_dir,
                                         prefix + configs[i].id() + ".");
                result.rows[i] = m.csv;
                files[i] = m.files;
            } catch (const std::exception& e) {
                failures[i] = configs[i].id() + ": " + e.what();
            }
        }
    };

    int n_workers = std::max(1, parallel);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; w++)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    for (std::size_t i = 0; i < configs.size(); i++) {
        for (std::string& f : files[i])
            result.files.push_back(std::move(f));
        if (!failures[i].empty())
            result.failures.push_back(failures[i]);
    }
    std::erase_if(result.rows, [](const std::string& r) { return r.empty(); });
    return result;
}

} // namespace

int sweep_command(const std::string& sweep_path, const std::string& out_dir,
                  int parallel, bool seedless_check, std::ostream& out,
                  std::ostream& err) {
    SweepSpec spec = sweep_from_entries(load_config_file(sweep_path));
    std::vector<ScenarioConfig> configs = expand(spec);
    fs::create_directories(out_dir);

    SweepResult result = run_sweep_members(configs, out_dir, parallel);
    std::vector<std::string> lines;
    lines.push_back(kCsvHeader);
    for (const std::string& row : result.rows)
        lines.push_back(row);
    write_lines(out_dir + "/sweep.csv", lines);
    out << configs.size() << " member(s), " << result.rows.size() << " completed, "
        << result.failures.size() << " failed\n";

    int rc = 0;
    if (!result.failures.empty()) {
        for (const std::string& f : result.failures)
            err << "member failed: " << f << "\n";
        rc = 3;
    }

    if (seedless_check && rc == 0) {
        std::string check_dir = out_dir + "/seedless_check";
        fs::create_directories(check_dir);
        SweepResult second = run_sweep_members(configs, check_dir, parallel);
        std::vector<std::string> lines2;
        lines2.push_back(kCsvHeader);
        for (const std::string& row : second.rows)
            lines2.push_back(row);
        write_lines(check_dir + "/sweep.csv", lines2);
        std::vector<std::string> fa = result.files, fb = second.files;
        fa.insert(fa.begin(), out_dir + "/sweep.csv");
        fb.insert(fb.begin(), check_dir + "/sweep.csv");
        rc = diff_outputs(fa, fb, out, err);
    }
    return rc;
}

namespace {

struct CsvRow {
    std::string scenario_id, preset, variant, policy;
    std::int64_t n_sources = 0, buffer_cells = 0;
    std::string r, z;
    std::string efficiency, fairness;
    std::int64_t max_queue = 0, wasted = 0, duration_ms = 0;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<CsvRow> read_csv_files(const std::vector<std::string>& paths) {
    std::vector<CsvRow> rows;
    for (const std::string& path : paths) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError(0, "cannot open CSV file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            if (line.empty())
                continue;
            if (lineno == 1) {
                if (line != kCsvHeader)
                    throw ConfigError(1, path + ": unexpected CSV header");
                continue;
            }
            std::vector<std::string> f = split_csv_line(line);
            if (f.size() != 13)
                throw ConfigError(lineno, path + ": expected 13 columns");
            CsvRow row;
            row.scenario_id = f[0];
            row.preset = f[1];
            row.variant = f[2];
            row.policy = f[3];
            row.n_sources = std::stoll(f[4]);
            row.buffer_cells = std::stoll(f[5]);
            row.r = f[6];
            row.z = f[7];
            row.efficiency = f[8];
            row.fairness = f[9];
            row.max_queue = std::stoll(f[10]);
            row.wasted = std::stoll(f[11]);
            row.duration_ms = std::stoll(f[12]);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

double row_metric(const CsvRow& row, const std::string& metric) {
    if (metric == "efficiency")
        return std::stod(row.efficiency);
    if (metric == "fairness")
        return std::stod(row.fairness);
    if (metric == "max_queue")
        return static_cast<double>(row.max_queue);
    throw ConfigError(0, "unknown metric '" + metric + "'");
}

const std::string& row_column(const CsvRow& row, const std::string& axis) {
    return axis == "policy" ? row.policy : row.variant;
}

} // namespace

int tabulate_command(const std::vector<std::string>& csv_paths, const TableSpec& spec,
                     std::ostream& out, std::ostream& err) {
    (void)err;
    if (spec.column_axis != "policy" && spec.column_axis != "variant")
        throw ConfigError(0, "column axis must be policy or variant");
    if (spec.metric != "efficiency" && spec.metric != "fairness" &&
        spec.metric != "max_queue")
        throw ConfigError(0, "metric must be efficiency, fairness or max_queue");

    std::vector<CsvRow> rows = read_csv_files(csv_paths);
    if (rows.empty())
        throw ConfigError(0, "no data rows");

    std::vector<std::string> canonical =
        spec.column_axis == "policy"
            ? std::vector<std::string>{"tail", "epd", "selective_drop", "fba"}
            : std::vector<std::string>{"vanilla", "reno", "newreno", "sack"};
    std::vector<std::string> columns;
    for (const std::string& c : canonical)
        for (const CsvRow& r : rows)
            if (row_column(r, spec.column_axis) == c) {
                columns.push_back(c);
                break;
            }

    struct RowKey {
        std::string preset;
        std::int64_t n, k;
        bool operator<(const RowKey& o) const {
            if (preset != o.preset)
                return preset < o.preset;  // lan sorts before wan
            if (n != o.n)
                return n < o.n;
            return k < o.k;
        }
    };
    std::map<RowKey, std::map<std::string, double>> table;
    for (const CsvRow& r : rows) {
        RowKey key{r.preset, r.n_sources, r.buffer_cells};
        const std::string& col = row_column(r, spec.column_axis);
        if (table[key].count(col))
            throw ConfigError(0, "duplicate cell (" + r.preset + "," +
                                     std::to_string(r.n_sources) + "," +
                                     std::to_string(r.buffer_cells) + ") x " + col);
        table[key][col] = row_metric(r, spec.metric);
    }
    for (const auto& [key, cells] : table)
        for (const std::string& col : columns)
            if (!cells.count(col))
                throw ConfigError(0, "missing cell (" + key.preset + "," +
                                         std::to_string(key.n) + "," +
                                         std::to_string(key.k) + ") x " + col);

    auto fmt_cell = [&](double v) {
        if (spec.metric == "max_queue") {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
            return std::string(buf);
        }
        return format_round_half_even(v, 2);
    };

    std::vector<std::vector<std::string>> grid;
    grid.push_back({"Configuration", "Sources", "Buffer (cells)"});
    for (const std::string& c : columns)
        grid.back().push_back(c);

    std::string cur_preset;
    std::map<std::string, std::pair<double, int>> block_sum;
    auto emit_average = [&]() {
        if (cur_preset.empty())
            return;
        std::vector<std::string> avg{"Column Average", "", ""};
        for (const std::string& c : columns) {
            auto& [sum, count] = block_sum[c];
            avg.push_back(format_round_half_even(sum / count, 2));
        }
        grid.push_back(avg);
        block_sum.clear();
    };
    for (const auto& [key, cells] : table) {
        if (key.preset != cur_preset) {
            emit_average();
            cur_preset = key.preset;
        }
        std::vector<std::string> row{key.preset, std::to_string(key.n),
                                     key.k == kInfiniteBufferCells
                                         ? std::string("infinite")
                                         : std::to_string(key.k)};
        for (const std::string& c : columns) {
            double v = cells.at(c);
            row.push_back(fmt_cell(v));
            block_sum[c].first += v;
            block_sum[c].second++;
        }
        grid.push_back(row);
    }
    emit_average();

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t i = 0; i < row.size(); i++)
            widths[i] = std::max(widths[i], row[i].size());
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); i++) {
            out << row[i];
            if (i + 1 < row.size())
                out << std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out << '\n';
    }
    return 0;
}

int trace_dump_command(const std::string& trace_path, std::ostream& out,
                       std::ostream& err) {
    (void)err;
    BinaryTraceReader reader(trace_path);
    switch (reader.schema()) {
    case TraceSchema::kCwnd: {
        out << "time_ns,vc,cwnd,ssthresh,tag\n";
        CwndRecord r;
        while (reader.next_cwnd(r))
            out << r.time_ns << ',' << r.vc << ',' << r.cwnd << ',' << r.ssthresh
                << ',' << cwnd_tag_name(r.tag) << '\n';
        break;
    }
    case TraceSchema::kQueue: {
        out << "time_ns,occupancy,event\n";
        QueueRecord r;
        while (reader.next_queue(r)) {
            const char* name = r.event == QueueEvent::kAccept ? "accept"
                               : r.event == QueueEvent::kDrop ? "drop"
                                                              : "depart";
            out << r.time_ns << ',' << r.occupancy << ',' << name << '\n';
        }
        break;
    }
    case TraceSchema::kDrop: {
        out << "time_ns,vc,frame,reason\n";
        DropRecord r;
        while (reader.next_drop(r))
            out << r.time_ns << ',' << r.vc << ',' << r.frame << ','
                << drop_reason_name(r.reason) << '\n';
        break;
    }
    case TraceSchema::kAdmission: {
        out << "time_ns,vc,frame,x,y_vc,active,accepted\n";
        AdmissionRecord r;
        while (reader.next_admission(r))
            out << r.time_ns << ',' << r.vc << ',' << r.frame << ',' << r.x << ','
                << r.y_vc << ',' << r.active << ',' << int(r.accepted) << '\n';
        break;
    }
    }
    return 0;
}

} // namespace ubrsim
