#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ubrsim/cli.h"
#include "ubrsim/simulation.h"
#include "ubrsim/trace.h"

namespace fs = std::filesystem;
using namespace ubrsim;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("ubrsim_test_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
    return p.string();
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

const char* kShortConfig =
    "preset = lan\n"
    "n_sources = 2\n"
    "buffer_cells = 150\n"
    "policy = epd\n"
    "epd_headroom_cells = 30\n"
    "variant = reno\n"
    "duration_ms = 120\n";

} // namespace

TEST_CASE("round-half-even formatting") {
    CHECK(format_round_half_even(0.3425, 2) == "0.34");  // the 0.34 average
    CHECK(format_round_half_even(0.125, 2) == "0.12");   // ties to even
    CHECK(format_round_half_even(0.135, 2) == "0.14");
    CHECK(format_round_half_even(1.0, 2) == "1.00");
    CHECK(format_round_half_even(0.955, 2) == "0.96");
}

TEST_CASE("run writes a self-describing CSV row and trace streams") {
    TempDir dir("run");
    std::string cfg = write_file(dir.path / "scenario.cfg", kShortConfig);
    std::ostringstream out, err;
    int rc = run_command(cfg, dir.str() + "/out", false, out, err);
    CHECK(rc == 0);

    std::string csv = read_file(dir.path / "out" / "report.csv");
    std::istringstream lines(csv);
    std::string header, row;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK(header == kCsvHeader);
    CHECK(row.find("lan,reno,epd,2,150,120,") != std::string::npos);
    CHECK(row.rfind(",120") == row.size() - 4);  // duration_ms last

    std::string id = "lan_reno_epd_n2_k150_h30";
    CHECK(fs::exists(dir.path / "out" / (id + ".cwnd.trace")));
    CHECK(fs::exists(dir.path / "out" / (id + ".queue.trace")));
    CHECK(fs::exists(dir.path / "out" / (id + ".admission.trace")));
}

TEST_CASE("run --seedless-check passes on identical reruns") {
    TempDir dir("seedless");
    std::string cfg = write_file(dir.path / "scenario.cfg", kShortConfig);
    std::ostringstream out, err;
    int rc = run_command(cfg, dir.str() + "/out", true, out, err);
    CHECK(rc == 0);
    CHECK(out.str().find("identical") != std::string::npos);
}

TEST_CASE("malformed config files surface the line number") {
    TempDir dir("bad");
    std::string cfg = write_file(dir.path / "scenario.cfg",
                                 "preset = lan\nwibble_cells = 9\n");
    std::ostringstream out, err;
    CHECK_THROWS_WITH_AS(run_command(cfg, dir.str() + "/out", false, out, err),
                         doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("sweep outputs follow expansion order at any parallelism") {
    TempDir dir("sweep");
    std::string sweep = write_file(dir.path / "sweep.cfg",
                                   "preset = lan\n"
                                   "duration_ms = 60\n"
                                   "n_sources = 2\n"
                                   "buffer_cells = 120\n"
                                   "epd_headroom_cells = 30\n"
                                   "traces = off\n"
                                   "sweep.policy = tail, epd, selective_drop\n"
                                   "sweep.variant = vanilla, sack\n");
    std::ostringstream out1, err1, out2, err2;
    int rc1 = sweep_command(sweep, dir.str() + "/p1", 1, false, out1, err1);
    int rc2 = sweep_command(sweep, dir.str() + "/p4", 4, false, out2, err2);
    CHECK(rc1 == 0);
    CHECK(rc2 == 0);

    std::string csv1 = read_file(dir.path / "p1" / "sweep.csv");
    std::string csv2 = read_file(dir.path / "p4" / "sweep.csv");
    CHECK(csv1 == csv2);

    // 6 members + header, ordered: policy axis outermost, variant innermost.
    std::istringstream lines(csv1);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    CHECK(line.find(",vanilla,tail,") != std::string::npos);
    std::getline(lines, line);
    CHECK(line.find(",sack,tail,") != std::string::npos);
    std::getline(lines, line);
    CHECK(line.find(",vanilla,epd,") != std::string::npos);
    int rest = 0;
    while (std::getline(lines, line))
        if (!line.empty())
            rest++;
    CHECK(rest == 3);
}

TEST_CASE("tabulate renders grouped rows with column averages") {
    TempDir dir("tab");
    // Synthetic CSV covering 2 LAN rows + 1 WAN row over two policies.
    std::ostringstream csv;
    csv << kCsvHeader << "\n";
    csv << "a,lan,vanilla,tail,5,1000,0,0,0.210000,0.680000,1000,10,10000\n";
    csv << "b,lan,vanilla,epd,5,1000,800,0,0.490000,0.570000,1000,10,10000\n";
    csv << "c,lan,vanilla,tail,15,1000,0,0,0.470000,0.310000,1000,10,10000\n";
    csv << "d,lan,vanilla,epd,15,1000,800,0,0.720000,0.560000,1000,10,10000\n";
    csv << "e,wan,vanilla,tail,5,12000,0,0,0.860000,0.750000,9000,10,20000\n";
    csv << "f,wan,vanilla,epd,5,12000,11800,0,0.900000,0.940000,9000,10,20000\n";
    std::string path = write_file(dir.path / "rows.csv", csv.str());

    std::ostringstream out, err;
    TableSpec spec;
    spec.column_axis = "policy";
    spec.metric = "efficiency";
    int rc = tabulate_command({path}, spec, out, err);
    CHECK(rc == 0);
    std::string text = out.str();
    // (0.21 + 0.47) / 2 = 0.34 for the lan tail column
    CHECK(text.find("Column Average") != std::string::npos);
    CHECK(text.find("0.34") != std::string::npos);
    CHECK(text.find("tail") != std::string::npos);
    CHECK(text.find("epd") != std::string::npos);
    // lan block precedes wan block
    CHECK(text.find("lan") < text.find("wan"));

    // A 1x1 table renders from a single row.
    std::ostringstream single;
    single << kCsvHeader << "\n";
    single << "a,lan,vanilla,tail,5,1000,0,0,0.210000,0.680000,1000,10,10000\n";
    std::string spath = write_file(dir.path / "single.csv", single.str());
    std::ostringstream sout;
    CHECK(tabulate_command({spath}, spec, sout, err) == 0);
    CHECK(sout.str().find("0.21") != std::string::npos);
}

TEST_CASE("tabulate rejects missing cells by name") {
    TempDir dir("tabmiss");
    std::ostringstream csv;
    csv << kCsvHeader << "\n";
    csv << "a,lan,vanilla,tail,5,1000,0,0,0.210000,0.680000,1000,10,10000\n";
    csv << "b,lan,vanilla,epd,15,1000,800,0,0.490000,0.570000,1000,10,10000\n";
    std::string path = write_file(dir.path / "rows.csv", csv.str());
    std::ostringstream out, err;
    TableSpec spec;
    CHECK_THROWS_WITH_AS(tabulate_command({path}, spec, out, err),
                         doctest::Contains("missing cell"), ConfigError);
}

TEST_CASE("binary traces round-trip through the reader and trace-dump") {
    TempDir dir("dump");
    std::string path = (dir.path / "x.trace").string();
    {
        BinaryTraceWriter w(path, TraceSchema::kCwnd);
        w.write(CwndRecord{12345, 2, 1024, 65535, CwndTag::kSlowStart});
        w.write(CwndRecord{23456, 2, 1536, 65535, CwndTag::kFastRetransmit});
        w.flush();
    }
    BinaryTraceReader r(path);
    REQUIRE(r.schema() == TraceSchema::kCwnd);
    CwndRecord rec;
    REQUIRE(r.next_cwnd(rec));
    CHECK(rec.time_ns == 12345);
    CHECK(rec.vc == 2);
    CHECK(rec.cwnd == 1024);
    CHECK(rec.tag == CwndTag::kSlowStart);
    REQUIRE(r.next_cwnd(rec));
    CHECK(rec.cwnd == 1536);
    CHECK(!r.next_cwnd(rec));

    std::ostringstream out, err;
    CHECK(trace_dump_command(path, out, err) == 0);
    CHECK(out.str() ==
          "time_ns,vc,cwnd,ssthresh,tag\n"
          "12345,2,1024,65535,slow_start\n"
          "23456,2,1536,65535,fast_rtx\n");
}

TEST_CASE("csv_row carries the full configuration") {
    ScenarioConfig cfg = preset_defaults(Preset::kLan);
    cfg.policy = PolicyKind::kFba;
    cfg.variant = CcVariant::kSack;
    cfg.n_sources = 15;
    cfg.buffer_cells = 3000;
    RunReport r;
    r.duration_ns = cfg.duration_ns;
    r.per_vc.resize(15);
    for (auto& vc : r.per_vc)
        vc.delivered_bytes = 1000000;
    r.max_queue_cells = 2345;
    r.wasted_wire_bytes = 5300;
    r.finalize(125.2);
    std::string row = csv_row(cfg, r);
    CHECK(row.find("lan,sack,fba,15,3000,2700,0.8,") != std::string::npos);
    CHECK(row.find(",2345,5300,10000") != std::string::npos);
    CHECK(row.find("1.000000") != std::string::npos);  // fairness exact 1
}
