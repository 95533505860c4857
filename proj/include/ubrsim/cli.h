#ifndef UBRSIM_CLI_H
#define UBRSIM_CLI_H

#include <iosfwd>
#include <string>
#include <vector>

#include "ubrsim/metrics.h"
#include "ubrsim/scenario.h"

namespace ubrsim {

// Fixed report row schema; every row carries its full configuration so
// tables can be rebuilt from CSV files alone.
extern const char* const kCsvHeader;

std::string csv_row(const ScenarioConfig& cfg, const RunReport& report);

// Runs one scenario, writing report.csv and the trace streams under
// `out_dir`. With `seedless_check` the run executes twice and the outputs
// are compared byte for byte. Returns a process exit code.
int run_command(const std::string& config_path, const std::string& out_dir,
                bool seedless_check, std::ostream& out, std::ostream& err);

// Expands a sweep file and runs every member, at most `parallel` at a time.
// sweep.csv rows follow expansion order regardless of completion order.
int sweep_command(const std::string& sweep_path, const std::string& out_dir,
                  int parallel, bool seedless_check, std::ostream& out,
                  std::ostream& err);

// Renders rows grouped by (configuration, sources, buffer) against a policy
// or variant column axis, with per-configuration column averages.
struct TableSpec {
    std::string column_axis = "policy";  // policy | variant
    std::string metric = "efficiency";   // efficiency | fairness | max_queue
};

int tabulate_command(const std::vector<std::string>& csv_paths, const TableSpec& spec,
                     std::ostream& out, std::ostream& err);

// Converts a binary trace stream to CSV text.
int trace_dump_command(const std::string& trace_path, std::ostream& out,
                       std::ostream& err);

// Helpers shared with the test suites.
bool files_identical(const std::string& a, const std::string& b);
std::string format_round_half_even(double v, int decimals);

} // namespace ubrsim

#endif
