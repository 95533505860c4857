#include <iostream>

#include <CLI11.hpp>

#include "ubrsim/cli.h"
#include "ubrsim/sim_error.h"

int main(int argc, char** argv) {
    CLI::App app{"TCP-over-UBR bottleneck simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    bool seedless = false;

    CLI::App* run = app.add_subcommand("run", "execute one scenario");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--seedless-check", seedless, "run twice and compare outputs");

    std::string sweep_path;
    int parallel = 1;
    CLI::App* sweep = app.add_subcommand("sweep", "execute a parameter sweep");
    sweep->add_option("--sweep", sweep_path, "sweep config file")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--parallel", parallel, "concurrent member runs");
    sweep->add_flag("--seedless-check", seedless, "run twice and compare outputs");

    std::vector<std::string> csv_paths;
    ubrsim::TableSpec table_spec;
    CLI::App* tab = app.add_subcommand("tabulate", "render a results table from CSVs");
    tab->add_option("--csv", csv_paths, "input CSV file(s)")->required();
    tab->add_option("--cols", table_spec.column_axis, "column axis: policy|variant");
    tab->add_option("--metric", table_spec.metric,
                    "cell metric: efficiency|fairness|max_queue");

    std::string trace_path;
    CLI::App* dump = app.add_subcommand("trace-dump", "convert a binary trace to CSV");
    dump->add_option("--in", trace_path, "trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return ubrsim::run_command(config_path, out_dir, seedless, std::cout,
                                       std::cerr);
        if (sweep->parsed())
            return ubrsim::sweep_command(sweep_path, out_dir, parallel, seedless,
                                         std::cout, std::cerr);
        if (tab->parsed())
            return ubrsim::tabulate_command(csv_paths, table_spec, std::cout,
                                            std::cerr);
        if (dump->parsed())
            return ubrsim::trace_dump_command(trace_path, std::cout, std::cerr);
    } catch (const ubrsim::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ubrsim::SimError& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
