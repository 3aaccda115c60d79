// spconv: analytic tables, pipeline simulation, parameter sweeps and
// heralding-arm calibration for serial-parallel photon conversion.
//
// Exit codes: 0 success, 1 internal error, 2 usage or configuration error,
// 3 I/O error, 4 simulation error.

#include <iostream>
#include <map>
#include <string>
#include <system_error>

#include "CLI11.hpp"
#include "spconv/cli.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kIo = 3, kSimulation = 4 };

void add_run_flags(CLI::App* cmd, spconv::cli::RunOverrides& overrides, std::string& config, std::string& out) {
    cmd->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output path (stdout when omitted)");
    cmd->add_option("--seed", overrides.seed, "Master seed (overrides run.seed)");
    cmd->add_option("--slots", overrides.slots, "Pump slots per trial (overrides run.slots)");
    cmd->add_option("--trials", overrides.trials, "Independent trials (overrides run.trials)");
    cmd->add_option("--threads", overrides.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
}

const std::map<std::string, spconv::Strategy> kStrategies{
    {"heralded", spconv::Strategy::ActiveHeralded},
    {"clocked", spconv::Strategy::ActiveClocked},
    {"passive", spconv::Strategy::PassiveBeamsplitter},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial-parallel conversion of heralded single photons"};
    app.require_subcommand(1);

    int n_max = 8;
    double eta_sw = 1.0;
    std::string analytic_out;
    auto* analytic = app.add_subcommand("analytic", "Closed-form S(n) curves as CSV (n,heralded,clocked,passive)");
    analytic->add_option("--n-max", n_max, "Largest n")->check(CLI::Range(2, 1000));
    analytic->add_option("--eta-sw", eta_sw, "Switching efficiency")->check(CLI::Range(0.0, 1.0));
    analytic->add_option("--out", analytic_out, "Output CSV (stdout when omitted)");

    spconv::cli::RunOverrides sim_overrides;
    std::string sim_config;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "Run the full pipeline and write a JSON report");
    add_run_flags(simulate, sim_overrides, sim_config, sim_out);
    simulate->add_option("--strategy", sim_overrides.strategy, "heralded | clocked | passive")
        ->transform(CLI::CheckedTransformer(kStrategies));
    simulate->add_flag("--timing", sim_overrides.timing, "Include wall_time_s (report is then not reproducible)");

    spconv::cli::RunOverrides sweep_overrides;
    std::string sweep_config;
    std::string sweep_out;
    spconv::SweepGrid grid;
    auto* sweep = app.add_subcommand("sweep", "Simulate every point of a parameter grid, one CSV row each");
    add_run_flags(sweep, sweep_overrides, sweep_config, sweep_out);
    sweep->add_option("--strategy", grid.strategy, "Strategies to sweep")
        ->delimiter(',')
        ->transform(CLI::CheckedTransformer(kStrategies));
    sweep->add_option("--n", grid.n, "Mode counts, e.g. 2,3,4")->delimiter(',');
    sweep->add_option("--eta-sw", grid.eta_sw, "Switching efficiencies (t = eta_sw, eta_i = 1)")->delimiter(',');
    sweep->add_option("--transmittance", grid.transmittance, "Converter transmittances")->delimiter(',');

    spconv::cli::RunOverrides cal_overrides;
    std::string cal_config;
    std::string cal_out;
    std::optional<double> target_c_h;
    auto* calibrate = app.add_subcommand("calibrate", "Heralding-arm statistics and pair-probability calibration");
    add_run_flags(calibrate, cal_overrides, cal_config, cal_out);
    calibrate->add_option("--target-ch", target_c_h, "Target C_h(n) in counts/s")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*analytic) {
            spconv::cli::run_analytic(n_max, eta_sw, analytic_out);
        } else if (*simulate) {
            spconv::cli::run_simulation(sim_config, sim_overrides, sim_out);
        } else if (*sweep) {
            spconv::cli::run_sweep(sweep_config, grid, sweep_overrides, sweep_out);
        } else if (*calibrate) {
            spconv::cli::run_calibrate(cal_config, target_c_h, cal_overrides, cal_out);
        }
    } catch (const spconv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::system_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const spconv::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kSimulation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
