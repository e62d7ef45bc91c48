// exclab: excursion statistics of a double quantum dot from the command line.

#include "exclab/commands.hpp"
#include "exclab/config.hpp"
#include "exclab/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    bool blockade = false;
    std::optional<bool> gate_shift;
    std::string grid;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
    cmd->add_option("--config", f.config_path, "key = value configuration file");
    cmd->add_option("--workers", f.workers, "worker threads (fallback: EXCLAB_WORKERS)");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_flag("--blockade", f.blockade, "three-state Coulomb-blockade model");
    cmd->add_flag_function(
        "--gate-shift,!--no-gate-shift",
        [&f](std::int64_t count) { f.gate_shift = count > 0; },
        "apply V_g -> V_g - U/2");
    cmd->add_option("--grid", f.grid, "vg:lo:hi:n,vsd:lo:hi:n");
}

exclab::SweepConfig build_config(const CommonFlags &f) {
    exclab::SweepConfig cfg;
    if (!f.config_path.empty()) {
        cfg = exclab::load_config(f.config_path);
    }
    if (f.blockade) {
        cfg.blockade = true;
    }
    if (f.gate_shift) {
        cfg.gate_shift = f.gate_shift;
    }
    if (!f.grid.empty()) {
        exclab::apply_grid(cfg, f.grid);
    }
    if (f.seed) {
        cfg.seed = *f.seed;
    }
    cfg.workers = exclab::resolve_workers(f.workers, cfg.workers);
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Excursion statistics of a double quantum dot"};
    app.require_subcommand(1);

    CommonFlags flags;
    double vg = 0.0, vsd = 0.0;
    std::string out_path, csv_path, column, dump_path;
    std::optional<std::size_t> excursions;
    double inject_d2 = 1.0;

    auto *analyze = app.add_subcommand("analyze", "full report at one point");
    add_common(analyze, flags);
    analyze->add_option("--vg", vg, "gate voltage")->required();
    analyze->add_option("--vsd", vsd, "source-drain bias")->required();

    auto *sweep = app.add_subcommand("sweep", "grid sweep to CSV");
    add_common(sweep, flags);
    sweep->add_option("--out", out_path, "output CSV")->required();

    auto *simulate = app.add_subcommand("simulate", "Monte Carlo comparison at one point");
    add_common(simulate, flags);
    simulate->add_option("--vg", vg, "gate voltage")->required();
    simulate->add_option("--vsd", vsd, "source-drain bias")->required();
    simulate->add_option("--excursions", excursions, "number of excursions");
    simulate->add_option("--dump", dump_path, "write a trajectory dump (time, from, to)");

    auto *verify = app.add_subcommand("verify", "invariant battery on a 7x7 grid");
    add_common(verify, flags);
    verify->add_option("--inject-d2", inject_d2, "test hook: scale D2 in the assembled noise");

    auto *heatmap = app.add_subcommand("heatmap", "render a CSV column as PPM");
    heatmap->add_option("--csv", csv_path, "sweep CSV")->required();
    heatmap->add_option("--column", column, "column name")->required();
    heatmap->add_option("--out", out_path, "output PPM")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*heatmap) {
            return exclab::cmd_heatmap(csv_path, column, out_path, std::cout);
        }
        const exclab::SweepConfig cfg = build_config(flags);
        if (*analyze) {
            return exclab::cmd_analyze(cfg, vg, vsd, cfg.gate_shift.value_or(false), std::cout);
        }
        if (*sweep) {
            return exclab::cmd_sweep(cfg, cfg.gate_shift.value_or(true), cfg.workers, out_path);
        }
        if (*simulate) {
            exclab::SimulateOptions opt;
            opt.excursions = excursions.value_or(cfg.excursions);
            opt.seed = cfg.seed;
            opt.workers = cfg.workers;
            if (!dump_path.empty()) {
                opt.dump_path = dump_path;
            }
            return exclab::cmd_simulate(cfg, vg, vsd, cfg.gate_shift.value_or(false), opt, std::cout);
        }
        if (*verify) {
            exclab::VerifyOptions opt;
            opt.d2_scale = inject_d2;
            return exclab::cmd_verify(cfg, opt, std::cout);
        }
    } catch (const exclab::Error &e) {
        std::cerr << "exclab: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
