// SPDX-License-Identifier: Apache-2.0
//
// irsbf: secure IRS hybrid beamforming experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irsbf/harness.hpp"

namespace {

using namespace irsbf;
using namespace irsbf::harness;

ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    return load_config(path);
}

void print_means(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    std::printf("%-12s", sweep_var_name(cfg.sweep_var).c_str());
    for (Strategy s : cfg.strategies) std::printf(" %14s", strategy_name(s).c_str());
    std::printf("\n");
    for (int v : cfg.sweep_values) {
        std::printf("%-12d", v);
        for (Strategy s : cfg.strategies) std::printf(" %14.4f", mean_rate(rows, strategy_name(s), v));
        std::printf("\n");
    }
    int failed = 0, unconverged = 0;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            ++failed;
            std::fprintf(stderr, "trial %d (%s=%d, %s) failed: %s\n", r.trial, r.var.c_str(), r.value,
                         r.strategy.c_str(), r.error.c_str());
        } else if (!r.converged) {
            ++unconverged;
        }
    }
    std::printf("rows %zu, failed %d, admm not converged %d\n", rows.size(), failed, unconverged);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IRS-assisted secure hybrid beamforming: CA-ADMM phases, OMP hybrid precoding, null-space AN"};
    app.require_subcommand(1);

    std::string config_path;

    auto* sim = app.add_subcommand("simulate", "Run every configured strategy on one channel draw");
    int sim_trial = 0;
    std::string sim_out;
    sim->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sim->add_option("--trial", sim_trial, "Trial index whose seed is used")->check(CLI::NonNegativeNumber);
    sim->add_option("-o,--out", sim_out, "Write results.csv into this directory");

    auto* swp = app.add_subcommand("sweep", "Monte-Carlo sweep over N_I or N_A");
    std::optional<std::string> swp_var;
    std::vector<int> swp_values;
    std::optional<int> swp_trials, swp_threads;
    std::optional<std::uint64_t> swp_seed;
    std::optional<std::string> swp_out;
    swp->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    swp->add_option("--var", swp_var, "Sweep variable")->check(CLI::IsMember({"n-irs", "n-alice"}));
    swp->add_option("--values", swp_values, "Sweep values")->expected(1, -1);
    swp->add_option("--trials", swp_trials, "Trials per sweep value");
    swp->add_option("--base-seed", swp_seed, "Base seed");
    swp->add_option("--threads", swp_threads, "Worker threads");
    swp->add_option("-o,--out", swp_out, "Output directory");

    auto* conv = app.add_subcommand("convergence", "CA-ADMM traces over a (L_y, rho1, rho2) grid");
    std::vector<std::string> grid;
    std::optional<std::string> conv_out;
    conv->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    conv->add_option("--grid", grid, "Settings as L_y:rho1:rho2")->required()->expected(1, -1);
    conv->add_option("-o,--out", conv_out, "Output directory");

    auto* chk = app.add_subcommand("check-conditions", "Evaluate the sufficient convergence conditions");
    double rho1 = 16.0, rho2 = 16.0, ly = 8.0;
    std::optional<double> ly2;
    chk->add_option("--rho1", rho1, "Penalty rho1")->required()->check(CLI::PositiveNumber);
    chk->add_option("--rho2", rho2, "Penalty rho2")->required()->check(CLI::PositiveNumber);
    chk->add_option("--ly", ly, "Majorization constant L_y")->required()->check(CLI::PositiveNumber);
    chk->add_option("--ly2", ly2, "y2-block constant; computed from the config's first channel draw if omitted");
    chk->add_option("-c,--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);

    auto* chan = app.add_subcommand("channels", "Dump one channel draw as a text fixture");
    int chan_trial = 0;
    std::string chan_out;
    chan->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    chan->add_option("--trial", chan_trial, "Trial index whose seed is used")->check(CLI::NonNegativeNumber);
    chan->add_option("-o,--out", chan_out, "Fixture path")->required();

    auto* show = app.add_subcommand("show-config", "Print the config with every default filled in");
    show->add_option("-c,--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            ExperimentConfig cfg = load_config(config_path);
            const int value = cfg.sweep_var == SweepVar::NIrs ? cfg.geometry.n_irs : cfg.geometry.n_alice;
            cfg.sweep_values = {value};
            cfg.trials = sim_trial + 1;
            auto rows = run_sweep(cfg);
            std::vector<ResultRow> picked;
            for (auto& r : rows)
                if (r.trial == sim_trial) picked.push_back(r);
            std::cout << results_csv(picked);
            if (!sim_out.empty())
                io::atomic_write(std::filesystem::path(sim_out) / "results.csv", results_csv(picked));
            for (const auto& r : picked)
                if (!r.error.empty()) std::fprintf(stderr, "%s failed: %s\n", r.strategy.c_str(), r.error.c_str());
        } else if (*swp) {
            ExperimentConfig cfg = load_config(config_path);
            if (swp_var) cfg.sweep_var = parse_sweep_var(*swp_var);
            if (!swp_values.empty()) cfg.sweep_values = swp_values;
            if (swp_trials) cfg.trials = *swp_trials;
            if (swp_seed) cfg.base_seed = *swp_seed;
            if (swp_threads) cfg.threads = *swp_threads;
            if (swp_out) cfg.output_dir = *swp_out;
            cfg.validate();
            auto rows = sweep(cfg);
            print_means(cfg, rows);
            std::printf("wrote %s\n", (std::filesystem::path(cfg.output_dir) / "results.csv").string().c_str());
        } else if (*conv) {
            ExperimentConfig cfg = load_config(config_path);
            if (conv_out) cfg.output_dir = *conv_out;
            std::vector<ConvergenceSetting> settings;
            for (const auto& g : grid) settings.push_back(parse_setting(g));
            auto runs = convergence_run(cfg, settings);
            std::cout << convergence_summary_csv(runs);
            for (const auto& r : runs)
                if (!r.converged)
                    std::fprintf(stderr, "%s did not reach eps1 within %d iterations\n", r.setting.label().c_str(),
                                 r.iterations);
        } else if (*chk) {
            double l2 = 0.0;
            if (ly2) {
                l2 = *ly2;
            } else {
                const ExperimentConfig cfg = load_or_default(config_path);
                const ChannelSet set = generate_channel_set(cfg.geometry, cfg.channel, trial_seed(cfg.base_seed, 0));
                const double alpha = cfg.alpha_b.resolve(set);
                OfpbOperatorSet ops = build_operators(set, alpha);
                if (cfg.admm.normalize) {
                    const double s = normalization_scale(ops, cfg.admm.target_energy);
                    ops = build_operators(scaled(set, s), alpha * s * s);
                }
                l2 = l_y2_constant(ops);
                std::printf("l_y2 %.6g (first channel draw, solver units)\n", l2);
            }
            const ConditionReport r = check_convergence_conditions(rho1, rho2, ly, l2);
            std::printf("eps_x %.6g\neps_y1 %.6g\neps_y2 %.6g\nrho1-5L_y %.6g\nsatisfied %s\n", r.eps_x, r.eps_y1,
                        r.eps_y2, r.lower_bound_margin, r.satisfied ? "yes" : "no");
            return r.satisfied ? 0 : 3;
        } else if (*chan) {
            const ExperimentConfig cfg = load_config(config_path);
            const ChannelSet set =
                generate_channel_set(cfg.geometry, cfg.channel, trial_seed(cfg.base_seed, chan_trial));
            std::ostringstream os;
            io::write_channel_set(os, set);
            io::atomic_write(chan_out, os.str());
        } else if (*show) {
            std::cout << config_to_json(load_or_default(config_path)).dump(2) << '\n';
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
