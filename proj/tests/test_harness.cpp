#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "irsbf/harness.hpp"

using namespace irsbf;
using namespace irsbf::harness;
using nlohmann::json;

namespace {

json minimal() { return json{{"schema_version", 1}, {"p_max_dbm", 30.0}}; }

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.geometry.n_alice = 8;
    c.geometry.n_irs = 4;
    c.sweep_values = {4};
    c.trials = 2;
    c.admm.max_iter = 200;
    return c;
}

std::vector<ResultRow> strip_ms(std::vector<ResultRow> rows) {
    for (auto& r : rows) r.ms = 0.0;
    return rows;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("irsbf_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Config, MinimalDocumentUsesDefaults) {
    const ExperimentConfig c = config_from_json(minimal());
    EXPECT_EQ(c.geometry.n_alice, 16);
    EXPECT_EQ(c.strategies.size(), 4u);
    EXPECT_TRUE(c.alpha_b.use_noise_power);
    EXPECT_EQ(c.admm.rho1, 16.0);
    EXPECT_EQ(c.admm.l_y, 8.0);
    EXPECT_EQ(c.admm.eps1, 1e-5);
    EXPECT_DOUBLE_EQ(c.p_max_watts(), 1.0);
    EXPECT_EQ(c.split.beta_an, 0.2);
}

TEST(Config, ParsesEveryField) {
    json j = minimal();
    j["geometry"] = {{"alice", {0.0, 4.0}}, {"n_alice", 8}, {"n_irs", 6}, {"n_rf", 4}, {"l_s", 1}, {"l_z", 2}};
    j["channel"] = {{"n_paths", 3}, {"rician_kappa", 2.0}, {"noise_dbm", -70.0}};
    j["alpha_b"] = 0.5;
    j["admm"] = {{"rho1", 3.0}, {"l_y", 0.1}, {"init", "consensus"}, {"normalize", false}};
    j["power_split"] = {{"beta_an", 0.3}};
    j["nsjhb"] = {{"dictionary_size", 32}, {"fdb_method", "ascent"}, {"hint_aods", false}};
    j["fdb_strategy_method"] = "svd";
    j["strategies"] = {"no-irs", "proposed-hb"};
    j["sweep"] = {{"var", "n-alice"}, {"values", {8, 12}}};
    j["trials"] = 3;
    j["base_seed"] = 99;
    const ExperimentConfig c = config_from_json(j);
    EXPECT_EQ(c.geometry.pos_alice.y, 4.0);
    EXPECT_EQ(c.geometry.n_irs, 6);
    EXPECT_EQ(c.channel.n_paths, 3);
    EXPECT_FALSE(c.alpha_b.use_noise_power);
    EXPECT_EQ(c.alpha_b.value, 0.5);
    EXPECT_EQ(c.admm.init, AdmmInit::Consensus);
    EXPECT_FALSE(c.admm.normalize);
    EXPECT_EQ(c.nsjhb.fdb_method, FdbMethod::Ascent);
    EXPECT_EQ(c.fdb_strategy_method, FdbMethod::Svd);
    ASSERT_EQ(c.strategies.size(), 2u);
    EXPECT_EQ(c.strategies[0], Strategy::NoIrs);
    EXPECT_EQ(c.sweep_var, SweepVar::NAlice);
    EXPECT_EQ(c.geometry_at(12).n_alice, 12);
    EXPECT_EQ(c.base_seed, 99u);
}

TEST(Config, RoundTripsThroughJson) {
    json j = minimal();
    j["alpha_b"] = 0.25;
    j["sweep"] = {{"values", {4, 8}}};
    const ExperimentConfig a = config_from_json(j);
    const ExperimentConfig b = config_from_json(config_to_json(a));
    EXPECT_EQ(config_to_json(a), config_to_json(b));
}

TEST(Config, RejectsBadDocuments) {
    auto bad = [](json j) { EXPECT_THROW(config_from_json(j), ConfigError) << j.dump(); };
    bad(json{{"p_max_dbm", 30.0}});
    bad(json{{"schema_version", 1}});
    bad(json{{"schema_version", 2}, {"p_max_dbm", 30.0}});
    json j = minimal();
    j["colour"] = "red";
    bad(j);
    j = minimal();
    j["admm"] = {{"rho", 1.0}};
    bad(j);
    j = minimal();
    j["strategies"] = {"proposed-hb", "magic"};
    bad(j);
    j = minimal();
    j["alpha_b"] = "noise";
    bad(j);
    j = minimal();
    j["admm"] = {{"rho1", -1.0}};
    bad(j);
    j = minimal();
    j["trials"] = 0;
    bad(j);
    j = minimal();
    j["geometry"] = {{"bob", {45.0, 0.0}}};  // coincides with Eve
    bad(j);
    j = minimal();
    j["sweep"] = {{"values", json::array()}};
    bad(j);
    j = minimal();
    j["admm"] = {{"init", "warm"}};
    bad(j);
}

TEST(Config, ShippedProfilesLoad) {
    for (const char* name : {"desk.json", "full-scale.json", "smoke.json"}) {
        const auto path = std::filesystem::path(IRSBF_SOURCE_DIR) / "configs" / name;
        EXPECT_NO_THROW(load_config(path)) << name;
    }
    const ExperimentConfig full = load_config(std::filesystem::path(IRSBF_SOURCE_DIR) / "configs" / "full-scale.json");
    EXPECT_EQ(full.geometry.n_alice, 32);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Seeds, SplitmixKnownValues) {
    // Reference outputs of the splitmix64 finalizer with the golden-ratio increment.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_NE(trial_seed(1, 0), trial_seed(1, 1));
    EXPECT_NE(admm_seed(7), phase_seed(7));
}

TEST(Sweep, OneCellGivesOneRow) {
    ExperimentConfig c = small_config();
    c.strategies = {Strategy::NoIrs};
    c.trials = 1;
    const auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 1u);
    const std::string csv = results_csv(rows);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kResultsHeader);
}

TEST(Sweep, PairedSeedsAndOrdering) {
    ExperimentConfig c = small_config();
    c.sweep_values = {2, 4};
    c.trials = 3;
    const auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 2u * 4u * 3u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.seed, trial_seed(c.base_seed, r.trial));
        EXPECT_TRUE(r.error.empty()) << r.error;
        EXPECT_GE(r.secrecy_rate, 0.0);
        EXPECT_TRUE(std::isfinite(r.secrecy_rate));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        EXPECT_TRUE(a.value < b.value || (a.value == b.value && (a.strategy != b.strategy || a.trial < b.trial)));
    }
    std::set<std::uint64_t> seeds;
    for (const auto& r : rows) seeds.insert(r.seed);
    EXPECT_EQ(seeds.size(), 3u);
}

TEST(Sweep, DeterministicModuloRuntime) {
    const ExperimentConfig c = small_config();
    const auto a = strip_ms(run_sweep(c));
    const auto b = strip_ms(run_sweep(c));
    EXPECT_EQ(results_csv(a), results_csv(b));
    ExperimentConfig threaded = c;
    threaded.threads = 2;
    EXPECT_EQ(results_csv(strip_ms(run_sweep(threaded))), results_csv(a));
}

TEST(Sweep, DirectLinksIndependentOfIrsSize) {
    ExperimentConfig c = small_config();
    c.strategies = {Strategy::NoIrs};
    c.sweep_values = {2, 4, 6};
    c.trials = 4;
    const auto rows = run_sweep(c);
    for (int t = 0; t < 4; ++t) {
        const double r2 = rows[static_cast<std::size_t>(t)].secrecy_rate;
        EXPECT_EQ(rows[static_cast<std::size_t>(4 + t)].secrecy_rate, r2);
        EXPECT_EQ(rows[static_cast<std::size_t>(8 + t)].secrecy_rate, r2);
    }
}

TEST(Sweep, FailedTrialBecomesFlaggedRow) {
    ExperimentConfig c = small_config();
    c.channel.reference_gain = 1e300;
    c.channel.pathloss_exp_direct = 0.0;
    c.channel.pathloss_exp_reflected = 0.0;
    const auto rows = run_sweep(c);
    ASSERT_EQ(rows.size(), 4u * 2u);
    int failed = 0;
    for (const auto& r : rows)
        if (!r.error.empty()) {
            ++failed;
            EXPECT_EQ(r.secrecy_rate, 0.0);
            EXPECT_FALSE(r.converged);
        }
    EXPECT_GT(failed, 0);
}

TEST(Sweep, WritesResultsAtomically) {
    ExperimentConfig c = small_config();
    c.strategies = {Strategy::RandomIrs};
    c.output_dir = scratch("sweep").string();
    const auto rows = sweep(c);
    const auto path = std::filesystem::path(c.output_dir) / "results.csv";
    ASSERT_TRUE(std::filesystem::exists(path));
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    EXPECT_EQ(io::read_file(path), results_csv(rows));
    EXPECT_NEAR(mean_rate(rows, "random-irs", 4), 0.5 * (rows[0].secrecy_rate + rows[1].secrecy_rate), 1e-15);
    EXPECT_TRUE(std::isnan(mean_rate(rows, "fdb", 4)));
}

TEST(Strategy, NamesRoundTrip) {
    for (Strategy s : {Strategy::ProposedHb, Strategy::Fdb, Strategy::RandomIrs, Strategy::NoIrs})
        EXPECT_EQ(parse_strategy(strategy_name(s)), s);
    EXPECT_THROW(parse_strategy("best"), ConfigError);
}

TEST(Strategy, RandomIrsIsReproducible) {
    const ExperimentConfig c = small_config();
    const ChannelSet set = generate_channel_set(c.geometry, c.channel, 5);
    const StrategyOutcome a = run_strategy("random-irs", set, c, 5);
    const StrategyOutcome b = run_strategy("random-irs", set, c, 5);
    EXPECT_EQ(a.phases.theta, b.phases.theta);
    EXPECT_EQ(a.secrecy_rate, b.secrecy_rate);
    const StrategyOutcome other = run_strategy("random-irs", set, c, 6);
    EXPECT_NE(a.phases.theta, other.phases.theta);
}

TEST(Strategy, FdbUsesFullDigitalPrecoder) {
    const ExperimentConfig c = small_config();
    const ChannelSet set = generate_channel_set(c.geometry, c.channel, 8);
    const StrategyOutcome fdb = run_strategy("fdb", set, c, 8);
    const StrategyOutcome hb = run_strategy("proposed-hb", set, c, 8);
    EXPECT_EQ(fdb.phases.theta, hb.phases.theta);
    EXPECT_EQ(fdb.admm_iters, hb.admm_iters);
    EXPECT_GT(fdb.admm_iters, 0);
}

TEST(Setting, LabelsAndParsing) {
    EXPECT_EQ((ConvergenceSetting{8.0, 16.0, 16.0}).label(), "ly8_rho1-16_rho2-16");
    EXPECT_EQ((ConvergenceSetting{0.1, 3.0, 2.5}).label(), "ly0p1_rho1-3_rho2-2p5");
    const ConvergenceSetting s = parse_setting("32:16:8");
    EXPECT_EQ(s.l_y, 32.0);
    EXPECT_EQ(s.rho2, 8.0);
    EXPECT_THROW(parse_setting("8:16"), ConfigError);
    EXPECT_THROW(parse_setting("8:16:16:1"), ConfigError);
    EXPECT_THROW(parse_setting("a:b:c"), ConfigError);
    EXPECT_THROW(parse_setting("0:16:16"), ConfigError);
}

TEST(ConvergenceRun, IdenticalSettingsGiveIdenticalTraces) {
    ExperimentConfig c = small_config();
    c.geometry.n_irs = 8;
    const auto runs = run_convergence(c, {ConvergenceSetting{}, ConvergenceSetting{}});
    ASSERT_EQ(runs.size(), 2u);
    ASSERT_EQ(runs[0].trace.size(), runs[1].trace.size());
    for (std::size_t i = 0; i < runs[0].trace.size(); ++i) {
        EXPECT_EQ(runs[0].trace[i].residual, runs[1].trace[i].residual);
        EXPECT_EQ(runs[0].trace[i].lagrangian, runs[1].trace[i].lagrangian);
        EXPECT_EQ(runs[0].trace[i].objective, runs[1].trace[i].objective);
    }
    EXPECT_THROW(run_convergence(c, {}), ConfigError);
}

TEST(ConvergenceRun, WritesTracesAndSummary) {
    ExperimentConfig c = small_config();
    c.output_dir = scratch("conv").string();
    const auto runs = convergence_run(c, {ConvergenceSetting{8, 16, 16}, ConvergenceSetting{32, 16, 16}});
    const std::filesystem::path dir(c.output_dir);
    for (const auto& r : runs) {
        const std::string text = io::read_file(dir / ("trace_" + r.setting.label() + ".csv"));
        EXPECT_EQ(text.substr(0, text.find('\n')), io::kTraceHeader);
        EXPECT_EQ(static_cast<int>(std::count(text.begin(), text.end(), '\n')), r.iterations + 1);
    }
    EXPECT_EQ(io::read_file(dir / "convergence_summary.csv"), convergence_summary_csv(runs));
}

namespace {

ExperimentConfig trend_config(std::uint64_t base_seed) {
    ExperimentConfig c;
    c.geometry.n_irs = 8;
    c.base_seed = base_seed;
    return c;
}

}  // namespace

TEST(ConvergenceRun, LargerLyNeedsMoreIterationsOnAverage) {
    double it8 = 0.0, it32 = 0.0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const auto runs = run_convergence(trend_config(s), {ConvergenceSetting{8, 16, 16}, ConvergenceSetting{32, 16, 16}});
        it8 += runs[0].iterations;
        it32 += runs[1].iterations;
    }
    EXPECT_GE(it32, it8);
}

TEST(ConvergenceRun, ConvergedSettingsReachSameObjective) {
    int compared = 0, agreeing = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const auto runs = run_convergence(trend_config(s), {ConvergenceSetting{8, 16, 16}, ConvergenceSetting{32, 16, 16}});
        if (!runs[0].converged || !runs[1].converged) continue;
        ++compared;
        const double a = runs[0].final_objective, b = runs[1].final_objective;
        const double rel = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
        if (rel <= 0.05) ++agreeing;
        EXPECT_LE(rel, 0.05) << "base seed " << s << ": " << a << " vs " << b;
    }
    EXPECT_GT(compared, 0);
    RecordProperty("agreeing", agreeing);
    RecordProperty("compared", compared);
}

TEST(Io, AtomicWriteCreatesParents) {
    const auto dir = scratch("io");
    const auto path = dir / "a" / "b.txt";
    io::atomic_write(path, "hello\n");
    EXPECT_EQ(io::read_file(path), "hello\n");
    io::atomic_write(path, "x");
    EXPECT_EQ(io::read_file(path), "x");
    EXPECT_THROW(io::read_file(dir / "missing"), InputError);
}
