// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_HARNESS_HPP
#define IRSBF_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "irsbf/admm.hpp"
#include "irsbf/channel.hpp"
#include "irsbf/io.hpp"
#include "irsbf/nsjhb.hpp"
#include "irsbf/secrecy.hpp"

namespace irsbf::harness {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Strategy { ProposedHb, Fdb, RandomIrs, NoIrs };
enum class SweepVar { NIrs, NAlice };

inline std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ProposedHb: return "proposed-hb";
        case Strategy::Fdb: return "fdb";
        case Strategy::RandomIrs: return "random-irs";
        case Strategy::NoIrs: return "no-irs";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& name) {
    for (Strategy s : {Strategy::ProposedHb, Strategy::Fdb, Strategy::RandomIrs, Strategy::NoIrs})
        if (strategy_name(s) == name) return s;
    throw ConfigError("unknown strategy '" + name + "' (expected proposed-hb, fdb, random-irs or no-irs)");
}

inline std::string sweep_var_name(SweepVar v) { return v == SweepVar::NIrs ? "n-irs" : "n-alice"; }

inline SweepVar parse_sweep_var(const std::string& name) {
    if (name == "n-irs") return SweepVar::NIrs;
    if (name == "n-alice") return SweepVar::NAlice;
    throw ConfigError("unknown sweep variable '" + name + "' (expected n-irs or n-alice)");
}

/// Bob-gain weight of the OF-PB objective: the receiver noise power, or a fixed number.
struct AlphaMode {
    bool use_noise_power = true;
    double value = 0.0;

    double resolve(const ChannelSet& set) const { return use_noise_power ? set.noise_power : value; }
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    SystemGeometry geometry = [] {
        SystemGeometry g;
        g.n_alice = 16;
        return g;
    }();
    ChannelParams channel;
    double p_max_dbm = 30.0;
    AlphaMode alpha_b;
    AdmmParams admm;
    PowerSplit split;
    NsjhbConfig nsjhb;
    FdbMethod fdb_strategy_method = FdbMethod::Ascent;
    std::vector<Strategy> strategies{Strategy::ProposedHb, Strategy::Fdb, Strategy::RandomIrs, Strategy::NoIrs};
    SweepVar sweep_var = SweepVar::NIrs;
    std::vector<int> sweep_values{8, 16, 32};
    int trials = 30;
    std::uint64_t base_seed = 1;
    std::string output_dir = "out";
    int threads = 1;

    double p_max_watts() const { return dbm_to_watts(p_max_dbm); }

    SystemGeometry geometry_at(int sweep_value) const {
        SystemGeometry g = geometry;
        (sweep_var == SweepVar::NIrs ? g.n_irs : g.n_alice) = sweep_value;
        return g;
    }

    void validate() const {
        if (schema_version != kSchemaVersion)
            throw ConfigError("schema_version " + std::to_string(schema_version) + " is not supported (expected " +
                              std::to_string(kSchemaVersion) + ")");
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (sweep_values.empty()) throw ConfigError("sweep values must be nonempty");
        if (strategies.empty()) throw ConfigError("strategy list must be nonempty");
        if (threads < 1) throw ConfigError("threads must be >= 1");
        if (!std::isfinite(p_max_dbm)) throw ConfigError("p_max_dbm must be finite");
        if (!alpha_b.use_noise_power && !std::isfinite(alpha_b.value)) throw ConfigError("alpha_b must be finite");
        try {
            channel.validate();
            admm.validate();
            split.validate();
            for (int v : sweep_values) geometry_at(v).validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        if (nsjhb.dictionary_size < geometry.n_rf) throw ConfigError("nsjhb.dictionary_size must be >= n_rf");
    }
};

// ---------------------------------------------------------------------------
// JSON schema

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

inline void read_point(const json& obj, const char* key, Point2& p, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw ConfigError(where + "." + key + " must be [x, y]");
    p = {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

inline FdbMethod parse_fdb_method(const std::string& s) {
    if (s == "svd") return FdbMethod::Svd;
    if (s == "ascent") return FdbMethod::Ascent;
    throw ConfigError("unknown fdb method '" + s + "' (expected svd or ascent)");
}

inline std::string fdb_method_name(FdbMethod m) { return m == FdbMethod::Svd ? "svd" : "ascent"; }

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
    using detail::read;
    ExperimentConfig c;
    detail::reject_unknown(j,
                           {"schema_version", "geometry", "channel", "p_max_dbm", "alpha_b", "admm", "power_split",
                            "nsjhb", "fdb_strategy_method", "strategies", "sweep", "trials", "base_seed",
                            "output_dir", "threads"},
                           "config");
    if (!j.contains("schema_version")) throw ConfigError("config: schema_version is required");
    read(j, "schema_version", c.schema_version, "config");
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("schema_version " + std::to_string(c.schema_version) + " is not supported");
    if (!j.contains("p_max_dbm")) throw ConfigError("config: p_max_dbm is required");
    read(j, "p_max_dbm", c.p_max_dbm, "config");

    if (auto it = j.find("geometry"); it != j.end()) {
        const json& g = *it;
        detail::reject_unknown(g, {"alice", "bob", "eve", "irs", "n_alice", "n_bob", "n_eve", "n_irs", "n_rf", "l_s", "l_z"},
                               "geometry");
        detail::read_point(g, "alice", c.geometry.pos_alice, "geometry");
        detail::read_point(g, "bob", c.geometry.pos_bob, "geometry");
        detail::read_point(g, "eve", c.geometry.pos_eve, "geometry");
        detail::read_point(g, "irs", c.geometry.pos_irs, "geometry");
        read(g, "n_alice", c.geometry.n_alice, "geometry");
        read(g, "n_bob", c.geometry.n_bob, "geometry");
        read(g, "n_eve", c.geometry.n_eve, "geometry");
        read(g, "n_irs", c.geometry.n_irs, "geometry");
        read(g, "n_rf", c.geometry.n_rf, "geometry");
        read(g, "l_s", c.geometry.l_s, "geometry");
        read(g, "l_z", c.geometry.l_z, "geometry");
    }
    if (auto it = j.find("channel"); it != j.end()) {
        const json& ch = *it;
        detail::reject_unknown(ch, {"n_paths", "rician_kappa", "pathloss_exp_direct", "pathloss_exp_reflected",
                                    "reference_gain", "noise_dbm"},
                               "channel");
        read(ch, "n_paths", c.channel.n_paths, "channel");
        read(ch, "rician_kappa", c.channel.rician_kappa, "channel");
        read(ch, "pathloss_exp_direct", c.channel.pathloss_exp_direct, "channel");
        read(ch, "pathloss_exp_reflected", c.channel.pathloss_exp_reflected, "channel");
        read(ch, "reference_gain", c.channel.reference_gain, "channel");
        read(ch, "noise_dbm", c.channel.noise_dbm, "channel");
    }
    if (auto it = j.find("alpha_b"); it != j.end()) {
        if (it->is_string()) {
            if (it->get<std::string>() != "sigma2") throw ConfigError("alpha_b must be \"sigma2\" or a number");
            c.alpha_b = {true, 0.0};
        } else if (it->is_number()) {
            c.alpha_b = {false, it->get<double>()};
        } else {
            throw ConfigError("alpha_b must be \"sigma2\" or a number");
        }
    }
    if (auto it = j.find("admm"); it != j.end()) {
        const json& a = *it;
        detail::reject_unknown(a, {"rho1", "rho2", "l_y", "eps1", "max_iter", "normalize", "target_energy", "init",
                                   "dual_init_scale"},
                               "admm");
        read(a, "rho1", c.admm.rho1, "admm");
        read(a, "rho2", c.admm.rho2, "admm");
        read(a, "l_y", c.admm.l_y, "admm");
        read(a, "eps1", c.admm.eps1, "admm");
        read(a, "max_iter", c.admm.max_iter, "admm");
        read(a, "normalize", c.admm.normalize, "admm");
        read(a, "target_energy", c.admm.target_energy, "admm");
        read(a, "dual_init_scale", c.admm.dual_init_scale, "admm");
        std::string init = c.admm.init == AdmmInit::Random ? "random" : "consensus";
        read(a, "init", init, "admm");
        if (init == "random")
            c.admm.init = AdmmInit::Random;
        else if (init == "consensus")
            c.admm.init = AdmmInit::Consensus;
        else
            throw ConfigError("admm.init must be random or consensus");
    }
    if (auto it = j.find("power_split"); it != j.end()) {
        detail::reject_unknown(*it, {"beta_an"}, "power_split");
        read(*it, "beta_an", c.split.beta_an, "power_split");
    }
    if (auto it = j.find("nsjhb"); it != j.end()) {
        const json& n = *it;
        detail::reject_unknown(n, {"dictionary_size", "hint_aods", "fdb_method", "reassign_unused"}, "nsjhb");
        read(n, "dictionary_size", c.nsjhb.dictionary_size, "nsjhb");
        read(n, "hint_aods", c.nsjhb.hint_aods, "nsjhb");
        read(n, "reassign_unused", c.nsjhb.reassign_unused, "nsjhb");
        std::string m = detail::fdb_method_name(c.nsjhb.fdb_method);
        read(n, "fdb_method", m, "nsjhb");
        c.nsjhb.fdb_method = detail::parse_fdb_method(m);
    }
    if (auto it = j.find("fdb_strategy_method"); it != j.end()) {
        if (!it->is_string()) throw ConfigError("fdb_strategy_method must be a string");
        c.fdb_strategy_method = detail::parse_fdb_method(it->get<std::string>());
    }
    if (auto it = j.find("strategies"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("strategies must be an array of names");
        c.strategies.clear();
        for (const auto& s : *it) {
            if (!s.is_string()) throw ConfigError("strategies must be an array of names");
            c.strategies.push_back(parse_strategy(s.get<std::string>()));
        }
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        detail::reject_unknown(*it, {"var", "values"}, "sweep");
        std::string var = sweep_var_name(c.sweep_var);
        read(*it, "var", var, "sweep");
        c.sweep_var = parse_sweep_var(var);
        read(*it, "values", c.sweep_values, "sweep");
    }
    read(j, "trials", c.trials, "config");
    read(j, "base_seed", c.base_seed, "config");
    read(j, "output_dir", c.output_dir, "config");
    read(j, "threads", c.threads, "config");
    c.validate();
    return c;
}

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    const auto& g = c.geometry;
    j["geometry"] = {{"alice", {g.pos_alice.x, g.pos_alice.y}},
                     {"bob", {g.pos_bob.x, g.pos_bob.y}},
                     {"eve", {g.pos_eve.x, g.pos_eve.y}},
                     {"irs", {g.pos_irs.x, g.pos_irs.y}},
                     {"n_alice", g.n_alice},
                     {"n_bob", g.n_bob},
                     {"n_eve", g.n_eve},
                     {"n_irs", g.n_irs},
                     {"n_rf", g.n_rf},
                     {"l_s", g.l_s},
                     {"l_z", g.l_z}};
    const auto& ch = c.channel;
    j["channel"] = {{"n_paths", ch.n_paths},
                    {"rician_kappa", ch.rician_kappa},
                    {"pathloss_exp_direct", ch.pathloss_exp_direct},
                    {"pathloss_exp_reflected", ch.pathloss_exp_reflected},
                    {"reference_gain", ch.reference_gain},
                    {"noise_dbm", ch.noise_dbm}};
    j["p_max_dbm"] = c.p_max_dbm;
    if (c.alpha_b.use_noise_power)
        j["alpha_b"] = "sigma2";
    else
        j["alpha_b"] = c.alpha_b.value;
    const auto& a = c.admm;
    j["admm"] = {{"rho1", a.rho1},
                 {"rho2", a.rho2},
                 {"l_y", a.l_y},
                 {"eps1", a.eps1},
                 {"max_iter", a.max_iter},
                 {"normalize", a.normalize},
                 {"target_energy", a.target_energy},
                 {"init", a.init == AdmmInit::Random ? "random" : "consensus"},
                 {"dual_init_scale", a.dual_init_scale}};
    j["power_split"] = {{"beta_an", c.split.beta_an}};
    j["nsjhb"] = {{"dictionary_size", c.nsjhb.dictionary_size},
                  {"hint_aods", c.nsjhb.hint_aods},
                  {"fdb_method", detail::fdb_method_name(c.nsjhb.fdb_method)},
                  {"reassign_unused", c.nsjhb.reassign_unused}};
    j["fdb_strategy_method"] = detail::fdb_method_name(c.fdb_strategy_method);
    j["strategies"] = json::array();
    for (Strategy s : c.strategies) j["strategies"].push_back(strategy_name(s));
    j["sweep"] = {{"var", sweep_var_name(c.sweep_var)}, {"values", c.sweep_values}};
    j["trials"] = c.trials;
    j["base_seed"] = c.base_seed;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Seeds

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Channel seed of a trial; shared by every strategy and sweep value.
inline std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
    return splitmix64(base_seed + static_cast<std::uint64_t>(trial));
}

inline std::uint64_t admm_seed(std::uint64_t trial_seed) { return splitmix64(trial_seed ^ 0x41444d4dULL); }
inline std::uint64_t phase_seed(std::uint64_t trial_seed) { return splitmix64(trial_seed ^ 0x52414e44ULL); }

// ---------------------------------------------------------------------------
// Strategies

struct StrategyOutcome {
    double secrecy_rate = 0.0;
    int admm_iters = 0;
    bool converged = true;
    PhaseVector phases;
};

inline NsjhbConfig nsjhb_config(const ExperimentConfig& cfg, const SystemGeometry& geo) {
    NsjhbConfig n = cfg.nsjhb;
    n.n_rf = geo.n_rf;
    n.l_s = geo.l_s;
    n.l_z = geo.l_z;
    return n;
}

inline PhaseVector random_phases(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    RVec t(n);
    for (Eigen::Index i = 0; i < n; ++i) t(i) = u(rng);
    return PhaseVector::from_angles(t);
}

/// Runs one strategy on one channel realisation. `seed` is the trial seed.
inline StrategyOutcome run_strategy(Strategy s, const ChannelSet& set, const ExperimentConfig& cfg,
                                    const SystemGeometry& geo, std::uint64_t seed) {
    const double p_max = cfg.p_max_watts();
    const NsjhbConfig ncfg = nsjhb_config(cfg, geo);
    StrategyOutcome out;
    switch (s) {
        case Strategy::ProposedHb:
        case Strategy::Fdb: {
            const AdmmResult r = run_ca_admm(set, cfg.admm, cfg.alpha_b.resolve(set), admm_seed(seed));
            out.admm_iters = r.iterations;
            out.converged = r.converged;
            out.phases = r.phases;
            if (s == Strategy::ProposedHb) {
                out.secrecy_rate = run_nsjhb(set, r.phases, p_max, cfg.split, ncfg).secrecy_rate;
            } else {
                const FdbSolution f =
                    solve_fdb(set, r.phases, p_max, cfg.split, cfg.fdb_strategy_method, geo.l_s, geo.l_z);
                const auto na = set.n_alice();
                const HybridBeamformer bf{CMat::Identity(na, na), f.w_tilde_s, f.w_tilde_z, p_max, true};
                out.secrecy_rate = secrecy_capacity(set, r.phases, bf);
            }
            break;
        }
        case Strategy::RandomIrs:
            out.phases = random_phases(set.n_irs(), phase_seed(seed));
            out.secrecy_rate = run_nsjhb(set, out.phases, p_max, cfg.split, ncfg).secrecy_rate;
            break;
        case Strategy::NoIrs:
            out.phases = PhaseVector::zeros(set.n_irs());
            out.secrecy_rate = run_nsjhb(without_irs(set), out.phases, p_max, cfg.split, ncfg).secrecy_rate;
            break;
    }
    return out;
}

inline StrategyOutcome run_strategy(const std::string& name, const ChannelSet& set, const ExperimentConfig& cfg,
                                    std::uint64_t seed) {
    return run_strategy(parse_strategy(name), set, cfg, cfg.geometry, seed);
}

// ---------------------------------------------------------------------------
// Sweeps

struct ResultRow {
    std::string var;
    int value = 0;
    std::string strategy;
    int trial = 0;
    std::uint64_t seed = 0;
    double secrecy_rate = 0.0;
    int admm_iters = 0;
    bool converged = false;
    double ms = 0.0;
    std::string error;  // not persisted; set when the trial threw
};

inline const char* kResultsHeader = "var,value,strategy,trial,seed,secrecy_rate,admm_iters,converged,ms";

inline std::string results_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << kResultsHeader << '\n';
    char ms[32];
    for (const auto& r : rows) {
        std::snprintf(ms, sizeof ms, "%.3f", r.ms);
        os << r.var << ',' << r.value << ',' << r.strategy << ',' << r.trial << ',' << r.seed << ','
           << io::format_double(r.secrecy_rate) << ',' << r.admm_iters << ',' << (r.converged ? 1 : 0) << ',' << ms
           << '\n';
    }
    return os.str();
}

namespace detail {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Runs every (value, trial, strategy) cell. Rows come back ordered by value,
/// then strategy (config order), then trial.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const int nv = static_cast<int>(cfg.sweep_values.size());
    const int ns = static_cast<int>(cfg.strategies.size());
    std::vector<ResultRow> rows(static_cast<std::size_t>(nv * ns * cfg.trials));
    auto slot = [&](int v, int s, int t) -> ResultRow& {
        return rows[static_cast<std::size_t>((v * ns + s) * cfg.trials + t)];
    };
    detail::parallel_for(nv * cfg.trials, cfg.threads, [&](int job) {
        const int v = job / cfg.trials, t = job % cfg.trials;
        const int value = cfg.sweep_values[static_cast<std::size_t>(v)];
        const SystemGeometry geo = cfg.geometry_at(value);
        const std::uint64_t seed = trial_seed(cfg.base_seed, t);
        ChannelSet set;
        std::string gen_error;
        try {
            set = generate_channel_set(geo, cfg.channel, seed);
        } catch (const std::exception& e) {
            gen_error = e.what();
        }
        for (int s = 0; s < ns; ++s) {
            ResultRow& row = slot(v, s, t);
            row.var = sweep_var_name(cfg.sweep_var);
            row.value = value;
            row.strategy = strategy_name(cfg.strategies[static_cast<std::size_t>(s)]);
            row.trial = t;
            row.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            if (!gen_error.empty()) {
                row.error = gen_error;
            } else {
                try {
                    const StrategyOutcome o = run_strategy(cfg.strategies[static_cast<std::size_t>(s)], set, cfg, geo, seed);
                    if (!std::isfinite(o.secrecy_rate) || o.secrecy_rate < 0.0)
                        throw SolverError("secrecy rate not finite", 0.0);
                    row.secrecy_rate = o.secrecy_rate;
                    row.admm_iters = o.admm_iters;
                    row.converged = o.converged;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
            }
            if (!row.error.empty()) {
                row.secrecy_rate = 0.0;
                row.converged = false;
            }
            row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
    });
    return rows;
}

/// run_sweep plus an atomic write of <output_dir>/results.csv. Returns the rows.
inline std::vector<ResultRow> sweep(const ExperimentConfig& cfg) {
    auto rows = run_sweep(cfg);
    io::atomic_write(std::filesystem::path(cfg.output_dir) / "results.csv", results_csv(rows));
    return rows;
}

/// Mean secrecy rate of one (strategy, value) cell over its trials.
inline double mean_rate(const std::vector<ResultRow>& rows, const std::string& strategy, int value) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows)
        if (r.strategy == strategy && r.value == value) {
            sum += r.secrecy_rate;
            ++n;
        }
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Convergence runs

struct ConvergenceSetting {
    double l_y = 8.0;
    double rho1 = 16.0;
    double rho2 = 16.0;

    std::string label() const {
        auto f = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            std::string s = buf;
            std::replace(s.begin(), s.end(), '.', 'p');
            return s;
        };
        return "ly" + f(l_y) + "_rho1-" + f(rho1) + "_rho2-" + f(rho2);
    }
};

/// Parses "L_y:rho1:rho2".
inline ConvergenceSetting parse_setting(const std::string& text) {
    ConvergenceSetting s;
    std::stringstream ss(text);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c, ':') ||
        std::getline(ss, extra, ':'))
        throw ConfigError("grid entry '" + text + "' must be L_y:rho1:rho2");
    try {
        s.l_y = std::stod(a);
        s.rho1 = std::stod(b);
        s.rho2 = std::stod(c);
    } catch (const std::exception&) {
        throw ConfigError("grid entry '" + text + "' must be L_y:rho1:rho2");
    }
    if (!(s.l_y > 0.0) || !(s.rho1 > 0.0) || !(s.rho2 > 0.0))
        throw ConfigError("grid entry '" + text + "' must be positive");
    return s;
}

struct ConvergenceSummary {
    ConvergenceSetting setting;
    int iterations = 0;
    bool converged = false;
    double final_objective = 0.0;
    ConvergenceTrace trace;
};

/// One fixed channel draw (trial 0 of base_seed) and one fixed start per setting.
inline std::vector<ConvergenceSummary> run_convergence(const ExperimentConfig& cfg,
                                                       const std::vector<ConvergenceSetting>& grid) {
    cfg.validate();
    if (grid.empty()) throw ConfigError("convergence grid must be nonempty");
    const std::uint64_t seed = trial_seed(cfg.base_seed, 0);
    const ChannelSet set = generate_channel_set(cfg.geometry, cfg.channel, seed);
    const double alpha = cfg.alpha_b.resolve(set);
    std::vector<ConvergenceSummary> out(grid.size());
    detail::parallel_for(static_cast<int>(grid.size()), cfg.threads, [&](int i) {
        AdmmParams p = cfg.admm;
        p.l_y = grid[static_cast<std::size_t>(i)].l_y;
        p.rho1 = grid[static_cast<std::size_t>(i)].rho1;
        p.rho2 = grid[static_cast<std::size_t>(i)].rho2;
        AdmmResult r = run_ca_admm(set, p, alpha, admm_seed(seed));
        ConvergenceSummary& s = out[static_cast<std::size_t>(i)];
        s.setting = grid[static_cast<std::size_t>(i)];
        s.iterations = r.iterations;
        s.converged = r.converged;
        s.final_objective = r.objective;
        s.trace = std::move(r.trace);
    });
    return out;
}

inline const char* kSummaryHeader = "setting,l_y,rho1,rho2,iterations,converged,final_objective";

inline std::string convergence_summary_csv(const std::vector<ConvergenceSummary>& runs) {
    std::ostringstream os;
    os << kSummaryHeader << '\n';
    for (const auto& r : runs)
        os << r.setting.label() << ',' << io::format_double(r.setting.l_y) << ',' << io::format_double(r.setting.rho1)
           << ',' << io::format_double(r.setting.rho2) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
           << io::format_double(r.final_objective) << '\n';
    return os.str();
}

/// run_convergence plus trace_<setting>.csv files and convergence_summary.csv.
inline std::vector<ConvergenceSummary> convergence_run(const ExperimentConfig& cfg,
                                                       const std::vector<ConvergenceSetting>& grid) {
    auto runs = run_convergence(cfg, grid);
    const std::filesystem::path dir(cfg.output_dir);
    for (const auto& r : runs) {
        std::ostringstream os;
        io::write_trace_csv(os, r.trace);
        io::atomic_write(dir / ("trace_" + r.setting.label() + ".csv"), os.str());
    }
    io::atomic_write(dir / "convergence_summary.csv", convergence_summary_csv(runs));
    return runs;
}

}  // namespace irsbf::harness

#endif  // IRSBF_HARNESS_HPP
