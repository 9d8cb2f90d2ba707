#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wpt/channel.hpp"
#include "wpt/harvester.hpp"
#include "wpt/oracle.hpp"
#include "wpt/qp.hpp"
#include "wpt/rng.hpp"
#include "wpt/solvers.hpp"
#include "wpt/waveform.hpp"

namespace wpt::bench {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scenario {
    alloc_single_realization,
    sweep_power,
    flat_channel,
    miso_sweep,
    swipt_power,
    swipt_psat,
    swipt_distance,
    curvefit_compare,
};

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
    static const std::vector<std::pair<Scenario, std::string>> names = {
        {Scenario::alloc_single_realization, "alloc_single_realization"},
        {Scenario::sweep_power, "sweep_power"},
        {Scenario::flat_channel, "flat_channel"},
        {Scenario::miso_sweep, "miso_sweep"},
        {Scenario::swipt_power, "swipt_power"},
        {Scenario::swipt_psat, "swipt_psat"},
        {Scenario::swipt_distance, "swipt_distance"},
        {Scenario::curvefit_compare, "curvefit_compare"},
    };
    return names;
}

inline std::string to_string(Scenario s) {
    for (const auto& [tag, name] : scenario_names())
        if (tag == s) return name;
    throw std::logic_error("unknown scenario tag");
}

inline Scenario scenario_from_string(const std::string& name) {
    for (const auto& [tag, n] : scenario_names())
        if (n == name) return tag;
    throw ConfigError("unknown scenario '" + name + "'");
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct ModelConfig {
    std::string type = "diode";  // diode | poly2 | poly2_fit
    harvester::DiodeParams diode{5e-6, 25.86e-3, 1.05, 50.0};
    harvester::Poly2 poly2{0.0, 1.0, 0.0};
    std::string data_csv;  // poly2_fit source
};

struct ScenarioConfig {
    Scenario scenario = Scenario::sweep_power;
    int n_tones = 8;
    std::vector<int> m_antennas = {1};
    std::vector<double> p_eh_grid_w;  // P * L_P, the power available at the harvester
    double d_h_wavelengths = 8.0;
    double d_g_wavelengths = 7.0;
    double kappa_db = 3.0;
    double p_sat_dbm = -15.0;
    std::vector<double> p_sat_dbm_grid = {-25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 40.0};
    std::vector<double> d_g_grid_wavelengths = {6.0, 7.0, 8.0, 10.0};
    double f0_hz = 2.4e9;
    double delta_f_hz = 1.25e6;
    // gain variance of the flat_channel scenario; 0.0025 (std 0.05 around the
    // unit mean) keeps the channel flat enough that spreading power beats the
    // single-sine strategy over the default power grid
    double flat_sigma = 0.0025;
    int realizations = 500;
    std::uint64_t seed = 1;
    std::vector<std::string> strategies;  // filled per scenario when empty
    ModelConfig model;
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                         const std::string& where) {
    for (const auto& item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() +
                              "'");
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for key '" + key + "'");
    }
}

inline bool valid_strategy(const std::string& tag) {
    static const std::vector<std::string> base = {"bb", "milp", "oracle", "equal", "mrt", "single"};
    std::string t = tag;
    if (t.size() > 6 && t.substr(t.size() - 6) == "_swipt") t = t.substr(0, t.size() - 6);
    return std::find(base.begin(), base.end(), t) != base.end();
}

}  // namespace detail

inline ScenarioConfig load_config(const nlohmann::json& j) {
    detail::require_keys(
        j,
        {"scenario", "n_tones", "m_antennas", "p_eh_grid_w", "d_h_wavelengths", "d_g_wavelengths",
         "kappa_db", "p_sat_dbm", "p_sat_dbm_grid", "d_g_grid_wavelengths", "f0_hz", "delta_f_hz",
         "flat_sigma", "realizations", "seed", "strategies", "model"},
        "");
    ScenarioConfig c;
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    c.n_tones = detail::get_or(j, "n_tones", c.n_tones);
    c.m_antennas = detail::get_or(j, "m_antennas", c.m_antennas);
    c.p_eh_grid_w = detail::get_or(j, "p_eh_grid_w", c.p_eh_grid_w);
    c.d_h_wavelengths = detail::get_or(j, "d_h_wavelengths", c.d_h_wavelengths);
    c.d_g_wavelengths = detail::get_or(j, "d_g_wavelengths", c.d_g_wavelengths);
    c.kappa_db = detail::get_or(j, "kappa_db", c.kappa_db);
    c.p_sat_dbm = detail::get_or(j, "p_sat_dbm", c.p_sat_dbm);
    c.p_sat_dbm_grid = detail::get_or(j, "p_sat_dbm_grid", c.p_sat_dbm_grid);
    c.d_g_grid_wavelengths = detail::get_or(j, "d_g_grid_wavelengths", c.d_g_grid_wavelengths);
    c.f0_hz = detail::get_or(j, "f0_hz", c.f0_hz);
    c.delta_f_hz = detail::get_or(j, "delta_f_hz", c.delta_f_hz);
    c.flat_sigma = detail::get_or(j, "flat_sigma", c.flat_sigma);
    c.realizations = detail::get_or(j, "realizations", c.realizations);
    c.seed = detail::get_or(j, "seed", c.seed);
    c.strategies = detail::get_or(j, "strategies", c.strategies);
    if (j.contains("model")) {
        const auto& m = j.at("model");
        detail::require_keys(
            m, {"type", "i_s_a", "v_t_v", "ideality", "r_ant_ohm", "beta1", "beta2", "beta3",
                "data_csv"},
            "model");
        c.model.type = detail::get_or(m, "type", c.model.type);
        c.model.diode.i_s = detail::get_or(m, "i_s_a", c.model.diode.i_s);
        c.model.diode.v_t = detail::get_or(m, "v_t_v", c.model.diode.v_t);
        c.model.diode.gamma = detail::get_or(m, "ideality", c.model.diode.gamma);
        c.model.diode.r_ant = detail::get_or(m, "r_ant_ohm", c.model.diode.r_ant);
        c.model.poly2.beta1 = detail::get_or(m, "beta1", c.model.poly2.beta1);
        c.model.poly2.beta2 = detail::get_or(m, "beta2", c.model.poly2.beta2);
        c.model.poly2.beta3 = detail::get_or(m, "beta3", c.model.poly2.beta3);
        c.model.data_csv = detail::get_or(m, "data_csv", c.model.data_csv);
        if (c.model.type != "diode" && c.model.type != "poly2" && c.model.type != "poly2_fit")
            throw ConfigError("bad value for key 'model.type'");
    }

    // scenario-dependent defaults
    if (c.p_eh_grid_w.empty()) {
        switch (c.scenario) {
            case Scenario::alloc_single_realization:
            case Scenario::curvefit_compare:
                c.p_eh_grid_w = {5e-5};
                break;
            case Scenario::swipt_psat:
            case Scenario::swipt_distance:
                c.p_eh_grid_w = {1e-4};
                break;
            default:
                c.p_eh_grid_w = {1e-5, 2e-5, 5e-5, 1e-4};
                break;
        }
    }
    if (c.strategies.empty()) {
        switch (c.scenario) {
            case Scenario::alloc_single_realization:
            case Scenario::sweep_power:
            case Scenario::flat_channel:
                c.strategies = {"bb", "milp", "equal", "mrt", "single"};
                break;
            default:
                c.strategies = {"bb"};
                break;
        }
    }

    if (c.n_tones < 1) throw ConfigError("bad value for key 'n_tones'");
    if (c.realizations < 1) throw ConfigError("bad value for key 'realizations'");
    if (c.m_antennas.empty()) throw ConfigError("bad value for key 'm_antennas'");
    for (int m : c.m_antennas)
        if (m < 1) throw ConfigError("bad value for key 'm_antennas'");
    for (double p : c.p_eh_grid_w)
        if (!(p > 0.0)) throw ConfigError("bad value for key 'p_eh_grid_w'");
    if (!(c.d_h_wavelengths > 0.0)) throw ConfigError("bad value for key 'd_h_wavelengths'");
    if (!(c.d_g_wavelengths > 0.0)) throw ConfigError("bad value for key 'd_g_wavelengths'");
    if (c.kappa_db < 0.0 && !(db_to_linear(c.kappa_db) >= 0.0))
        throw ConfigError("bad value for key 'kappa_db'");
    if (c.p_sat_dbm_grid.empty()) throw ConfigError("bad value for key 'p_sat_dbm_grid'");
    if (c.d_g_grid_wavelengths.empty())
        throw ConfigError("bad value for key 'd_g_grid_wavelengths'");
    for (double d : c.d_g_grid_wavelengths)
        if (!(d > 0.0)) throw ConfigError("bad value for key 'd_g_grid_wavelengths'");
    if (!(c.f0_hz > 0.0)) throw ConfigError("bad value for key 'f0_hz'");
    if (!(c.delta_f_hz > 0.0)) throw ConfigError("bad value for key 'delta_f_hz'");
    if (c.flat_sigma < 0.0) throw ConfigError("bad value for key 'flat_sigma'");
    if (c.strategies.empty()) throw ConfigError("bad value for key 'strategies'");
    for (const auto& s : c.strategies)
        if (!detail::valid_strategy(s)) throw ConfigError("unknown strategy '" + s + "'");
    return c;
}

inline ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    return load_config(j);
}

struct SweepRow {
    double p_eh_w;
    std::string strategy;
    double mean = 0.0;
    double stderr_mean = 0.0;
    long realizations = 0;
};

struct AllocRow {
    int tone;  // 1-based
    double h_norm;
    double g_norm;
    std::string strategy;
    double x_over_2p;
};

struct SweepResult {
    Scenario scenario = Scenario::sweep_power;
    std::vector<SweepRow> sweep;
    std::vector<AllocRow> alloc;
    long flagged = 0;
};

namespace detail {

inline std::string fmt_g(double v) {
    char b[48];
    std::snprintf(b, sizeof b, "%.12g", v);
    return b;
}

inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

// mean and standard error over the non-NaN entries; order-independent
struct Aggregate {
    double mean = 0.0, stderr_mean = 0.0;
    long count = 0;
};

inline Aggregate aggregate(const std::vector<double>& raw) {
    std::vector<double> v;
    v.reserve(raw.size());
    for (double x : raw)
        if (!std::isnan(x)) v.push_back(x);
    Aggregate a;
    a.count = static_cast<long>(v.size());
    if (v.empty()) return a;
    a.mean = pairwise_sum(v, 0, v.size()) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> dev(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double d = v[i] - a.mean;
            dev[i] = d * d;
        }
        const double var =
            pairwise_sum(dev, 0, dev.size()) / static_cast<double>(dev.size() - 1);
        a.stderr_mean = std::sqrt(var / static_cast<double>(dev.size()));
    }
    return a;
}

inline void parallel_for(int count, const std::function<void(int)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(count)));
    if (n_threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += n_threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

// One realization's links, drawn at unit path loss so a realization can be
// shared across grid points that only rescale the loss.
struct UnitDraws {
    Eigen::MatrixXcd H;  // n_tones x m_max
    Eigen::MatrixXcd G;  // n_tones x 1
};

inline UnitDraws draw_unit(const ScenarioConfig& cfg, int realization, int m_max) {
    const double kappa = db_to_linear(cfg.kappa_db);
    UnitDraws d;
    Rng h_rng(stream_seed(cfg.seed, 2 * static_cast<std::uint64_t>(realization)));
    Rng g_rng(stream_seed(cfg.seed, 2 * static_cast<std::uint64_t>(realization) + 1));
    if (cfg.scenario == Scenario::flat_channel) {
        d.H = channel::flat_draw(cfg.n_tones, cfg.flat_sigma, h_rng).H;
    } else {
        d.H = channel::rician_matrix({kappa, 0, cfg.n_tones, m_max}, 1.0, h_rng);
    }
    d.G = channel::rician_matrix({kappa, 0, cfg.n_tones, 1}, 1.0, g_rng);
    return d;
}

inline harvester::ObjectiveCoeffs diode_coeffs(const ModelConfig& m) {
    return harvester::model_coeffs(harvester::diode_taylor(m.diode));
}

inline harvester::ObjectiveCoeffs scenario_coeffs(const ModelConfig& m) {
    if (m.type == "diode") return diode_coeffs(m);
    if (m.type == "poly2") return harvester::model_coeffs(m.poly2);
    const auto samples = harvester::read_samples_csv_file(m.data_csv);
    return harvester::model_coeffs(harvester::fit_poly2(samples));
}

// Quadratic fitted to the diode's single-tone response over a low-power
// window; stands in for a measured rectifier curve when no sample file is
// configured.
inline harvester::Poly2 fitted_poly2_from_diode(const ModelConfig& m, double p_max_w) {
    const harvester::HarvesterModel diode = harvester::diode_taylor(m.diode);
    std::vector<std::pair<double, double>> samples;
    const int n_pts = 41;
    for (int i = 0; i < n_pts; ++i) {
        const double p = p_max_w * static_cast<double>(i) / (n_pts - 1);
        samples.emplace_back(p, harvester::eval_model(diode, p));
    }
    return harvester::fit_poly2(samples);
}

struct StrategyRun {
    bool ok = false;
    double objective = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x;
};

inline StrategyRun run_strategy(const std::string& base_tag, const qp::QpProblem& prob) {
    StrategyRun r;
    try {
        if (base_tag == "bb" || base_tag == "milp" || base_tag == "oracle") {
            const Solution sol = base_tag == "bb"       ? solvers::solve_bb(prob)
                                 : base_tag == "milp"   ? solvers::solve_milp_kkt(prob)
                                                        : qp::enumerate_kkt_oracle(prob);
            r.ok = true;
            r.objective = sol.objective;
            r.x = sol.x;
        } else {
            const solvers::Baseline kind = base_tag == "equal" ? solvers::Baseline::equal
                                           : base_tag == "mrt" ? solvers::Baseline::mrt
                                                               : solvers::Baseline::single;
            const Eigen::VectorXd s = solvers::baseline_alloc(kind, prob.h_eff, prob.P);
            const solvers::AllocationEval ev = solvers::evaluate_allocation(s, prob);
            r.ok = ev.feasible;
            r.objective = ev.objective;
            r.x = s.array().square().matrix();
        }
    } catch (const std::exception&) {
        r.ok = false;
    }
    return r;
}

}  // namespace detail

// Runs a scenario: per grid point and realization, draw the channel from the
// realization's derived seed, build the allocation program, run the requested
// strategies and aggregate. Deterministic given (config, seed); realizations
// run in parallel and are aggregated in index order.
inline SweepResult run_scenario(const ScenarioConfig& cfg) {
    SweepResult result;
    result.scenario = cfg.scenario;

    const double L_h = (cfg.scenario == Scenario::flat_channel)
                           ? 1.0
                           : channel::path_loss(cfg.d_h_wavelengths);
    const double sqrt_Lh = std::sqrt(L_h);
    const int R = cfg.realizations;
    const int m_max = *std::max_element(cfg.m_antennas.begin(), cfg.m_antennas.end());

    const bool is_alloc = cfg.scenario == Scenario::alloc_single_realization ||
                          cfg.scenario == Scenario::curvefit_compare;

    // row definitions: (strategy tag for the CSV, base strategy, swipt row?, P_sat W,
    // d_g, coeffs override)
    struct RowDef {
        double p_eh_w;
        std::string tag;
        std::string base;
        bool swipt = false;
        double p_sat_w = 0.0;
        double d_g = 7.0;
        std::optional<harvester::ObjectiveCoeffs> coeffs;
    };
    std::vector<RowDef> rows;
    const double p_sat_w = dbm_to_watts(cfg.p_sat_dbm);

    auto split_swipt = [](const std::string& tag) -> std::pair<std::string, bool> {
        if (tag.size() > 6 && tag.substr(tag.size() - 6) == "_swipt")
            return {tag.substr(0, tag.size() - 6), true};
        return {tag, false};
    };

    switch (cfg.scenario) {
        case Scenario::sweep_power:
        case Scenario::flat_channel:
        case Scenario::alloc_single_realization:
            for (double p : cfg.p_eh_grid_w)
                for (const auto& s : cfg.strategies) {
                    const auto [base, swipt] = split_swipt(s);
                    rows.push_back(
                        {p, s, base, swipt, p_sat_w, cfg.d_g_wavelengths, std::nullopt});
                }
            break;
        case Scenario::miso_sweep:
            for (double p : cfg.p_eh_grid_w)
                for (const auto& s : cfg.strategies)
                    for (int m : cfg.m_antennas) {
                        const auto [base, swipt] = split_swipt(s);
                        RowDef rd{p, s + "_m" + std::to_string(m), base, swipt, p_sat_w,
                                  cfg.d_g_wavelengths, std::nullopt};
                        rows.push_back(rd);
                    }
            break;
        case Scenario::swipt_power:
            for (double p : cfg.p_eh_grid_w)
                for (const auto& s : cfg.strategies) {
                    rows.push_back({p, s, s, false, p_sat_w, cfg.d_g_wavelengths, std::nullopt});
                    rows.push_back({p, s + "_swipt", s, true, p_sat_w, cfg.d_g_wavelengths,
                                    std::nullopt});
                }
            break;
        case Scenario::swipt_psat:
            for (const auto& s : cfg.strategies) {
                for (double dbm : cfg.p_sat_dbm_grid)
                    rows.push_back({cfg.p_eh_grid_w.front(),
                                    s + "_psat" + detail::fmt_g(dbm) + "dbm", s, true,
                                    dbm_to_watts(dbm), cfg.d_g_wavelengths, std::nullopt});
                rows.push_back({cfg.p_eh_grid_w.front(), s + "_unconstrained", s, false, p_sat_w,
                                cfg.d_g_wavelengths, std::nullopt});
            }
            break;
        case Scenario::swipt_distance:
            for (const auto& s : cfg.strategies) {
                for (double dg : cfg.d_g_grid_wavelengths)
                    rows.push_back({cfg.p_eh_grid_w.front(), s + "_dg" + detail::fmt_g(dg), s,
                                    true, p_sat_w, dg, std::nullopt});
                rows.push_back({cfg.p_eh_grid_w.front(), s + "_unconstrained", s, false, p_sat_w,
                                cfg.d_g_wavelengths, std::nullopt});
            }
            break;
        case Scenario::curvefit_compare: {
            const double p = cfg.p_eh_grid_w.front();
            const harvester::ObjectiveCoeffs diode = detail::diode_coeffs(cfg.model);
            harvester::Poly2 poly2;
            if (cfg.model.type == "poly2")
                poly2 = cfg.model.poly2;
            else if (cfg.model.type == "poly2_fit")
                poly2 = harvester::fit_poly2(harvester::read_samples_csv_file(cfg.model.data_csv));
            else
                poly2 = detail::fitted_poly2_from_diode(cfg.model, 4.0 * p);
            for (const auto& s : cfg.strategies) {
                rows.push_back({p, s + "_diode", s, false, p_sat_w, cfg.d_g_wavelengths, diode});
                rows.push_back({p, s + "_poly2", s, false, p_sat_w, cfg.d_g_wavelengths,
                                harvester::model_coeffs(poly2)});
            }
            break;
        }
    }

    const harvester::ObjectiveCoeffs default_coeffs = detail::scenario_coeffs(cfg.model);
    const int n_rows = static_cast<int>(rows.size());
    const int n_real = is_alloc ? 1 : R;

    // values[row][realization]; NaN marks a failed or infeasible run
    std::vector<std::vector<double>> values(static_cast<std::size_t>(n_rows));
    for (auto& v : values)
        v.assign(static_cast<std::size_t>(n_real), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::vector<Eigen::VectorXd>> alloc_x;
    if (is_alloc)
        alloc_x.assign(static_cast<std::size_t>(n_rows), std::vector<Eigen::VectorXd>(1));
    std::vector<Eigen::VectorXd> h_eff_first(1), g_eff_first(1);

    detail::parallel_for(n_real, [&](int r) {
        const detail::UnitDraws draws = detail::draw_unit(cfg, r, m_max);
        for (int row = 0; row < n_rows; ++row) {
            const RowDef& rd = rows[static_cast<std::size_t>(row)];
            int m_use = m_max;
            if (cfg.scenario == Scenario::miso_sweep) {
                // tag suffix decides the antenna count
                const auto pos = rd.tag.rfind("_m");
                m_use = std::stoi(rd.tag.substr(pos + 2));
            }
            Eigen::VectorXd h_eff =
                sqrt_Lh * waveform::effective_channels(draws.H.leftCols(m_use));
            const double L_g = channel::path_loss(rd.d_g);
            Eigen::VectorXd g_eff =
                std::sqrt(L_g) * waveform::effective_channels(draws.G);
            if (is_alloc && row == 0) {
                h_eff_first[0] = h_eff;
                g_eff_first[0] = g_eff;
            }

            // drop zero-gain tones (possible only for the clamped flat draw)
            std::vector<int> keep;
            for (int i = 0; i < cfg.n_tones; ++i)
                if (h_eff[i] > 0.0) keep.push_back(i);
            if (keep.empty()) continue;  // flagged by the NaN left behind
            Eigen::VectorXd h_red(static_cast<Eigen::Index>(keep.size()));
            Eigen::VectorXd g_red(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i) {
                h_red[static_cast<Eigen::Index>(i)] = h_eff[keep[i]];
                g_red[static_cast<Eigen::Index>(i)] = g_eff[keep[i]];
            }

            const double P = rd.p_eh_w / L_h;
            std::optional<std::pair<Eigen::VectorXd, double>> swipt;
            if (rd.swipt) swipt = {g_red, rd.p_sat_w};
            qp::QpProblem prob;
            try {
                prob = qp::build_qp(h_red, rd.coeffs ? *rd.coeffs : default_coeffs, P, swipt);
            } catch (const std::exception&) {
                continue;
            }
            const detail::StrategyRun run = detail::run_strategy(rd.base, prob);
            if (!run.ok) continue;
            values[static_cast<std::size_t>(row)][static_cast<std::size_t>(r)] = run.objective;
            if (is_alloc) {
                Eigen::VectorXd full = Eigen::VectorXd::Zero(cfg.n_tones);
                for (std::size_t i = 0; i < keep.size(); ++i)
                    full[keep[i]] = run.x[static_cast<Eigen::Index>(i)];
                alloc_x[static_cast<std::size_t>(row)][0] = full;
            }
        }
    });

    for (int row = 0; row < n_rows; ++row) {
        const detail::Aggregate a = detail::aggregate(values[static_cast<std::size_t>(row)]);
        result.flagged += n_real - a.count;
        result.sweep.push_back({rows[static_cast<std::size_t>(row)].p_eh_w,
                                rows[static_cast<std::size_t>(row)].tag, a.mean, a.stderr_mean,
                                a.count});
    }

    if (is_alloc) {
        const double h_max = h_eff_first[0].maxCoeff();
        for (int row = 0; row < n_rows; ++row) {
            const RowDef& rd = rows[static_cast<std::size_t>(row)];
            const Eigen::VectorXd& x = alloc_x[static_cast<std::size_t>(row)][0];
            if (x.size() == 0) continue;  // flagged
            const double two_p = 2.0 * rd.p_eh_w / L_h;
            for (int i = 0; i < cfg.n_tones; ++i)
                result.alloc.push_back({i + 1, h_eff_first[0][i] / h_max,
                                        g_eff_first[0][i] / h_max, rd.tag, x[i] / two_p});
        }
    }
    return result;
}

inline std::string sweep_csv(const SweepResult& r) {
    std::string out = "p_eh_w,strategy,mean_objective,stderr,realizations\n";
    for (const auto& row : r.sweep) {
        out += detail::fmt_g(row.p_eh_w);
        out += ',';
        out += row.strategy;
        out += ',';
        out += detail::fmt_g(row.mean);
        out += ',';
        out += detail::fmt_g(row.stderr_mean);
        out += ',';
        out += std::to_string(row.realizations);
        out += '\n';
    }
    return out;
}

inline std::string alloc_csv(const SweepResult& r) {
    std::string out = "tone,h_norm,g_norm,strategy,x_over_2p\n";
    for (const auto& row : r.alloc) {
        out += std::to_string(row.tone);
        out += ',';
        out += detail::fmt_g(row.h_norm);
        out += ',';
        out += detail::fmt_g(row.g_norm);
        out += ',';
        out += row.strategy;
        out += ',';
        out += detail::fmt_g(row.x_over_2p);
        out += '\n';
    }
    return out;
}

// Writes the scenario's CSV into the directory: alloc.csv for the
// single-realization scenarios, sweep.csv for the sweeps.
inline void write_outputs(const SweepResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const bool is_alloc = r.scenario == Scenario::alloc_single_realization ||
                          r.scenario == Scenario::curvefit_compare;
    const fs::path path = fs::path(dir) / (is_alloc ? "alloc.csv" : "sweep.csv");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << (is_alloc ? alloc_csv(r) : sweep_csv(r));
}

}  // namespace wpt::bench
