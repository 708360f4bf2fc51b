#ifndef FRONTLAB_EXPERIMENT_HPP
#define FRONTLAB_EXPERIMENT_HPP

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "frontlab/bounds.hpp"
#include "frontlab/cell_geometry.hpp"
#include "frontlab/runner.hpp"

namespace frontlab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting: outputs are locale-free and bit-reproducible
// ---------------------------------------------------------------------------

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Snapshot format: a fixed 64-byte ASCII preamble carrying the byte length of
// the JSON header that follows ("FRONTLAB-SNAP v1 json=<N>"), then the JSON
// object {nx, ny, x_lo, dx, dy, t, window_offset}, then nx*ny row-major
// (x-major) little-endian float64 cell values.
// ---------------------------------------------------------------------------

inline void write_snapshot(const std::string& path, const TemperatureField& f) {
    json h = {{"nx", f.grid.nx},       {"ny", f.grid.ny},
              {"x_lo", f.grid.x_lo},   {"dx", f.grid.dx},
              {"dy", f.grid.dy},       {"t", f.t},
              {"window_offset", f.window_offset}};
    std::string hj = h.dump();
    char pre[64];
    std::memset(pre, ' ', sizeof pre);
    int n = std::snprintf(pre, sizeof pre, "FRONTLAB-SNAP v1 json=%zu", hj.size());
    pre[n] = ' ';
    pre[63] = '\n';
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
    out.write(pre, sizeof pre);
    out.write(hj.data(), static_cast<std::streamsize>(hj.size()));
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_snapshot: write failed " + path);
}

struct SnapshotHeader {
    int nx = 0, ny = 0;
    double x_lo = 0, dx = 0, dy = 0, t = 0, window_offset = 0;
};

inline TemperatureField read_snapshot(const std::string& path, BoundaryY bc,
                                      double strip_height_hint = -1.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
    char pre[64];
    in.read(pre, sizeof pre);
    if (!in || std::strncmp(pre, "FRONTLAB-SNAP v1 json=", 22) != 0)
        throw std::runtime_error("read_snapshot: bad preamble in " + path);
    std::size_t hlen = std::strtoull(pre + 22, nullptr, 10);
    std::string hj(hlen, '\0');
    in.read(hj.data(), static_cast<std::streamsize>(hlen));
    json h = json::parse(hj);
    SnapshotHeader sh{h.at("nx"), h.at("ny"), h.at("x_lo"), h.at("dx"),
                      h.at("dy"), h.at("t"),  h.at("window_offset")};
    double H = strip_height_hint > 0 ? strip_height_hint : sh.ny * sh.dy;
    Grid g = build_grid(H, sh.ny, sh.x_lo, sh.x_lo + sh.nx * sh.dx, sh.nx, bc);
    TemperatureField f(g);
    f.t = sh.t;
    f.window_offset = sh.window_offset;
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_snapshot: truncated payload in " + path);
    return f;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    // grid
    double H = M_PI;
    int ny = 64;
    double x_lo = -20.0, x_hi = 60.0;
    int nx = 512;
    BoundaryY bc_y = BoundaryY::Neumann;
    // physics
    double kappa = 1.0, v0 = 1.0, cfl_safety = 0.9;
    json flow = {{"type", "zero"}};
    json reaction = {{"type", "kpp"}};
    // initial data and schedule
    double lambda = 1.0, x_front = 0.0;
    double t_end = 10.0, sample_every = 0.1;
    double shift_threshold = 1e-6;
    std::string out_dir = "out";
    std::uint64_t seed = 0;  // reserved for sampled diagnostics; echoed to outputs

    static RunConfig from_json(const json& j);
    json to_json() const;
};

inline RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    std::vector<std::string> errs;
    auto get = [&](const char* key, auto& dst) {
        if (j.contains(key)) {
            try {
                dst = j.at(key).get<std::decay_t<decltype(dst)>>();
            } catch (const std::exception& e) {
                errs.push_back(std::string(key) + ": " + e.what());
            }
        }
    };
    get("H", c.H);
    get("ny", c.ny);
    get("x_lo", c.x_lo);
    get("x_hi", c.x_hi);
    get("nx", c.nx);
    std::string bc = "neumann";
    get("bc_y", bc);
    if (bc == "neumann")
        c.bc_y = BoundaryY::Neumann;
    else if (bc == "periodic")
        c.bc_y = BoundaryY::Periodic;
    else
        errs.push_back("bc_y: must be 'neumann' or 'periodic'");
    get("kappa", c.kappa);
    get("v0", c.v0);
    get("cfl_safety", c.cfl_safety);
    if (j.contains("flow")) c.flow = j.at("flow");
    if (j.contains("reaction")) c.reaction = j.at("reaction");
    get("lambda", c.lambda);
    get("x_front", c.x_front);
    get("t_end", c.t_end);
    get("sample_every", c.sample_every);
    get("shift_threshold", c.shift_threshold);
    get("out_dir", c.out_dir);
    get("seed", c.seed);
    if (!errs.empty()) {
        std::string msg = "config errors:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    return c;
}

inline json RunConfig::to_json() const {
    return {{"H", H},
            {"ny", ny},
            {"x_lo", x_lo},
            {"x_hi", x_hi},
            {"nx", nx},
            {"bc_y", bc_y == BoundaryY::Neumann ? "neumann" : "periodic"},
            {"kappa", kappa},
            {"v0", v0},
            {"cfl_safety", cfl_safety},
            {"flow", flow},
            {"reaction", reaction},
            {"lambda", lambda},
            {"x_front", x_front},
            {"t_end", t_end},
            {"sample_every", sample_every},
            {"shift_threshold", shift_threshold},
            {"out_dir", out_dir},
            {"seed", seed}};
}

inline ReactionSpec reaction_from_json(const json& r) {
    std::string type = r.value("type", "kpp");
    if (type == "kpp") return make_kpp_logistic();
    if (type == "ignition")
        return make_ignition(r.value("theta0", 0.25), r.value("epsilon", 0.1));
    if (type == "arrhenius")
        return make_arrhenius(r.value("A", 4.0), r.value("prefactor", 1.0));
    throw std::invalid_argument("reaction.type: unknown '" + type + "'");
}

inline FlowSpec flow_from_json(const json& fl, double H) {
    std::string type = fl.value("type", "zero");
    if (type == "zero") return shear_flow([](double) { return 0.0; }, H);
    if (type == "shear_sin") {
        double U = fl.value("U", 1.0);
        double k = fl.value("k", 1.0);
        return shear_flow([U, k, H](double y) { return U * std::sin(2.0 * M_PI * k * y / H); }, H);
    }
    if (type == "cellular") {
        double U = fl.value("U", 1.0);
        double Hc = fl.value("H_cell", H / M_PI);
        if (std::abs(M_PI * Hc - H) > 1e-9 * H)
            throw std::invalid_argument("flow.cellular: strip height must be pi*H_cell");
        return cellular_flow(U, Hc);
    }
    if (type == "stream_snapshot") {
        std::string path = fl.at("path");
        double amplitude = fl.value("amplitude", 0.0);
        TemperatureField nodes = read_snapshot(path, BoundaryY::Neumann);
        StreamSample s;
        s.nx = nodes.grid.nx;
        s.ny = nodes.grid.ny - 1;  // rows are psi nodes including both walls
        s.dx = nodes.grid.dx;
        s.dy = nodes.grid.dy;
        s.x0 = nodes.grid.x_lo;
        s.H = s.ny * s.dy;
        s.psi = nodes.values;
        s.amplitude = amplitude;
        FlowSpec f = sampled_stream_flow(std::move(s));
        if (amplitude > 0.0) f.max_speed = std::max(f.max_speed, amplitude);
        return f;
    }
    throw std::invalid_argument("flow.type: unknown '" + type + "'");
}

/** Cross-field validation, consolidated into a single error report. */
inline void validate_config(const RunConfig& c) {
    std::vector<std::string> errs;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(msg);
    };
    check(c.H > 0, "H: must be > 0");
    check(c.ny >= 8, "ny: must be >= 8");
    check(c.nx >= 8, "nx: must be >= 8");
    check(c.x_hi > c.x_lo, "x_hi: must exceed x_lo");
    check(c.kappa > 0, "kappa: must be > 0");
    check(c.v0 > 0, "v0: must be > 0");
    check(c.cfl_safety > 0 && c.cfl_safety <= 1, "cfl_safety: must be in (0,1]");
    check(c.lambda > 0, "lambda: must be > 0");
    check(c.t_end >= 0, "t_end: must be >= 0");
    check(c.sample_every > 0, "sample_every: must be > 0");
    check(c.shift_threshold > 0 && c.shift_threshold < 1,
          "shift_threshold: must be in (0,1)");
    try {
        reaction_from_json(c.reaction);
    } catch (const std::exception& e) {
        errs.push_back(std::string("reaction: ") + e.what());
    }
    try {
        flow_from_json(c.flow, c.H);
    } catch (const std::exception& e) {
        errs.push_back(std::string("flow: ") + e.what());
    }
    if (!errs.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180: comma separated, CRLF records, header row, '.' decimal)
// ---------------------------------------------------------------------------

inline void write_timeseries_csv(const std::string& path,
                                 const std::vector<DiagnosticsRecord>& recs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_timeseries_csv: cannot open " + path);
    out << "t,V_reaction,V_mass,avg_V,grad_energy,front_x,min_T,max_T\r\n";
    for (const auto& r : recs) {
        out << fmt_g17(r.t) << ',' << fmt_g17(r.V_reaction) << ',' << fmt_g17(r.V_mass)
            << ',' << fmt_g17(r.avg_V) << ',' << fmt_g17(r.grad_energy) << ','
            << fmt_g17(r.front_x) << ',' << fmt_g17(r.min_T) << ','
            << fmt_g17(r.max_T) << "\r\n";
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("csv: no column named '" + name + "'");
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (first) {
            while (std::getline(ss, cell, ',')) t.header.push_back(cell);
            first = false;
        } else {
            std::vector<double> row;
            while (std::getline(ss, cell, ','))
                row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : std::strtod(cell.c_str(), nullptr));
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulationOutput {
    RunResult result;
    json report;
    std::filesystem::path dir;
};

/** One simulation: timeseries.csv, final.snap and report.json under out_dir. */
inline SimulationOutput simulate(const RunConfig& cfg) {
    validate_config(cfg);
    SolverConfig sc;
    sc.kappa = cfg.kappa;
    sc.v0 = cfg.v0;
    sc.cfl_safety = cfg.cfl_safety;
    sc.reaction = reaction_from_json(cfg.reaction);
    sc.flow = flow_from_json(cfg.flow, cfg.H);
    if (std::abs(sc.flow.strip_height - cfg.H) > 1e-9 * cfg.H)
        throw std::invalid_argument("config: flow strip height disagrees with H");
    Grid g = build_grid(cfg.H, cfg.ny, cfg.x_lo, cfg.x_hi, cfg.nx, cfg.bc_y);
    TemperatureField T0 = make_front_initial_data(g, cfg.lambda, cfg.x_front);
    double sub_residual = check_subsolution(T0, sc);

    RunOptions opts;
    opts.shift_threshold = cfg.shift_threshold;
    RunResult res = run(sc, g, std::move(T0), cfg.t_end, cfg.sample_every, opts);

    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_timeseries_csv((dir / "timeseries.csv").string(), res.records);
    write_snapshot((dir / "final.snap").string(), res.field);

    json report;
    report["config"] = cfg.to_json();
    report["seed"] = cfg.seed;
    report["dt"] = res.dt;
    report["steps"] = res.total_steps;
    report["shift_cells"] = res.total_shift_cells;
    report["numerical_diffusion"] = res.numerical_diffusion;
    report["numerical_diffusion_over_kappa"] = res.numerical_diffusion / cfg.kappa;
    report["min_T_ever"] = res.min_T_ever;
    report["max_T_ever"] = res.max_T_ever;
    report["subsolution_residual"] = sub_residual;
    report["monotone_certified"] = sub_residual >= -1e-6 * sc.reaction_rate();

    // measured speed and tail average
    try {
        FrontSpeed fs = front_speed(res.records, 0.5);
        report["c"] = fs.c;
        report["c_stderr"] = fs.stderr_c;
    } catch (const std::exception& e) {
        report["c_error"] = e.what();
    }
    std::size_t ntail = res.records.size() / 2;
    double vtail = 0.0;
    for (std::size_t i = res.records.size() - ntail; i < res.records.size(); ++i)
        vtail += res.records[i].V_reaction;
    if (ntail) report["V_tail_mean"] = vtail / ntail;

    // bound functionals for the configured flow
    json bounds = json::array();
    std::string ftype = cfg.flow.value("type", "zero");
    auto bound_to_json = [](const BoundReport& b) {
        json j;
        j["value"] = b.value;
        j["regime"] = regime_name(b.regime);
        j["C"] = b.C;
        j["C1"] = b.C1;
        j["C2"] = b.C2;
        j["Pe"] = b.scales.Pe;
        j["l"] = b.scales.l;
        j["tau_c"] = b.scales.tau_c;
        j["tau_u"] = b.scales.u_zero ? -1.0 : b.scales.tau_u;
        j["flags"] = b.flags;
        if (!b.intervals.intervals.empty()) {
            json iv = json::array();
            for (const auto& w : b.intervals.intervals)
                iv.push_back({{"lo", w.lo}, {"hi", w.hi}, {"h", w.h},
                              {"flux_over_H", w.flux_over_H}, {"weight", w.weight}});
            j["intervals"] = iv;
        }
        if (!b.tubes.tubes.empty()) {
            json tv = json::array();
            for (const auto& t : b.tubes.tubes)
                tv.push_back({{"sign", t.sign}, {"psi_bottom", t.psi_bottom},
                              {"psi_top", t.psi_top}, {"flux", t.flux}, {"h", t.h},
                              {"geometry_verified", t.geometry_verified}});
            j["tubes"] = tv;
        }
        if (b.boundary_layer_h > 0) j["boundary_layer_h"] = b.boundary_layer_h;
        return j;
    };

    double measured_c = report.contains("c") ? report["c"].get<double>() : 0.0;
    if (ftype == "shear_sin" || ftype == "zero") {
        const int n = 4096;
        std::vector<double> us(n);
        for (int i = 0; i < n; ++i) {
            auto [u1, u2] = sc.flow.velocity(0.0, (i + 0.5) * cfg.H / n);
            us[i] = u1;
        }
        BoundReport b = shear_bound_functional(us, cfg.kappa, cfg.v0, cfg.H);
        Calibration cal = compare_to_simulation(measured_c, b);
        json jb = bound_to_json(b);
        jb["implied_C"] = cal.c_star;
        bounds.push_back(jb);
        TubeFamily tubes = extract_tubes(sc.flow, 512, 16, 2048);
        BoundReport p = percolating_bound_functional(tubes, cfg.kappa, cfg.v0, cfg.H);
        Calibration calp = compare_to_simulation(measured_c, p);
        json jp = bound_to_json(p);
        jp["implied_C"] = calp.c_star;
        bounds.push_back(jp);
    } else if (ftype == "cellular") {
        double U = cfg.flow.value("U", 1.0), Hc = cfg.H / M_PI;
        BoundReport b = cellular_bound(cfg.kappa, cfg.v0, U, Hc);
        if (U > 0) b.boundary_layer_h = boundary_layer_width(cfg.kappa, cfg.v0, U, Hc).h;
        Calibration cal = compare_to_simulation(measured_c, b);
        json jb = bound_to_json(b);
        jb["implied_C"] = cal.c_star;
        bounds.push_back(jb);
    } else if (ftype == "stream_snapshot") {
        TubeFamily tubes = extract_tubes(sc.flow, 512);
        BoundReport p = percolating_bound_functional(tubes, cfg.kappa, cfg.v0, cfg.H);
        Calibration calp = compare_to_simulation(measured_c, p);
        json jp = bound_to_json(p);
        jp["implied_C"] = calp.c_star;
        bounds.push_back(jp);
    }
    const ReactionConstants& rc = sc.reaction.constants;
    if (rc.f0 > 0)
        report["floor_bound"] = floor_bound(rc.f0, rc.zeta, cfg.v0);
    report["bounds"] = bounds;

    std::ofstream rf(dir / "report.json", std::ios::binary);
    rf << report.dump(2) << "\n";

    SimulationOutput out;
    out.result = std::move(res);
    out.report = std::move(report);
    out.dir = dir;
    return out;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepParam {
    std::string name;  // json pointer into the RunConfig object, e.g. /flow/U
    std::vector<double> values;
};

struct SweepConfig {
    json base;  // RunConfig template
    std::vector<SweepParam> params;  // one or two
    bool t_end_rule = true;          // t_end ~ window / expected speed
    double t_end_factor = 0.6;
    double t_end_cap = 1e9;
    std::string out_dir = "sweep";

    static SweepConfig from_json(const json& j);
};

inline SweepConfig SweepConfig::from_json(const json& j) {
    SweepConfig s;
    s.base = j.at("template");
    if (j.contains("out_dir")) s.out_dir = j.at("out_dir");
    for (const auto& p : j.at("sweep")) {
        SweepParam sp;
        sp.name = p.at("param");
        if (p.contains("values")) {
            sp.values = p.at("values").get<std::vector<double>>();
        } else {
            double from = p.at("from"), to = p.at("to");
            int count = p.at("count");
            bool geometric = p.value("spacing", "linear") == "geometric";
            for (int i = 0; i < count; ++i) {
                double f = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
                sp.values.push_back(geometric ? from * std::pow(to / from, f)
                                              : from + f * (to - from));
            }
        }
        s.params.push_back(std::move(sp));
    }
    if (s.params.empty() || s.params.size() > 2)
        throw std::invalid_argument("sweep: need one or two swept parameters");
    for (const auto& p : s.params) {
        json::json_pointer ptr(p.name);
        if (!s.base.contains(ptr))
            throw std::invalid_argument("sweep: param '" + p.name +
                                        "' not present in the template");
    }
    if (j.contains("t_end_rule")) {
        const json& r = j.at("t_end_rule");
        s.t_end_rule = r.value("enabled", true);
        s.t_end_factor = r.value("factor", 0.6);
        s.t_end_cap = r.value("cap", 1e9);
    }
    return s;
}

/** Expected speed at unit constants, used by the t_end scaling rule. */
inline double expected_speed_bound(const RunConfig& cfg) {
    std::string ftype = cfg.flow.value("type", "zero");
    if (ftype == "cellular") {
        double U = cfg.flow.value("U", 1.0);
        return cellular_bound(cfg.kappa, cfg.v0, U, cfg.H / M_PI).value;
    }
    if (ftype == "shear_sin") {
        const int n = 2048;
        std::vector<double> us(n);
        FlowSpec f = flow_from_json(cfg.flow, cfg.H);
        for (int i = 0; i < n; ++i) us[i] = f.velocity(0.0, (i + 0.5) * cfg.H / n).first;
        return shear_bound_functional(us, cfg.kappa, cfg.v0, cfg.H).value;
    }
    return cfg.v0;
}

struct SweepPoint {
    int index = 0;
    std::vector<double> values;
    RunConfig cfg;
};

inline std::vector<SweepPoint> sweep_points(const SweepConfig& s) {
    std::vector<SweepPoint> pts;
    std::size_t n0 = s.params[0].values.size();
    std::size_t n1 = s.params.size() > 1 ? s.params[1].values.size() : 1;
    int idx = 0;
    for (std::size_t a = 0; a < n0; ++a)
        for (std::size_t b = 0; b < n1; ++b) {
            json j = s.base;
            SweepPoint p;
            p.index = idx++;
            j[json::json_pointer(s.params[0].name)] = s.params[0].values[a];
            p.values.push_back(s.params[0].values[a]);
            if (s.params.size() > 1) {
                j[json::json_pointer(s.params[1].name)] = s.params[1].values[b];
                p.values.push_back(s.params[1].values[b]);
            }
            p.cfg = RunConfig::from_json(j);
            p.cfg.out_dir =
                (std::filesystem::path(s.out_dir) / ("point_" + std::to_string(p.index)))
                    .string();
            if (s.t_end_rule) {
                double v = expected_speed_bound(p.cfg);
                double t = s.t_end_factor * (p.cfg.x_hi - p.cfg.x_lo) / std::max(v, 1e-12);
                p.cfg.t_end = std::min({p.cfg.t_end, t, s.t_end_cap});
            }
            pts.push_back(std::move(p));
        }
    return pts;
}

/** Run the sweep on a share-nothing worker pool; the summary is assembled in
 *  configured order afterwards. Completed points (report.json present) are
 *  skipped, which makes interrupted sweeps resumable. */
inline std::filesystem::path sweep(const SweepConfig& s, int threads = 1,
                                   bool resume = true) {
    std::vector<SweepPoint> pts = sweep_points(s);
    std::filesystem::create_directories(s.out_dir);
    std::vector<std::string> errors(pts.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= pts.size()) return;
            const SweepPoint& p = pts[k];
            std::filesystem::path rp = std::filesystem::path(p.cfg.out_dir) / "report.json";
            if (resume && std::filesystem::exists(rp)) continue;
            try {
                simulate(p.cfg);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::filesystem::path sp = std::filesystem::path(s.out_dir) / "summary.csv";
    std::ofstream out(sp, std::ios::binary);
    out << "index";
    for (std::size_t q = 0; q < s.params.size(); ++q) out << ",param" << q;
    out << ",c,c_stderr,V_tail_mean,bound_value,implied_C,Pe,tau_ratio,"
           "num_diff_over_kappa,floor_bound,status\r\n";
    for (const SweepPoint& p : pts) {
        out << p.index;
        for (double v : p.values) out << ',' << fmt_g17(v);
        std::filesystem::path rp = std::filesystem::path(p.cfg.out_dir) / "report.json";
        if (!errors[p.index].empty() || !std::filesystem::exists(rp)) {
            for (int q = 0; q < 9; ++q) out << ',';
            out << ",error\r\n";
            continue;
        }
        std::ifstream rf(rp);
        json rep = json::parse(rf);
        double c = rep.value("c", std::numeric_limits<double>::quiet_NaN());
        double cs = rep.value("c_stderr", std::numeric_limits<double>::quiet_NaN());
        double vt = rep.value("V_tail_mean", std::numeric_limits<double>::quiet_NaN());
        double bv = std::numeric_limits<double>::quiet_NaN();
        double ic = std::numeric_limits<double>::quiet_NaN();
        double pe = std::numeric_limits<double>::quiet_NaN();
        double tr = std::numeric_limits<double>::quiet_NaN();
        if (rep.contains("bounds") && !rep["bounds"].empty()) {
            const json& b = rep["bounds"][0];
            bv = b.value("value", bv);
            ic = b.value("implied_C", ic);
            pe = b.value("Pe", pe);
            double tc = b.value("tau_c", 0.0), tu = b.value("tau_u", -1.0);
            if (tu > 0) tr = tc / tu;
        }
        out << ',' << fmt_g17(c) << ',' << fmt_g17(cs) << ',' << fmt_g17(vt) << ','
            << fmt_g17(bv) << ',' << fmt_g17(ic) << ',' << fmt_g17(pe) << ','
            << fmt_g17(tr) << ','
            << fmt_g17(rep.value("numerical_diffusion_over_kappa",
                                 std::numeric_limits<double>::quiet_NaN()))
            << ',' << fmt_g17(rep.value("floor_bound", 0.0)) << ",ok\r\n";
    }
    return sp;
}

// ---------------------------------------------------------------------------
// scaling fit
// ---------------------------------------------------------------------------

struct ScalingFit {
    double exponent = 0.0;
    double stderr_p = 0.0;
    double intercept = 0.0;  // log-log intercept
    int n_used = 0;
};

/** Log-log least squares over the tail_points largest x values. */
inline ScalingFit fit_scaling(const CsvTable& t, const std::string& xcol,
                              const std::string& ycol, int tail_points) {
    int xi = t.column(xcol), yi = t.column(ycol);
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : t.rows) {
        double x = row[xi], y = row[yi];
        if (std::isfinite(x) && std::isfinite(y) && x > 0 && y > 0)
            pts.emplace_back(x, y);
    }
    std::sort(pts.begin(), pts.end());
    if (static_cast<int>(pts.size()) < tail_points || tail_points < 3)
        throw std::invalid_argument("fit_scaling: need >= 3 positive tail points");
    ScalingFit f;
    f.n_used = tail_points;
    std::size_t start = pts.size() - tail_points;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = start; i < pts.size(); ++i) {
        double lx = std::log(pts[i].first), ly = std::log(pts[i].second);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double m = tail_points;
    double denom = m * sxx - sx * sx;
    f.exponent = (m * sxy - sx * sy) / denom;
    f.intercept = (sy - f.exponent * sx) / m;
    double ss = 0.0;
    for (std::size_t i = start; i < pts.size(); ++i) {
        double e = std::log(pts[i].second) - (f.intercept + f.exponent * std::log(pts[i].first));
        ss += e * e;
    }
    if (m > 2) f.stderr_p = std::sqrt(ss / (m - 2) / (sxx - sx * sx / m));
    return f;
}

inline ScalingFit fit_scaling(const std::string& csv_path, const std::string& xcol,
                              const std::string& ycol, int tail_points) {
    return fit_scaling(read_csv(csv_path), xcol, ycol, tail_points);
}

}  // namespace frontlab

#endif
