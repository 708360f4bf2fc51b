#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "frontlab/experiment.hpp"

using namespace frontlab;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg = RunConfig::from_json(load_json(config_path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    SimulationOutput out = simulate(cfg);
    std::cout << "wrote " << out.dir.string() << " (steps=" << out.result.total_steps;
    if (out.report.contains("c")) std::cout << ", c=" << out.report["c"].get<double>();
    std::cout << ")\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override,
              int threads, bool resume) {
    SweepConfig sc = SweepConfig::from_json(load_json(config_path));
    if (!out_override.empty()) sc.out_dir = out_override;
    std::filesystem::path summary = sweep(sc, threads, resume);
    std::cout << "wrote " << summary.string() << "\n";
    return 0;
}

// Evaluates the bound functionals for a flow/profile spec without running a
// simulation. Input: {kappa, v0, H, flow:{...}} or {profile: [u samples]}.
int cmd_bounds(const std::string& config_path, const std::string& out_path) {
    json in = load_json(config_path);
    double kappa = in.value("kappa", 1.0);
    double v0 = in.value("v0", 1.0);
    double H = in.value("H", M_PI);
    json out;
    out["kappa"] = kappa;
    out["v0"] = v0;
    out["H"] = H;
    json reports = json::array();

    auto report_json = [](const BoundReport& b) {
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
        json iv = json::array();
        for (const auto& w : b.intervals.intervals)
            iv.push_back({{"lo", w.lo}, {"hi", w.hi}, {"h", w.h},
                          {"flux_over_H", w.flux_over_H}, {"weight", w.weight}});
        if (!iv.empty()) j["intervals"] = iv;
        json tv = json::array();
        for (const auto& t : b.tubes.tubes)
            tv.push_back({{"sign", t.sign}, {"psi_bottom", t.psi_bottom},
                          {"psi_top", t.psi_top}, {"flux", t.flux}, {"h", t.h},
                          {"e1_min", t.e1_min},
                          {"flux_density_ratio", t.flux_density_ratio},
                          {"geometry_verified", t.geometry_verified}});
        if (!tv.empty()) j["tubes"] = tv;
        if (b.boundary_layer_h > 0) j["boundary_layer_h"] = b.boundary_layer_h;
        return j;
    };

    if (in.contains("profile")) {
        std::vector<double> u = in.at("profile").get<std::vector<double>>();
        reports.push_back(report_json(shear_bound_functional(u, kappa, v0, H, in.value("C", 1.0))));
    }
    if (in.contains("flow")) {
        FlowSpec f = flow_from_json(in.at("flow"), H);
        std::string type = in.at("flow").value("type", "zero");
        if (type == "shear_sin" || type == "zero") {
            const int n = 4096;
            std::vector<double> u(n);
            for (int i = 0; i < n; ++i) u[i] = f.velocity(0.0, (i + 0.5) * H / n).first;
            reports.push_back(report_json(shear_bound_functional(u, kappa, v0, H, in.value("C", 1.0))));
            TubeFamily tubes = extract_tubes(f, in.value("n_levels", 512), 16, 2048);
            reports.push_back(report_json(
                percolating_bound_functional(tubes, kappa, v0, H, in.value("C", 1.0))));
        } else if (type == "cellular") {
            double U = in.at("flow").value("U", 1.0);
            BoundReport b = cellular_bound(kappa, v0, U, H / M_PI, in.value("C1", 1.0),
                                           in.value("C2", 1.0));
            if (U > 0) {
                BoundaryLayer bl = boundary_layer_width(kappa, v0, U, H / M_PI);
                b.boundary_layer_h = bl.h;
                if (!bl.valid) b.flags.push_back("h>H/6");
            }
            reports.push_back(report_json(b));
        } else {
            TubeFamily tubes = extract_tubes(f, in.value("n_levels", 512));
            reports.push_back(report_json(
                percolating_bound_functional(tubes, kappa, v0, H, in.value("C", 1.0))));
        }
    }
    out["bounds"] = reports;
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream o(out_path);
        o << out.dump(2) << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_geometry_check(double H, int n_samples, const std::string& out_path) {
    CellChart chart;
    chart.H = H;
    json out;
    out["H"] = H;
    out["gradest_min"] = gradest_check(chart, n_samples);
    double qmin = 1e300, qmax = -1e300;
    int accepted = 0, idx = 1;
    while (accepted < n_samples) {
        double x = M_PI * H * detail::halton(idx, 2);
        double y = M_PI * H * detail::halton(idx, 3);
        ++idx;
        double r = rho(x, y, chart);
        if (r < chart.rho_min() || r > 0.5 * H) continue;
        ++accepted;
        double q = conformal_Q(chart, x, y);
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
    }
    out["Q_min"] = qmin;
    out["Q_max"] = qmax;
    out["Q_bounds"] = {std::exp(-1.0), std::exp(1.0)};
    ProcoordReport rep = verify_procoord(chart, std::min(n_samples, 2000));
    out["procoord"] = {{"n_samples", rep.n_samples},
                       {"min_E1", rep.min_E1},
                       {"min_E2", rep.min_E2},
                       {"min_omega", rep.min_omega},
                       {"max_omega", rep.max_omega},
                       {"max_H_domega_drho", rep.max_H_domega_drho},
                       {"max_H_domega_dxi_over_log", rep.max_H_domega_dxi_over_log},
                       {"rho_min", rep.rho_min}};
    Streamline s = trace_streamline(chart, 0.5 * H, 256);
    out["half_level_perimeter"] = s.perimeter;
    out["perimeter_over_H"] = s.perimeter / H;
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream o(out_path);
        o << out.dump(2) << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontlab: front propagation in advected reaction-diffusion flows"};
    app.require_subcommand(1);

    std::string config, out_dir, out_path;
    int threads = 1;
    bool resume = false;
    double H = 1.0;
    int n_samples = 10000;

    auto* sim = app.add_subcommand("simulate", "run one simulation from a JSON config");
    sim->add_option("config", config, "JSON config path")->required();
    sim->add_option("--out", out_dir, "output directory override");

    auto* sw = app.add_subcommand("sweep", "run a parameter sweep");
    sw->add_option("config", config, "JSON sweep config path")->required();
    sw->add_option("--out", out_dir, "output directory override");
    sw->add_option("--threads", threads, "worker pool size");
    sw->add_flag("--resume", resume, "skip points with existing reports");

    auto* bd = app.add_subcommand("bounds", "evaluate the lower-bound functionals");
    bd->add_option("config", config, "JSON flow/profile spec")->required();
    bd->add_option("--out", out_path, "write the report here instead of stdout");

    auto* gc = app.add_subcommand("geometry-check", "verify the cell coordinate bounds");
    gc->add_option("H", H, "cell scale")->required();
    gc->add_option("--samples", n_samples, "sample count");
    gc->add_option("--out", out_path, "write the report here instead of stdout");

    CLI11_PARSE(app, argc, argv);
    try {
        if (sim->parsed()) return cmd_simulate(config, out_dir);
        if (sw->parsed()) return cmd_sweep(config, out_dir, threads, resume);
        if (bd->parsed()) return cmd_bounds(config, out_path);
        if (gc->parsed()) return cmd_geometry_check(H, n_samples, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
