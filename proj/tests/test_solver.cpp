#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "frontlab/runner.hpp"
#include "frontlab/solver.hpp"

using namespace frontlab;

namespace {

FlowSpec zero_flow(double H) {
    return shear_flow([](double) { return 0.0; }, H);
}

ReactionSpec zero_reaction() { return make_arrhenius(1.0, 0.0); }

SolverConfig basic_config(double kappa, double v0, FlowSpec flow, ReactionSpec r) {
    SolverConfig c;
    c.kappa = kappa;
    c.v0 = v0;
    c.flow = std::move(flow);
    c.reaction = std::move(r);
    return c;
}

}  // namespace

TEST_CASE("stable_dt formula") {
    Grid g = build_grid(1.6, 16, 0.0, 1.6, 16, BoundaryY::Neumann);  // dx=dy=0.1
    SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.6), make_kpp_logistic());
    c.cfl_safety = 1.0;
    CHECK(stable_dt(c, g) == Catch::Approx(0.0025).epsilon(1e-12));

    c.kappa = 1e-3;
    CHECK(stable_dt(c, g) == Catch::Approx(2e-4).epsilon(1e-12));

    c.kappa = 1e-6;
    c.flow = shear_flow([](double y) { return 100.0 * std::sin(2 * M_PI * y / 1.6); }, 1.6);
    CHECK(stable_dt(c, g) == Catch::Approx(5e-4).epsilon(1e-12));
}

TEST_CASE("front initial data") {
    Grid g = build_grid(1.0, 8, -40.0, 40.0, 160, BoundaryY::Neumann);
    double lambda = 1.0;
    TemperatureField f = make_front_initial_data(g, lambda, g.x_center(80));
    double xf = g.x_center(80);

    CHECK(f.at(80, 3) == Catch::Approx(0.5).epsilon(1e-12));
    // 10/lambda to the left the profile is within 5e-5 of 1
    int i_left = 80 - static_cast<int>(10.0 / lambda / g.dx);
    CHECK(f.at(i_left, 0) == Catch::Approx(1.0).margin(5e-5));
    // y-uniform
    for (int j = 0; j < g.ny; ++j) CHECK(f.at(40, j) == f.at(40, 0));
    (void)xf;

    CHECK_THROWS_AS(make_front_initial_data(g, 1.0, -39.0), std::invalid_argument);
    CHECK_THROWS_AS(make_front_initial_data(g, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("fixed points of the step") {
    Grid g = build_grid(2.0, 16, 0.0, 4.0, 32, BoundaryY::Neumann);
    SolverConfig c = basic_config(0.5, 1.0,
                                  shear_flow([](double y) { return std::sin(M_PI * y); }, 2.0),
                                  make_kpp_logistic());
    double dt = stable_dt(c, g);

    SECTION("T == 0 stays 0 away from the hot closure") {
        TemperatureField f(g);
        Stepper s(c, g);
        s.advance(f, dt);
        // the left closure feeds heat in; interior columns stay zero
        for (int i = 2; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) CHECK(f.at(i, j) == 0.0);
    }
    SECTION("T == 1 stays 1 away from the cold closure") {
        TemperatureField f(g);
        std::fill(f.values.begin(), f.values.end(), 1.0);
        Stepper s(c, g);
        s.advance(f, dt);
        for (int i = 0; i < g.nx - 2; ++i)
            for (int j = 0; j < g.ny; ++j) CHECK(f.at(i, j) == 1.0);
    }
}

TEST_CASE("heat evolution conserves mass away from the closures") {
    Grid g = build_grid(1.0, 16, -8.0, 8.0, 160, BoundaryY::Neumann);
    SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), zero_reaction());
    TemperatureField f(g);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double x = g.x_center(i);
            f.at(i, j) = 0.8 * std::exp(-x * x);
        }
    double m0 = window_mass(f);
    double dt = stable_dt(c, g);
    Stepper s(c, g);
    for (int k = 0; k < 100; ++k) s.advance(f, dt);
    CHECK(window_mass(f) == Catch::Approx(m0).margin(1e-8));
}

TEST_CASE("fused kernel matches the reference composition bit for bit") {
    auto fill = [](TemperatureField& f) {
        const Grid& g = f.grid;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                f.at(i, j) = 0.5 + 0.45 * std::sin(0.37 * i) * std::cos(0.73 * j + 0.2);
    };
    for (BoundaryY bc : {BoundaryY::Neumann, BoundaryY::Periodic}) {
        Grid g = build_grid(M_PI, 24, 0.0, 4 * M_PI, 48, bc);
        SolverConfig c = basic_config(0.7, 1.3, cellular_flow(2.0, 1.0),
                                      make_ignition(0.25, 0.1));
        double dt = stable_dt(c, g);
        TemperatureField a(g), b(g);
        fill(a);
        fill(b);
        Stepper sa(c, g), sb(c, g);
        for (int k = 0; k < 5; ++k) {
            sa.advance(a, dt);
            sb.advance_reference(b, dt);
        }
        REQUIRE(std::memcmp(a.values.data(), b.values.data(),
                            a.values.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("discrete maximum principle is enforced, not assumed") {
    Grid g = build_grid(1.0, 16, 0.0, 4.0, 64, BoundaryY::Neumann);
    SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_kpp_logistic());
    TemperatureField f = make_front_initial_data(
        build_grid(1.0, 16, -40, 40, 640, BoundaryY::Neumann), 1.0, 0.0);
    SECTION("admissible dt keeps values in the unit band") {
        double dt = stable_dt(c, f.grid);
        Stepper s(c, f.grid);
        for (int k = 0; k < 50; ++k) {
            s.advance(f, dt);
            CHECK(s.last_stats().raw_min >= -1e-10);
            CHECK(s.last_stats().raw_max <= 1.0 + 1e-10);
        }
    }
    SECTION("an oversized dt is rejected up front") {
        CHECK_THROWS_AS(step(f, c, 10.0 * stable_dt(c, f.grid)), std::invalid_argument);
    }
    SECTION("a violating update trips the runtime guard") {
        Stepper s(c, f.grid);
        CHECK_THROWS_AS(
            [&] {
                for (int k = 0; k < 400; ++k) s.advance(f, 40.0 * stable_dt(c, f.grid));
            }(),
            std::runtime_error);
    }
}

TEST_CASE("comparison principle at desk scale") {
    Grid g = build_grid(1.0, 8, -30.0, 30.0, 240, BoundaryY::Neumann);
    SolverConfig c = basic_config(1.0, 1.0,
                                  shear_flow([](double y) { return 2.0 * std::sin(2 * M_PI * y); }, 1.0),
                                  make_kpp_logistic());
    TemperatureField a = make_front_initial_data(g, 1.0, -2.0);
    TemperatureField b = make_front_initial_data(g, 1.0, 0.0);  // a <= b pointwise
    double dt = stable_dt(c, g);
    Stepper sa(c, g), sb(c, g);
    for (int k = 0; k < 100; ++k) {
        sa.advance(a, dt);
        sb.advance(b, dt);
    }
    double worst = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n)
        worst = std::min(worst, b.values[n] - a.values[n]);
    CHECK(worst >= -1e-8);
}

TEST_CASE("shear acts on y-uniform data only when u is nonzero") {
    Grid g = build_grid(1.0, 16, -30.0, 30.0, 240, BoundaryY::Neumann);
    auto yvar = [&](const TemperatureField& f) {
        double worst = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            double lo = 1e300, hi = -1e300;
            for (int j = 0; j < g.ny; ++j) {
                lo = std::min(lo, f.at(i, j));
                hi = std::max(hi, f.at(i, j));
            }
            worst = std::max(worst, hi - lo);
        }
        return worst;
    };
    SECTION("u == 0 keeps the field exactly y-independent") {
        SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_kpp_logistic());
        TemperatureField f = make_front_initial_data(g, 1.0, 0.0);
        Stepper s(c, g);
        for (int k = 0; k < 10; ++k) s.advance(f, stable_dt(c, g));
        CHECK(yvar(f) == 0.0);
    }
    SECTION("u(y) != 0 creates y-variance within 10 steps") {
        SolverConfig c = basic_config(1.0, 1.0,
                                      shear_flow([](double y) { return 3.0 * std::sin(2 * M_PI * y); }, 1.0),
                                      make_kpp_logistic());
        TemperatureField f = make_front_initial_data(g, 1.0, 0.0);
        Stepper s(c, g);
        for (int k = 0; k < 10; ++k) s.advance(f, stable_dt(c, g));
        CHECK(yvar(f) > 0.0);
    }
}

TEST_CASE("subsolution residual") {
    SECTION("KPP sigmoid at the critical decay rate") {
        SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_kpp_logistic());
        auto res_at = [&](int nx) {
            Grid g = build_grid(1.0, 8, -30.0, 30.0, nx, BoundaryY::Neumann);
            TemperatureField f = make_front_initial_data(g, 1.0, 0.0);
            return check_subsolution(f, c);
        };
        double coarse = res_at(600), fine = res_at(1200);
        // the continuum residual is nonnegative (classical KPP wave algebra);
        // the discrete minimum converges to it from below as dx^4
        CHECK(coarse >= -1e-5);
        CHECK(fine >= -1e-6);
        CHECK(fine >= coarse - 1e-12);
    }
    SECTION("subcritical decay is strictly certified") {
        SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_kpp_logistic());
        Grid g = build_grid(1.0, 8, -30.0, 30.0, 600, BoundaryY::Neumann);
        TemperatureField f = make_front_initial_data(g, 0.8, 0.0);
        CHECK(check_subsolution(f, c) >= 0.0);
    }
    SECTION("flat regions below an ignition cutoff contribute zero") {
        SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_ignition(0.5, 0.1));
        Grid g = build_grid(1.0, 8, 0.0, 10.0, 64, BoundaryY::Neumann);
        TemperatureField f(g);
        std::fill(f.values.begin(), f.values.end(), 0.3);
        // all terms vanish away from the pinned closures
        CHECK(check_subsolution(f, c, 1) == 0.0);
        // the cold right closure pulls the full-window minimum negative
        CHECK(check_subsolution(f, c) < 0.0);
    }
    SECTION("constant burned state has zero interior residual") {
        SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_kpp_logistic());
        Grid g = build_grid(1.0, 8, 0.0, 10.0, 64, BoundaryY::Neumann);
        TemperatureField f(g);
        std::fill(f.values.begin(), f.values.end(), 1.0);
        CHECK(check_subsolution(f, c, 1) == 0.0);
    }
}

TEST_CASE("order of accuracy on the exact logistic traveling wave") {
    // T_t = kappa T_xx + (v0^2/kappa) T(1-T) admits the closed-form wave
    // phi(s) = (1 + e^{s/sqrt(6)})^{-2} with speed 5 v0 / sqrt(6)
    const double kappa = 1.0, v0 = 1.0;
    const double L = kappa / v0, c_exact = 5.0 * v0 / std::sqrt(6.0);
    auto phi = [&](double s) {
        double e = std::exp(s / (std::sqrt(6.0) * L));
        return 1.0 / ((1.0 + e) * (1.0 + e));
    };
    SolverConfig cfg = basic_config(kappa, v0, zero_flow(1.0), make_kpp_logistic());
    auto err_at = [&](int nx) {
        Grid g = build_grid(1.0, 8, -20.0, 24.0, nx, BoundaryY::Neumann);
        TemperatureField f(g);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) f.at(i, j) = phi(g.x_center(i));
        double dt = stable_dt(cfg, g);
        long n = std::lround(0.5 / dt);
        Stepper s(cfg, g);
        for (long k = 0; k < n; ++k) s.advance(f, dt);
        double t = n * dt, worst = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x_center(i);
            if (x < -6.0 || x > 14.0) continue;  // interior, clear of closures
            worst = std::max(worst, std::abs(f.at(i, 0) - phi(x - c_exact * t)));
        }
        return worst;
    };
    double e1 = err_at(440), e2 = err_at(880);
    double order = std::log2(e1 / e2);
    INFO("errors " << e1 << " " << e2 << " order " << order);
    CHECK(order >= 1.8);
}

TEST_CASE("advection order on sheared translation") {
    const double H = 1.0, U = 1.0;
    SolverConfig cfg = basic_config(1e-12, 1.0,
                                    shear_flow([=](double y) { return U * std::sin(2 * M_PI * y / H); }, H),
                                    zero_reaction());
    auto err_at = [&](int nx) {
        Grid g = build_grid(H, 16, -8.0, 8.0, nx, BoundaryY::Neumann);
        TemperatureField f(g);
        auto prof = [](double x) { return 1.0 / (1.0 + std::exp(2.0 * x)); };
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) f.at(i, j) = prof(g.x_center(i));
        double dt = stable_dt(cfg, g);
        long n = std::lround(1.0 / dt);
        Stepper s(cfg, g);
        std::vector<double> row_u(g.ny);
        for (int j = 0; j < g.ny; ++j) row_u[j] = s.face_u(0, j);
        for (long k = 0; k < n; ++k) s.advance(f, dt);
        double t = n * dt, worst = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x_center(i);
            if (std::abs(x) > 5.0) continue;
            for (int j = 0; j < g.ny; ++j)
                worst = std::max(worst, std::abs(f.at(i, j) - prof(x - row_u[j] * t)));
        }
        return worst;
    };
    double e1 = err_at(320), e2 = err_at(640);
    double order = std::log2(e1 / e2);
    INFO("errors " << e1 << " " << e2 << " order " << order);
    CHECK(order >= 0.9);
}

TEST_CASE("run produces records and preserves certified monotonicity") {
    Grid g = build_grid(1.0, 8, -40.0, 60.0, 400, BoundaryY::Neumann);
    SolverConfig c = basic_config(1.0, 1.0, zero_flow(1.0), make_kpp_logistic());
    TemperatureField T0 = make_front_initial_data(g, 0.8, -10.0);
    REQUIRE(check_subsolution(T0, c) >= 0.0);

    SECTION("t_end = 0 gives the single initial record") {
        RunResult r = run(c, g, T0, 0.0, 0.1);
        CHECK(r.records.size() == 1);
        CHECK(r.records[0].t == 0.0);
    }
    SECTION("certified run grows monotonically between samples") {
        RunOptions opts;
        opts.track_monotone = true;
        RunResult r = run(c, g, T0, 4.0, 0.25, opts);
        CHECK(r.min_intersample_growth >= -1e-8);
        CHECK(r.records.size() >= 10);
        CHECK(r.min_T_ever >= -1e-10);
        CHECK(r.max_T_ever <= 1.0 + 1e-10);
        // front advances
        CHECK(r.records.back().front_x > r.records.front().front_x);
    }
}
