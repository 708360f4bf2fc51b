#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "frontlab/grid.hpp"

using namespace frontlab;

TEST_CASE("build_grid spacings and validation") {
    Grid g = build_grid(M_PI, 64, -10.0, 10.0, 128, BoundaryY::Neumann);
    CHECK(g.dy == Catch::Approx(M_PI / 64).epsilon(1e-15));
    CHECK(g.dx == Catch::Approx(20.0 / 128).epsilon(1e-15));
    CHECK(g.x_center(0) == Catch::Approx(-10.0 + 0.5 * g.dx));

    CHECK_THROWS_AS(build_grid(-1.0, 64, 0, 1, 64, BoundaryY::Neumann),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, 4, 0, 1, 64, BoundaryY::Neumann),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, 64, 0, 1, 4, BoundaryY::Neumann),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, 64, 1, 1, 64, BoundaryY::Neumann),
                    std::invalid_argument);
}

TEST_CASE("y-row mapping under both boundary conditions") {
    Grid gp = build_grid(1.0, 8, 0, 1, 8, BoundaryY::Periodic);
    CHECK(gp.y_row(-1) == 7);
    CHECK(gp.y_row(8) == 0);
    Grid gn = build_grid(1.0, 8, 0, 1, 8, BoundaryY::Neumann);
    CHECK(gn.y_row(-1) == 0);  // mirror ghost copies row 0
    CHECK(gn.y_row(8) == 7);
}

TEST_CASE("integrate_over_window basics") {
    Grid g = build_grid(2.0, 16, -3.0, 5.0, 64, BoundaryY::Neumann);
    TemperatureField f(g);

    SECTION("unit integrand gives the window length") {
        double v = integrate_over_window(f, [](double) { return 1.0; });
        CHECK(v == Catch::Approx(8.0).epsilon(1e-13));
    }
    SECTION("zero integrand gives zero") {
        double v = integrate_over_window(f, [](double) { return 0.0; });
        CHECK(v == 0.0);
    }
    SECTION("sigmoid mass matches a high-resolution quadrature oracle") {
        double lambda = 2.0, x0 = 1.0;
        auto sig = [&](double x) { return 1.0 / (1.0 + std::exp(lambda * (x - x0))); };
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) f.at(i, j) = sig(g.x_center(i));
        // oracle: 2^20-point midpoint quadrature of the same profile
        const int N = 1 << 20;
        double acc = 0.0, h = 8.0 / N;
        for (int k = 0; k < N; ++k) acc += sig(-3.0 + (k + 0.5) * h) * h;
        double got = integrate_over_window(f, [](double T) { return T; });
        CHECK(got == Catch::Approx(acc).margin(5e-4));
    }
    SECTION("linearity and monotonicity in the integrand") {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) f.at(i, j) = 0.25 + 0.5 * std::sin(i * 0.1 + j);
        double a = integrate_over_window(f, [](double T) { return 2.0 * T + 1.0; });
        double b = integrate_over_window(f, [](double T) { return T; });
        double c = integrate_over_window(f, [](double) { return 1.0; });
        CHECK(a == Catch::Approx(2.0 * b + c).epsilon(1e-12));
        double lo = integrate_over_window(f, [](double T) { return T; });
        double hi = integrate_over_window(f, [](double T) { return T + 0.1; });
        CHECK(hi > lo);
    }
}

TEST_CASE("shift_window") {
    Grid g = build_grid(1.0, 8, 0.0, 100.0, 200, BoundaryY::Neumann);
    TemperatureField f(g);

    SECTION("quiet tail is a no-op") {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                f.at(i, j) = (i < 50) ? 1.0 : 0.0;
        CHECK(shift_window(f, 1e-6) == 0);
        CHECK(f.window_offset == 0.0);
    }
    SECTION("zero field is a no-op") {
        CHECK(shift_window(f, 0.5) == 0);
    }
    SECTION("triggered shift conserves mass up to the dropped columns") {
        double lambda = 0.5, x0 = 88.0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                f.at(i, j) = 1.0 / (1.0 + std::exp(lambda * (g.x_center(i) - x0)));
        double mass_before = window_mass(f);
        // sum of the columns that will be dropped
        TemperatureField copy = f;
        int moved = shift_window(f, 1e-4);
        REQUIRE(moved > 0);
        double dropped = 0.0;
        for (int i = 0; i < moved; ++i)
            for (int j = 0; j < g.ny; ++j)
                dropped += copy.at(i, j) * g.dx * g.dy / g.H;
        double mass_after = window_mass(f);
        CHECK(mass_before == Catch::Approx(mass_after + dropped).margin(1e-12));
        CHECK(f.window_offset == Catch::Approx(moved * g.dx));
    }
    SECTION("threshold validation") {
        CHECK_THROWS_AS(shift_window(f, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(shift_window(f, 1.5), std::invalid_argument);
    }
}
