#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "cpds/highs_backend.hpp"
#include "cpds/lp.hpp"
#include "cpds/milp.hpp"

using namespace cpds;

TEST_CASE("knapsack MILP solves to the known optimum") {
    // max 6a + 5b + 4c  s.t. 2a + 3b + 4c <= 5, binaries.
    Milp m;
    m.name = "knapsack";
    m.maximize = true;
    const int a = m.add_binary("a", 6.0);
    const int b = m.add_binary("b", 5.0);
    const int c = m.add_binary("c", 4.0);
    m.add_row("cap", -kInf, 5.0, {{a, 2.0}, {b, 3.0}, {c, 4.0}});

    const auto sol = solve_milp(m);
    CHECK(sol.objective == Catch::Approx(11.0).margin(1e-9));
    CHECK(sol.value(a) > 0.5);
    CHECK(sol.value(b) > 0.5);
    CHECK(sol.value(c) < 0.5);
}

TEST_CASE("continuous model agrees between the two solvers") {
    // min x + 2y  s.t. x + y >= 2, x - y <= 1, 0 <= x,y <= 3.
    Milp m;
    const int x = m.add_col("x", 0.0, 3.0, 1.0);
    const int y = m.add_col("y", 0.0, 3.0, 2.0);
    m.add_row("r1", 2.0, kInf, {{x, 1.0}, {y, 1.0}});
    m.add_row("r2", -kInf, 1.0, {{x, 1.0}, {y, -1.0}});

    const auto hs = solve_milp(m);
    const auto ref = solve_lp_reference(m);
    CHECK(hs.objective == Catch::Approx(2.5).margin(1e-8));
    CHECK(ref.objective == Catch::Approx(2.5).margin(1e-8));
    CHECK(ref.value(x) == Catch::Approx(1.5).margin(1e-8));
    CHECK(ref.value(y) == Catch::Approx(0.5).margin(1e-8));
}

TEST_CASE("reference simplex handles upper-bound flips and free variables") {
    // max x + y with x in [0,1], y free but pinned by an equality.
    Milp m;
    m.maximize = true;
    const int x = m.add_col("x", 0.0, 1.0, 1.0);
    const int y = m.add_col("y", -kInf, kInf, 1.0);
    m.add_row("pin", 0.5, 0.5, {{y, 1.0}, {x, -1.0}});  // y = x + 0.5

    const auto ref = solve_lp_reference(m);
    CHECK(ref.value(x) == Catch::Approx(1.0).margin(1e-9));
    CHECK(ref.value(y) == Catch::Approx(1.5).margin(1e-9));
    CHECK(ref.objective == Catch::Approx(2.5).margin(1e-9));
}

TEST_CASE("reference simplex reports infeasibility") {
    Milp m;
    const int x = m.add_col("x", 0.0, 1.0, 1.0);
    m.add_row("low", 2.0, kInf, {{x, 1.0}});
    CHECK_THROWS_AS(solve_lp_reference(m), SolveError);
}

TEST_CASE("random LPs: reference simplex matches the MILP backend") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int inst = 0; inst < 200; ++inst) {
        const int n = 3 + static_cast<int>(unit(gen) * 6.0);
        const int rows = 2 + static_cast<int>(unit(gen) * 5.0);
        Milp m;
        std::vector<double> x0;
        for (int j = 0; j < n; ++j) {
            const double lo = -5.0 * unit(gen);
            const double hi = 5.0 * unit(gen);
            m.add_col("x" + std::to_string(j), lo, hi, 6.0 * unit(gen) - 3.0);
            x0.push_back(lo + (hi - lo) * unit(gen));  // guaranteed-feasible anchor
        }
        for (int r = 0; r < rows; ++r) {
            std::vector<std::pair<int, double>> coefs;
            double at_anchor = 0.0;
            for (int j = 0; j < n; ++j) {
                if (unit(gen) < 0.4) continue;
                const double coef = 4.0 * unit(gen) - 2.0;
                coefs.emplace_back(j, coef);
                at_anchor += coef * x0[static_cast<size_t>(j)];
            }
            if (coefs.empty()) coefs.emplace_back(0, 1.0), at_anchor = x0[0];
            const double kind = unit(gen);
            if (kind < 0.4)
                m.add_row("r" + std::to_string(r), -kInf, at_anchor + 3.0 * unit(gen),
                          std::move(coefs));
            else if (kind < 0.8)
                m.add_row("r" + std::to_string(r), at_anchor - 3.0 * unit(gen), kInf,
                          std::move(coefs));
            else
                m.add_row("r" + std::to_string(r), at_anchor, at_anchor, std::move(coefs));
        }
        const auto hs = solve_milp(m);
        const auto ref = solve_lp_reference(m);
        INFO("instance " << inst);
        CHECK(ref.objective ==
              Catch::Approx(hs.objective).margin(1e-6 * std::max(1.0, std::abs(hs.objective))));
    }
}

TEST_CASE("LP format writer emits the standard sections") {
    Milp m;
    m.name = "writer-smoke";
    const int x = m.add_col("x", 0.0, 2.0, 1.5);
    const int b = m.add_binary("flag", -1.0);
    m.add_row("mix", -kInf, 4.0, {{x, 2.0}, {b, 1.0}});
    m.add_row("range", 1.0, 3.0, {{x, 1.0}});
    m.add_row("fixed", 2.0, 2.0, {{x, 1.0}, {b, 2.0}});

    std::ostringstream os;
    write_lp_format(m, os);
    const std::string text = os.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
    CHECK(text.find("Generals") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
    CHECK(text.find("mix:") != std::string::npos);
    CHECK(text.find("range_ub:") != std::string::npos);
    CHECK(text.find("range_lb:") != std::string::npos);
    CHECK(text.find("fixed:") != std::string::npos);
    CHECK(text.find("flag") != std::string::npos);
}

TEST_CASE("MILP backend surfaces infeasibility as SolveError") {
    Milp m;
    m.name = "infeasible";
    const int x = m.add_binary("x");
    m.add_row("impossible", 2.0, kInf, {{x, 1.0}});
    CHECK_THROWS_AS(solve_milp(m), SolveError);
}
