#include "fundbench/lp_solver.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>

using namespace fundbench::lp;
using testsupport::Rng;

namespace {

void check_feasible(const LinearProgram& lp, const LpSolution& sol) {
    REQUIRE(sol.optimal());
    REQUIRE(sol.primal_values.size() == lp.num_vars());
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        CHECK(sol.primal_values[j] >= lp.lower_bound(j) - 1e-9);
    }
    for (const auto& c : lp.constraints()) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < lp.num_vars(); ++j) lhs += c.coeffs[j] * sol.primal_values[j];
        switch (c.relation) {
            case Relation::LessEqual: CHECK(lhs <= c.rhs + 1e-7); break;
            case Relation::GreaterEqual: CHECK(lhs >= c.rhs - 1e-7); break;
            case Relation::Equal: CHECK(std::abs(lhs - c.rhs) <= 1e-7); break;
        }
    }
}

// Gaussian elimination with partial pivoting; nullopt when singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (std::abs(a[piv][col]) < 1e-10) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = b[k] / a[k][k];
    return x;
}

// Enumerates every vertex of {Ax (rel) b, x >= 0} and returns the best
// objective, or nullopt when no vertex is feasible. The polytope must be
// bounded for this to be the optimum.
std::optional<double> vertex_oracle(const LinearProgram& lp) {
    const std::size_t n = lp.num_vars();
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (const auto& c : lp.constraints()) {
        rows.push_back(c.coeffs);
        rhs.push_back(c.rhs);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    auto feasible = [&](const std::vector<double>& x) {
        for (std::size_t j = 0; j < n; ++j) {
            if (x[j] < -1e-9) return false;
        }
        for (const auto& c : lp.constraints()) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) lhs += c.coeffs[j] * x[j];
            if (c.relation == Relation::LessEqual && lhs > c.rhs + 1e-9) return false;
            if (c.relation == Relation::GreaterEqual && lhs < c.rhs - 1e-9) return false;
            if (c.relation == Relation::Equal && std::abs(lhs - c.rhs) > 1e-9) return false;
        }
        return true;
    };
    std::optional<double> best;
    const std::size_t total = rows.size();
    // Iterate over all n-subsets of the rows.
    std::vector<bool> mask(total, false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(n), true);
    do {
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        for (std::size_t k = 0; k < total; ++k) {
            if (mask[k]) {
                a.push_back(rows[k]);
                b.push_back(rhs[k]);
            }
        }
        auto x = solve_square(a, b);
        if (!x || !feasible(*x)) continue;
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += lp.objective()[j] * (*x)[j];
        if (!best) best = obj;
        else if (lp.sense() == Sense::Maximize) best = std::max(*best, obj);
        else best = std::min(*best, obj);
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return best;
}

// Builds the dual of a program with >=0 or free variables. A minimization
// primal is handled as the negated maximization of -c.
LinearProgram dual_of(const LinearProgram& p, double& sign) {
    std::vector<double> c = p.objective();
    sign = 1.0;
    if (p.sense() == Sense::Minimize) {
        for (double& v : c) v = -v;
        sign = -1.0;
    }
    const std::size_t m = p.num_constraints();
    const std::size_t n = p.num_vars();
    // Dual variable y_i: >= 0 for <=, <= 0 for >= (stored negated as y' >= 0), free for =.
    std::vector<double> flip(m, 1.0);
    std::vector<double> obj(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (p.constraints()[i].relation == Relation::GreaterEqual) flip[i] = -1.0;
        obj[i] = flip[i] * p.constraints()[i].rhs;
    }
    LinearProgram d(Sense::Minimize, obj);
    for (std::size_t i = 0; i < m; ++i) {
        if (p.constraints()[i].relation == Relation::Equal) d.set_lower_bound(i, kFree);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(m);
        for (std::size_t i = 0; i < m; ++i) row[i] = flip[i] * p.constraints()[i].coeffs[j];
        d.add_constraint(row, p.lower_bound(j) == kFree ? Relation::Equal : Relation::GreaterEqual, c[j]);
    }
    return d;
}

// A feasible, bounded program: rows are built around a known feasible point
// and every variable is boxed to [-10, 10].
LinearProgram random_bounded_lp(Rng& rng, int n, int m) {
    std::vector<double> c(static_cast<std::size_t>(n));
    for (double& v : c) v = rng.uniform(-5, 5);
    LinearProgram lp(rng.coin() ? Sense::Maximize : Sense::Minimize, c);
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const bool free = rng.coin(0.25);
        if (free) lp.set_lower_bound(static_cast<std::size_t>(j), kFree);
        x0[static_cast<std::size_t>(j)] = free ? rng.uniform(-3, 3) : rng.uniform(0, 3);
    }
    for (int i = 0; i < m; ++i) {
        std::vector<double> a(static_cast<std::size_t>(n));
        double ax = 0.0;
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(j)] = rng.uniform(-4, 4);
            ax += a[static_cast<std::size_t>(j)] * x0[static_cast<std::size_t>(j)];
        }
        const int kind = rng.integer(0, 5);
        if (kind == 0) lp.add_constraint(a, Relation::Equal, ax);
        else if (kind <= 2) lp.add_constraint(a, Relation::GreaterEqual, ax - rng.uniform(0, 2));
        else lp.add_constraint(a, Relation::LessEqual, ax + rng.uniform(0, 2));
    }
    // Box every variable so the optimum is finite.
    for (int j = 0; j < n; ++j) {
        std::vector<double> e(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        lp.add_constraint(e, Relation::LessEqual, 10.0);
        e[static_cast<std::size_t>(j)] = -1.0;
        lp.add_constraint(e, Relation::LessEqual, 10.0);
    }
    return lp;
}

}  // namespace

TEST_CASE("single bound binds") {
    LinearProgram lp(Sense::Maximize, {1.0});
    lp.add_constraint({1.0}, Relation::LessEqual, 5.0);
    const auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(*sol.objective_value == doctest::Approx(5.0).epsilon(1e-12));
    check_feasible(lp, sol);
}

TEST_CASE("contradictory bounds are infeasible") {
    LinearProgram lp(Sense::Maximize, {1.0});
    lp.add_constraint({1.0}, Relation::GreaterEqual, 1.0);
    lp.add_constraint({1.0}, Relation::LessEqual, 0.0);
    const auto sol = solve(lp);
    CHECK(sol.status == Status::Infeasible);
    CHECK_FALSE(sol.objective_value.has_value());
    CHECK(sol.primal_values.empty());
}

TEST_CASE("degenerate optimal face has a unique value") {
    LinearProgram lp(Sense::Maximize, {1.0, 1.0});
    lp.add_constraint({1.0, 1.0}, Relation::LessEqual, 1.0);
    const auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(*sol.objective_value == doctest::Approx(1.0).epsilon(1e-12));
    check_feasible(lp, sol);
}

TEST_CASE("unbounded program is reported") {
    LinearProgram lp(Sense::Maximize, {1.0, -1.0});
    lp.add_constraint({-1.0, 1.0}, Relation::LessEqual, 2.0);
    CHECK(solve(lp).status == Status::Unbounded);
}

TEST_CASE("minimization with equality and free variable") {
    // min x + y  s.t. x - y = 3, y >= -2 expressed through a free y and a row.
    LinearProgram lp(Sense::Minimize, {1.0, 1.0});
    lp.set_lower_bound(1, kFree);
    lp.add_constraint({1.0, -1.0}, Relation::Equal, 3.0);
    lp.add_constraint({0.0, 1.0}, Relation::GreaterEqual, -2.0);
    const auto sol = solve(lp);
    REQUIRE(sol.optimal());
    // x = 1, y = -2
    CHECK(*sol.objective_value == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sol.primal_values[0] == doctest::Approx(1.0));
    CHECK(sol.primal_values[1] == doctest::Approx(-2.0));
}

TEST_CASE("finite nonzero lower bound is respected") {
    LinearProgram lp(Sense::Minimize, {2.0, 3.0});
    lp.set_lower_bound(0, 1.5);
    lp.set_lower_bound(1, 0.25);
    const auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(*sol.objective_value == doctest::Approx(3.75));
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram base(Sense::Maximize, {1.0, 2.0});
    {
        LinearProgram lp = base;
        lp.add_constraint({1.0}, Relation::LessEqual, 1.0);
        CHECK_THROWS_AS(solve(lp), MalformedProgram);
    }
    {
        LinearProgram lp = base;
        lp.add_constraint({1.0, std::nan("")}, Relation::LessEqual, 1.0);
        CHECK_THROWS_AS(lp.validate(), MalformedProgram);
    }
    {
        LinearProgram lp = base;
        lp.add_constraint({1.0, 1.0}, Relation::LessEqual, std::numeric_limits<double>::infinity());
        CHECK_THROWS_AS(solve(lp), MalformedProgram);
    }
    CHECK_THROWS_AS(solve(LinearProgram(Sense::Maximize, {std::numeric_limits<double>::infinity()})),
                    MalformedProgram);
    CHECK_THROWS_AS(solve_lexicographic(base, std::vector<double>{1.0}), MalformedProgram);
}

TEST_CASE("lexicographic: independent objectives") {
    LinearProgram lp(Sense::Maximize, {1.0, 0.0});
    lp.add_constraint({1.0, 0.0}, Relation::LessEqual, 1.0);
    lp.add_constraint({0.0, 1.0}, Relation::LessEqual, 1.0);
    const auto sol = solve_lexicographic(lp, std::vector<double>{0.0, 1.0});
    REQUIRE(sol.optimal());
    CHECK(sol.primal_values[0] == doctest::Approx(1.0));
    CHECK(sol.primal_values[1] == doctest::Approx(1.0));
}

TEST_CASE("lexicographic: secondary picks a vertex of the optimal face") {
    LinearProgram lp(Sense::Maximize, {1.0, 1.0});
    lp.add_constraint({1.0, 1.0}, Relation::LessEqual, 1.0);
    const auto sol = solve_lexicographic(lp, std::vector<double>{0.0, 1.0});
    REQUIRE(sol.optimal());
    CHECK(sol.primal_values[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.primal_values[1] == doctest::Approx(1.0));
    CHECK(*sol.objective_value == doctest::Approx(1.0));
}

TEST_CASE("lexicographic: infeasible primary") {
    LinearProgram lp(Sense::Maximize, {1.0});
    lp.add_constraint({1.0}, Relation::GreaterEqual, 2.0);
    lp.add_constraint({1.0}, Relation::LessEqual, 1.0);
    CHECK(solve_lexicographic(lp, std::vector<double>{1.0}).status == Status::Infeasible);
}

TEST_CASE("random small programs match vertex enumeration") {
    Rng rng(1234);
    int compared = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = rng.integer(1, 3);
        const int m = rng.integer(1, 4);
        std::vector<double> c(static_cast<std::size_t>(n));
        for (double& v : c) v = rng.uniform(-5, 5);
        LinearProgram lp(rng.coin() ? Sense::Maximize : Sense::Minimize, c);
        for (int i = 0; i < m; ++i) {
            std::vector<double> a(static_cast<std::size_t>(n));
            for (double& v : a) v = rng.uniform(-3, 3);
            const int kind = rng.integer(0, 4);
            const Relation rel = kind == 0 ? Relation::Equal : kind == 1 ? Relation::GreaterEqual : Relation::LessEqual;
            lp.add_constraint(a, rel, rng.uniform(-2, 6));
        }
        for (int j = 0; j < n; ++j) {
            std::vector<double> e(static_cast<std::size_t>(n), 0.0);
            e[static_cast<std::size_t>(j)] = 1.0;
            lp.add_constraint(e, Relation::LessEqual, rng.uniform(1, 8));
        }
        const auto oracle = vertex_oracle(lp);
        const auto sol = solve(lp);
        if (!oracle) {
            CHECK(sol.status == Status::Infeasible);
            continue;
        }
        REQUIRE(sol.optimal());
        check_feasible(lp, sol);
        CHECK(std::abs(*sol.objective_value - *oracle) <= 1e-7);
        ++compared;
    }
    CHECK(compared > 100);
}

TEST_CASE("random programs satisfy strong duality") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.integer(1, 8);
        const int m = rng.integer(1, 8 - (n > 4 ? 4 : 0));
        const LinearProgram p = random_bounded_lp(rng, n, m);
        double sign = 1.0;
        const LinearProgram d = dual_of(p, sign);
        const auto ps = solve(p);
        const auto ds = solve(d);
        REQUIRE(ps.optimal());
        REQUIRE(ds.optimal());
        check_feasible(p, ps);
        CHECK(std::abs(*ps.objective_value - sign * *ds.objective_value) <= 1e-6);
    }
}

TEST_CASE("solve is deterministic") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const LinearProgram p = random_bounded_lp(rng, 6, 6);
        const auto a = solve(p);
        const auto b = solve(p);
        REQUIRE(a.status == b.status);
        CHECK(a.primal_values == b.primal_values);
        CHECK(a.iterations == b.iterations);
    }
}

TEST_CASE("status names") {
    CHECK(to_string(Status::Optimal) == "optimal");
    CHECK(to_string(Status::Infeasible) == "infeasible");
    CHECK(to_string(Status::Unbounded) == "unbounded");
}
