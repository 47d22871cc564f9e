#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "distill/error.hpp"
#include "distill/lp.hpp"
#include "distill/milp.hpp"

using namespace distill;

namespace {

struct Plane {
  std::array<double, 3> a;
  double b;
};

bool solve3(const std::array<Plane, 3>& p, std::array<double, 3>& x) {
  auto det = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  std::array<std::array<double, 3>, 3> m{};
  for (int r = 0; r < 3; ++r) m[r] = p[r].a;
  const double d = det(m);
  if (std::abs(d) < 1e-9) return false;
  for (int c = 0; c < 3; ++c) {
    auto mc = m;
    for (int r = 0; r < 3; ++r) mc[r][c] = p[r].b;
    x[c] = det(mc) / d;
  }
  return true;
}

// Minimum of c.x over {A x <= b, 0 <= x <= 10} by visiting every vertex.
double vertex_minimum(const std::vector<Plane>& rows, const std::array<double, 3>& c, bool& feasible) {
  std::vector<Plane> all = rows;
  for (int i = 0; i < 3; ++i) {
    Plane lo{{0, 0, 0}, 0};
    lo.a[i] = -1;
    all.push_back(lo);
    Plane hi{{0, 0, 0}, 10};
    hi.a[i] = 1;
    all.push_back(hi);
  }
  double best = kInfinity;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      for (std::size_t k = j + 1; k < all.size(); ++k) {
        std::array<double, 3> x{};
        if (!solve3({all[i], all[j], all[k]}, x)) continue;
        bool ok = true;
        for (const auto& p : all) ok = ok && p.a[0] * x[0] + p.a[1] * x[1] + p.a[2] * x[2] <= p.b + 1e-7;
        if (ok) best = std::min(best, c[0] * x[0] + c[1] * x[1] + c[2] * x[2]);
      }
  feasible = best < kInfinity;
  return best;
}

}  // namespace

TEST_CASE("simplex on a textbook problem") {
  // min -3x - 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), -36
  LinearProgram lp;
  auto x = lp.add_variable("x", 0, kInfinity, -3);
  auto y = lp.add_variable("y", 0, kInfinity, -5);
  lp.add_row("c1", {{x, 1}}, RowSense::LessEqual, 4);
  lp.add_row("c2", {{y, 2}}, RowSense::LessEqual, 12);
  lp.add_row("c3", {{x, 3}, {y, 2}}, RowSense::LessEqual, 18);
  auto r = SimplexSolver().solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-36));
  CHECK(r.x[x] == doctest::Approx(2));
  CHECK(r.x[y] == doctest::Approx(6));
  CHECK(lp.max_violation(r.x) < 1e-9);
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
  LinearProgram infeasible;
  auto x = infeasible.add_variable("x", 0, 1, 1);
  infeasible.add_row("c", {{x, 1}}, RowSense::GreaterEqual, 2);
  CHECK(SimplexSolver().solve(infeasible).status == LpStatus::Infeasible);

  LinearProgram unbounded;
  auto y = unbounded.add_variable("y", 0, kInfinity, -1);
  unbounded.add_row("c", {{y, 1}}, RowSense::GreaterEqual, 1);
  CHECK(SimplexSolver().solve(unbounded).status == LpStatus::Unbounded);

  LinearProgram shifted;  // negative lower bound, equality row, free offset
  auto z = shifted.add_variable("z", -5, 5, 1);
  auto w = shifted.add_variable("w", 0, kInfinity, 2);
  shifted.add_row("e", {{z, 1}, {w, 1}}, RowSense::Equal, -2);
  shifted.objective_offset = 10;
  auto r = SimplexSolver().solve(shifted);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(8));
}

TEST_CASE("simplex matches vertex enumeration on random 3-variable problems") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-5, 5);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Plane> rows;
    const int m = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < m; ++i) rows.push_back({{u(rng), u(rng), u(rng)}, u(rng) * 3});
    std::array<double, 3> c{u(rng), u(rng), u(rng)};
    bool feasible = false;
    const double expected = vertex_minimum(rows, c, feasible);

    LinearProgram lp;
    for (int i = 0; i < 3; ++i) lp.add_variable("x" + std::to_string(i), 0, 10, c[i]);
    for (const auto& p : rows) lp.add_row("r", {{0, p.a[0]}, {1, p.a[1]}, {2, p.a[2]}}, RowSense::LessEqual, p.b);
    auto r = SimplexSolver().solve(lp);
    CAPTURE(trial);
    if (!feasible) {
      CHECK(r.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(expected).epsilon(1e-7));
    CHECK(lp.max_violation(r.x) < 1e-7);
    ++compared;
  }
  CHECK(compared > 100);
}

TEST_CASE("branch and bound matches enumeration on random binary programs") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    const std::size_t n = 3 + rng() % 8;
    LinearProgram lp;
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i) {
      cost[i] = static_cast<double>(static_cast<int>(rng() % 21) - 10);
      lp.add_variable("b" + std::to_string(i), 0, 1, cost[i], true);
    }
    std::vector<std::vector<double>> a;
    std::vector<double> rhs;
    for (int r = 0; r < 3; ++r) {
      std::vector<double> row(n);
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t i = 0; i < n; ++i) {
        row[i] = static_cast<double>(rng() % 7);
        terms.push_back({i, row[i]});
      }
      a.push_back(row);
      rhs.push_back(static_cast<double>(rng() % (3 * n)));
      lp.add_row("k", terms, RowSense::LessEqual, rhs.back());
    }
    double best = kInfinity;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      bool ok = true;
      for (std::size_t r = 0; r < a.size(); ++r) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1u) * a[r][i];
        ok = ok && s <= rhs[r];
      }
      if (!ok) continue;
      double v = 0;
      for (std::size_t i = 0; i < n; ++i) v += (mask >> i & 1u) * cost[i];
      best = std::min(best, v);
    }
    auto result = solve_milp(lp);
    REQUIRE(result.status == MilpStatus::Optimal);
    CHECK(result.objective == doctest::Approx(best).epsilon(1e-9));
    for (std::size_t i = 0; i < n; ++i) CHECK((result.x[i] == 0.0 || result.x[i] == 1.0));
  }
}

TEST_CASE("branch and bound guards") {
  LinearProgram lp;
  for (int i = 0; i < 5; ++i) lp.add_variable("b", 0, 1, -1, true);
  MilpOptions small;
  small.max_integers = 4;
  CHECK_THROWS_AS(solve_milp(lp, small), SolverLimitError);

  LinearProgram infeasible;
  auto x = infeasible.add_variable("x", 0, 1, 1, true);
  infeasible.add_row("c", {{x, 2}}, RowSense::Equal, 1);
  CHECK(solve_milp(infeasible).status == MilpStatus::Infeasible);

  SimplexOptions tight;
  tight.max_iterations = 1;
  LinearProgram two;
  auto p = two.add_variable("p", 0, kInfinity, -1);
  auto q = two.add_variable("q", 0, kInfinity, -1);
  two.add_row("a", {{p, 1}, {q, 2}}, RowSense::LessEqual, 4);
  two.add_row("b", {{p, 3}, {q, 1}}, RowSense::LessEqual, 6);
  CHECK_THROWS_AS(SimplexSolver(tight).solve(two), SolverLimitError);
}

TEST_CASE("LP text round trip") {
  LinearProgram lp;
  auto x = lp.add_variable("x", 0, 1, 2.5, true);
  auto y = lp.add_variable("y", -3, 7, -1);
  auto z = lp.add_variable("z", 0, kInfinity, 0.125);
  lp.add_row("r1", {{x, 1}, {y, -2}}, RowSense::LessEqual, 4);
  lp.add_row("r2", {{y, 1}, {z, 1}}, RowSense::GreaterEqual, -1);
  lp.add_row("r3", {{x, 1}, {z, 3}}, RowSense::Equal, 2);
  const auto text = to_lp_text(lp);
  auto back = parse_lp_text(text);
  CHECK(to_lp_text(back) == text);
  REQUIRE(back.variables.size() == 3);
  CHECK(back.variables[0].integer);
  CHECK(back.variables[1].lower == -3);
  auto a = SimplexSolver().solve(lp), b = SimplexSolver().solve(back);
  CHECK(a.objective == doctest::Approx(b.objective));
  CHECK_THROWS_AS(parse_lp_text("Maximize\n obj: x\nEnd\n"), DataError);
}
