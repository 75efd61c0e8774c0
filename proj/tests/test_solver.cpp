#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>

#include "polygreen/ball_oracle.hpp"
#include "polygreen/solver.hpp"

using namespace polygreen;

TEST_CASE("stencils: 5-point, 13-point, symmetry") {
  auto s1 = polyharmonic_stencil(2, 1);
  REQUIRE(s1.size() == 5);
  for (const auto& e : s1) {
    int r = std::abs(e.offset[0]) + std::abs(e.offset[1]);
    if (r == 0) CHECK(e.coeff == doctest::Approx(4.0));
    else CHECK(e.coeff == doctest::Approx(-1.0));
  }
  auto s2 = polyharmonic_stencil(2, 2);
  REQUIRE(s2.size() == 13);
  for (const auto& e : s2) {
    int ax = std::abs(e.offset[0]), ay = std::abs(e.offset[1]);
    if (ax + ay == 0) CHECK(e.coeff == doctest::Approx(20.0));
    if (ax + ay == 1) CHECK(e.coeff == doctest::Approx(-8.0));
    if (ax == 1 && ay == 1) CHECK(e.coeff == doctest::Approx(2.0));
    if (ax + ay == 2 && ax * ay == 0) CHECK(e.coeff == doctest::Approx(1.0));
  }

  auto dom = std::make_shared<Domain>(Domain::rectangle({1.0, 1.0}));
  auto grid = GridSpec::make(dom, 1.0 / 16);
  DiscreteOperator op = assemble_operator(grid, 2);
  SpMatRow diff = op.matrix() - SpMatRow(op.matrix().transpose());
  CHECK(diff.coeffs().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  // interior row carries the full 13-point stencil with center 20/h^4
  Coords center = grid->snap(Point{0.5, 0.5});
  long idx = grid->interior_index(center);
  CHECK(op.matrix().coeff(idx, idx) == doctest::Approx(20.0 * std::pow(16.0, 4)));
}

TEST_CASE("grid too coarse is rejected") {
  auto thin = std::make_shared<Domain>(Domain::ellipse(1.0, 0.05));
  CHECK_THROWS_AS(assemble_operator(GridSpec::make(thin, 1.0 / 32), 1), Error);
}

TEST_CASE("homogeneous problem and inverse consistency") {
  auto dom = std::make_shared<Domain>(Domain::rectangle({1.0, 1.0}));
  auto grid = GridSpec::make(dom, 1.0 / 32);
  DiscreteOperator op = assemble_operator(grid, 2);
  DiscreteField zero(grid);
  CHECK(solve_dirichlet(op, zero).values().norm() == doctest::Approx(0.0));

  DiscreteField w = DiscreteField::sample(grid, [](const Point& x) {
    double bump = [](double t) {
      return t <= 0.25 ? 0.0 : (t >= 0.75 ? 0.0 : std::pow((t - 0.25) * (0.75 - t), 3));
    }(x[0]);
    return bump * std::sin(7 * x[1]) * std::exp(x[0]);
  });
  DiscreteField Aw = op.apply(w);
  DiscreteField w2 = solve_dirichlet(op, Aw);
  double rel = (w2.values() - w.values()).norm() / w.values().norm();
  CHECK(rel <= 1e-9);
}

TEST_CASE("torsion peak in the unit disk") {
  auto dom = std::make_shared<Domain>(Domain::unit_ball(2));
  auto grid = GridSpec::make(dom, 1.0 / 128);
  DiscreteOperator op = assemble_operator(grid, 1);
  DiscreteField one = DiscreteField::sample(grid, [](const Point&) { return 1.0; });
  DiscreteField u = solve_dirichlet(op, one);
  double center = u.at(grid->snap(Point{0.0, 0.0}));
  CHECK(center == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("discrete Green column: symmetry, impulse scaling, snap report") {
  auto dom = std::make_shared<Domain>(Domain::unit_ball(2));
  auto grid = GridSpec::make(dom, 1.0 / 48);
  DiscreteOperator op = assemble_operator(grid, 2);
  GreenColumn a = discrete_green(op, Point{0.31, 0.12});
  GreenColumn b = discrete_green(op, Point{-0.22, 0.41});
  CHECK(a.snap_distance <= grid->h());
  double gab = a.field.at(grid->snap(b.y));
  double gba = b.field.at(grid->snap(a.y));
  double sup = std::max(a.field.values().cwiseAbs().maxCoeff(),
                        b.field.values().cwiseAbs().maxCoeff());
  CHECK(std::abs(gab - gba) <= 1e-10 * sup);
  CHECK_THROWS_AS(discrete_green(op, Point{0.999, 0.0}), Error);
}

TEST_CASE("Green column matches the images oracle in the disk") {
  auto dom = std::make_shared<Domain>(Domain::unit_ball(2));
  BallOracle oracle = BallOracle::make(1, 2);
  double errs[2];
  int li = 0;
  for (double h : {1.0 / 64, 1.0 / 128}) {
    auto grid = GridSpec::make(dom, h);
    DiscreteOperator op = assemble_operator(grid, 1);
    GreenColumn g = discrete_green(op, Point{0.2, 0.1});
    OracleCompareReport rep = oracle_compare(g.field, oracle, g.y, 8.0 * h);
    errs[li++] = rep.max_error_rel_sup;
  }
  CHECK(errs[1] <= 0.02);
  CHECK(errs[1] < errs[0]);
}

TEST_CASE("regular part: constant value at the disk center source") {
  // images in 2D: S(x, 0) = -log(2)/(2 pi) for the unit disk with diam = 2
  auto dom = std::make_shared<Domain>(Domain::unit_ball(2));
  DimensionParams params = DimensionParams::make(1, 2);
  const double expect = -std::log(2.0) / (2.0 * kPi);
  double adjacent[2];
  int li = 0;
  for (double h : {1.0 / 32, 1.0 / 64}) {
    auto grid = GridSpec::make(dom, h);
    DiscreteOperator op = assemble_operator(grid, 1);
    GreenColumn g = discrete_green(op, Point{0.0, 0.0});
    DiscreteField s = regular_part(g, params, 2.0);
    const auto& coords = grid->interior_coords();
    double worst = 0;
    for (long k = 0; k < grid->num_interior(); ++k) {
      Point x = grid->node_point(coords[k]);
      if (dom->distance_to_boundary(x) < 8.0 * h) continue;
      if (dist(x, g.y) < 8.0 * h) continue;  // lattice-scale near field excluded
      worst = std::max(worst, std::abs(s.values()[k] - expect));
    }
    if (h == 1.0 / 64) CHECK(worst <= 0.02 * std::abs(expect));
    // nodes adjacent to the source: finite, stable under refinement
    double adj = 0;
    for (int d = 0; d < 2; ++d)
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        Coords c = g.y_coords;
        c[d] += sgn;
        adj = std::max(adj, std::abs(s.at(c)));
      }
    adjacent[li++] = adj;
  }
  CHECK(std::isfinite(adjacent[0]));
  CHECK(std::isfinite(adjacent[1]));
  CHECK(adjacent[1] == doctest::Approx(adjacent[0]).epsilon(0.10));
}

TEST_CASE("regular part near the boundary equals minus the kernel") {
  auto dom = std::make_shared<Domain>(Domain::unit_ball(2));
  auto grid = GridSpec::make(dom, 1.0 / 64);
  DiscreteOperator op = assemble_operator(grid, 1);
  GreenColumn g = discrete_green(op, Point{0.0, 0.0});
  DimensionParams params = DimensionParams::make(1, 2);
  DiscreteField s = regular_part(g, params, 2.0);
  const auto& coords = grid->interior_coords();
  double supg = g.field.values().cwiseAbs().maxCoeff();
  for (long k = 0; k < grid->num_interior(); ++k) {
    Point x = grid->node_point(coords[k]);
    if (dom->distance_to_boundary(x) > 1.5 / 64) continue;
    Point z = x - g.y;
    // S + Gamma = G, small near the clamped boundary
    CHECK(std::abs(s.values()[k] + gamma_eval(params, z, 2.0)) <= 0.05 * supg);
  }
}

TEST_CASE("mixed derivatives: exactness and kernel consistency") {
  auto dom = std::make_shared<Domain>(Domain::rectangle({1.0, 1.0}));
  auto grid = GridSpec::make(dom, 1.0 / 32);
  DiscreteField constf = DiscreteField::sample(grid, [](const Point&) { return 3.5; });
  Coords c = grid->snap(Point{0.5, 0.5});
  CHECK(gradient_norm_at(constf, c, 1, MultiIndex::zero(2)) == doctest::Approx(0.0));

  DiscreteField quad = DiscreteField::sample(grid, [](const Point& x) { return x[0] * x[0]; });
  MultiIndex d2x = MultiIndex::unit(2, 0, 2);
  CHECK(derivative_at(quad, c, d2x) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gradient_norm_at(quad, c, 1, MultiIndex::unit(2, 0)) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // sampled kernel away from its singularity vs the symbolic derivative
  DimensionParams p23 = DimensionParams::make(2, 3);
  auto dom3 = std::make_shared<Domain>(Domain::unit_ball(3));
  double errs[2];
  int li = 0;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    auto g3 = GridSpec::make(dom3, h);
    DiscreteField gam = DiscreteField::sample(g3, [&](const Point& x) {
      Point z = x - Point{0.52, 0.0, 0.0};
      return z.norm() < 1e-12 ? 0.0 : gamma_eval(p23, z, 2.0);
    });
    Coords cc = g3->snap(Point{-0.25, 0.125, 0.0});
    Point z = g3->node_point(cc) - Point{0.52, 0.0, 0.0};
    double exact = gamma_derivative(p23, MultiIndex::unit(3, 0), MultiIndex::zero(3), z, 2.0);
    errs[li++] = std::abs(derivative_at(gam, cc, MultiIndex::unit(3, 0)) - exact);
  }
  CHECK(errs[1] <= errs[0] / 3.0);  // about O(h^2)
}

TEST_CASE("energy norm: homogeneity and the product-sine reference") {
  auto dom = std::make_shared<Domain>(Domain::rectangle({1.0, 1.0}));
  auto grid = GridSpec::make(dom, 1.0 / 128);
  DiscreteField zero(grid);
  CHECK(energy_norm(zero, 1) == doctest::Approx(0.0));
  DiscreteField u = DiscreteField::sample(grid, [](const Point& x) {
    return std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
  });
  DiscreteField u2(grid, 2.0 * u.values());
  CHECK(energy_norm(u2, 1) == doctest::Approx(2.0 * energy_norm(u, 1)).epsilon(1e-12));
  // closed form: squared gradient integrates to pi^2/2 over the unit square
  CHECK(energy_norm(u, 1) == doctest::Approx(kPi / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("hardy ratio basics") {
  auto dom = std::make_shared<Domain>(Domain::rectangle({1.0, 1.0}));
  auto grid = GridSpec::make(dom, 1.0 / 64);
  DiscreteField zero(grid);
  CHECK_THROWS_AS(hardy_ratio(zero, 2, Point{0.0, 0.0}), Error);
  DiscreteField v = DiscreteField::sample(grid, [](const Point& x) {
    double t = dist(x, Point{0.5, 0.5}) / 0.3;
    return t >= 1.0 ? 0.0 : std::pow(1.0 - t * t, 6);
  });
  Point corner{0.0, 0.0};
  double r1 = hardy_ratio(v, 2, corner);
  DiscreteField v2(grid, 2.0 * v.values());
  CHECK(hardy_ratio(v2, 2, corner) == doctest::Approx(r1).epsilon(1e-12));
  CHECK(r1 > 0.0);
  CHECK(std::isfinite(r1));
}

TEST_CASE("multigrid backend agrees with the direct factorization") {
  auto dom = std::make_shared<Domain>(Domain::unit_ball(3));
  auto grid = GridSpec::make(dom, 1.0 / 12);
  for (int m : {1, 2}) {
    DiscreteOperator direct = assemble_operator(grid, m, DiscreteOperator::Backend::direct);
    DiscreteOperator mg = assemble_operator(grid, m, DiscreteOperator::Backend::multigrid);
    CHECK(direct.uses_direct());
    CHECK_FALSE(mg.uses_direct());
    DiscreteField rhs = DiscreteField::sample(grid, [](const Point& x) {
      return std::exp(x[0]) * (1.0 - x.norm2());
    });
    DiscreteField ud = solve_dirichlet(direct, rhs);
    DiscreteField um = solve_dirichlet(mg, rhs);
    double rel = (ud.values() - um.values()).norm() / ud.values().norm();
    INFO("m=" << m << " rel=" << rel);
    CHECK(rel <= 1e-8);
  }
}

TEST_CASE("field dump and csv slice") {
  auto dom = std::make_shared<Domain>(Domain::rectangle({1.0, 1.0}));
  auto grid = GridSpec::make(dom, 1.0 / 16);
  DiscreteField f = DiscreteField::sample(grid, [](const Point& x) { return x[0] + x[1]; });
  dump_field(f, "test_dump.bin");
  csv_slice(f, "test_slice.csv");
  std::ifstream in("test_dump.bin", std::ios::binary);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header.substr(0, 1) == "2");
  // payload size = lattice size doubles
  auto pos = in.tellg();
  in.seekg(0, std::ios::end);
  long payload = long(in.tellg() - pos);
  CHECK(payload == 8L * grid->lattice_count(0) * grid->lattice_count(1));
}

TEST_CASE("oracle convergence study under mesh halving") {
  // The zero-extension boundary treatment is first order, so the measured
  // rates hover between 1 and 2 depending on where the sup sits; the gate is
  // monotone decrease, with the composed operator's rate checked where it
  // holds deterministically.
  {
    auto dom = std::make_shared<Domain>(Domain::unit_ball(2));
    BallOracle oracle = BallOracle::make(1, 2);
    double errs[3];
    int li = 0;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
      auto grid = GridSpec::make(dom, h);
      DiscreteOperator op = assemble_operator(grid, 1);
      GreenColumn g = discrete_green(op, Point{0.2, 0.1});
      errs[li++] = oracle_compare(g.field, oracle, g.y, 8.0 * h).max_error_rel_sup;
    }
    MESSAGE("disk m=1 orders: " << std::log2(errs[0] / errs[1]) << ", "
                                << std::log2(errs[1] / errs[2]));
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    CHECK(std::log2(errs[0] / errs[1]) >= 1.0);
  }
  for (int m : {1, 2}) {
    auto dom = std::make_shared<Domain>(Domain::unit_ball(3));
    BallOracle oracle = BallOracle::make(m, 3);
    double errs[2];
    int li = 0;
    for (double h : {1.0 / 16, 1.0 / 32}) {
      auto grid = GridSpec::make(dom, h);
      DiscreteOperator op = assemble_operator(grid, m);
      GreenColumn g =
          discrete_green(op, m == 1 ? Point{0.2, 0.1, 0.0} : Point{0.1, 0.05, 0.0});
      errs[li++] = oracle_compare(g.field, oracle, g.y, 8.0 * h).max_error_rel_sup;
    }
    double order = std::log2(errs[0] / errs[1]);
    MESSAGE("ball m=" << m << " order: " << order);
    CHECK(errs[1] < errs[0]);
    if (m == 2) CHECK(order >= 1.5);
  }
}
