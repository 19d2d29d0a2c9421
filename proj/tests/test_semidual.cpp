#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stochot/costs.hpp"
#include "stochot/measures.hpp"
#include "stochot/oracle.hpp"
#include "stochot/rng.hpp"
#include "stochot/semidual.hpp"

using namespace stochot;

namespace {

Vec random_simplex(Index n, SeededRng& rng) {
  Vec w(n);
  for (Index i = 0; i < n; ++i) w[i] = 0.05 + rng.uniform01();
  return w / w.sum();
}

DiscreteMeasure random_measure(Index n, int dim, SeededRng& rng) {
  Mat atoms(dim, n);
  for (Index i = 0; i < atoms.size(); ++i) atoms(i) = rng.normal();
  return DiscreteMeasure(atoms, random_simplex(n, rng));
}

}  // namespace

TEST_CASE("softmin closed forms and guards") {
  Vec one(1), r3(3), nu3(3);
  one << 2.0;
  r3 << 3.0, 1.0, 2.0;
  nu3 << 0.3, 0.4, 0.3;

  CHECK(softmin(one, Vec::Ones(1), Epsilon(0.7)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(softmin(r3, nu3, Epsilon(0.0)) == 1.0);

  Vec r2(2), half(2);
  r2 << 0.0, 1.0;
  half << 0.5, 0.5;
  CHECK(softmin(r2, half, Epsilon(1.0)) ==
        doctest::Approx(-std::log(0.5 + 0.5 * std::exp(-1.0))).epsilon(1e-14));

  CHECK_THROWS_AS(softmin(Vec(0), Vec(0), Epsilon(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(softmin(r3, Vec::Zero(3), Epsilon(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(softmin(r3, half, Epsilon(1.0)), std::invalid_argument);
}

TEST_CASE("softmin stays finite for tiny eps and wide cost ranges") {
  Vec r(4), nu(4);
  r << 0.0, 500.0, 999.0, 1000.0;
  nu << 0.25, 0.25, 0.25, 0.25;
  double s = softmin(r, nu, Epsilon(1e-6));
  CHECK(std::isfinite(s));
  CHECK(s == doctest::Approx(0.0 - 1e-6 * std::log(0.25)).epsilon(1e-9));
  Vec chi = chi_weights(r, nu, Epsilon(1e-6));
  CHECK(chi.allFinite());
  CHECK(chi[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmin sandwich over 1000 random triples") {
  SeededRng rng(41);
  for (int t = 0; t < 1000; ++t) {
    Index n = 1 + static_cast<Index>(rng.uniform_below(8));
    Vec r(n);
    for (Index j = 0; j < n; ++j) r[j] = 10.0 * (rng.uniform01() - 0.5);
    Vec nu = random_simplex(n, rng);
    double eps = std::exp(-6.0 * rng.uniform01());
    double lo = r.minCoeff();
    Index jstar;
    r.minCoeff(&jstar);
    double hi = lo - eps * std::log(nu[jstar]);
    double s = softmin(r, nu, Epsilon(eps));
    CHECK(s >= lo - 1e-12);
    CHECK(s <= hi + 1e-12);
  }
}

TEST_CASE("chi_weights forms and simplex property") {
  Vec r3(3), nu3(3);
  r3 << 3.0, 1.0, 2.0;
  nu3 << 0.3, 0.4, 0.3;

  SUBCASE("constant r returns nu") {
    Vec rc = Vec::Constant(3, 1.7);
    Vec chi = chi_weights(rc, nu3, Epsilon(0.2));
    CHECK((chi - nu3).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("eps 0 returns the argmin basis vector") {
    Vec chi = chi_weights(r3, nu3, Epsilon(0.0));
    CHECK(chi[0] == 0.0);
    CHECK(chi[1] == 1.0);
    CHECK(chi[2] == 0.0);
  }

  SUBCASE("ties at eps 0 break to the lowest index") {
    Vec rt(3);
    rt << 2.0, 1.0, 1.0;
    Vec chi = chi_weights(rt, nu3, Epsilon(0.0));
    CHECK(chi[1] == 1.0);
  }

  SUBCASE("zero-weight atoms are excluded from the argmin") {
    Vec nz(3);
    nz << 0.5, 0.0, 0.5;
    Vec chi = chi_weights(r3, nz, Epsilon(0.0));
    CHECK(chi[2] == 1.0);  // index 1 has the smallest r but no mass
  }

  SUBCASE("output is a simplex for random inputs") {
    SeededRng rng(43);
    for (int t = 0; t < 1000; ++t) {
      Index n = 1 + static_cast<Index>(rng.uniform_below(9));
      Vec r(n);
      for (Index j = 0; j < n; ++j) r[j] = 8.0 * rng.normal();
      Vec nu = random_simplex(n, rng);
      Vec chi = chi_weights(r, nu, Epsilon(std::exp(-5.0 * rng.uniform01())));
      CHECK(chi.minCoeff() >= 0.0);
      CHECK(std::abs(chi.sum() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("chi_weights is the gradient of softmin in r") {
  SeededRng rng(47);
  Vec nu = random_simplex(6, rng);
  Vec r(6);
  for (Index j = 0; j < 6; ++j) r[j] = 3.0 * rng.normal();
  Epsilon eps(0.5);
  // the -eps prefactor and the -1/eps chain factor cancel: d softmin / d r_j = chi_j
  Vec fd = finite_diff_grad([&](const Vec& q) { return softmin(q, nu, eps); }, r);
  Vec chi = chi_weights(r, nu, eps);
  for (Index j = 0; j < 6; ++j)
    CHECK(fd[j] == doctest::Approx(chi[j]).epsilon(1e-6));
}

TEST_CASE("barh closed forms and gradient") {
  SeededRng rng(53);
  CostFunction c = CostFunction::squared_euclidean();

  SUBCASE("single-atom value is cost minus eps for any potential") {
    DiscreteMeasure nu = random_measure(1, 2, rng);
    Vec x(2);
    x << 0.3, -0.7;
    for (double t : {-5.0, 0.0, 2.5}) {
      Vec v(1);
      v << t;
      CHECK(barh(x, v, nu, c, Epsilon(0.1)) ==
            doctest::Approx(c(x, nu.atom(0)) - 0.1).epsilon(1e-12));
    }
  }

  SUBCASE("eps 0 at v = 0 is the minimum cost") {
    DiscreteMeasure nu = random_measure(5, 2, rng);
    Vec x(2);
    x << 0.1, 0.2;
    double expect = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < 5; ++j) expect = std::min(expect, c(x, nu.atom(j)));
    CHECK(barh(x, Vec::Zero(5), nu, c, Epsilon(0.0)) == expect);
  }

  SUBCASE("gradient matches finite differences") {
    DiscreteMeasure nu = random_measure(7, 2, rng);
    Vec x(2);
    x << -0.4, 0.9;
    Vec v(7);
    for (Index j = 0; j < 7; ++j) v[j] = rng.normal();
    Vec fd = finite_diff_grad(
        [&](const Vec& w) { return barh(x, w, nu, c, Epsilon(0.1)); }, v);
    Vec g = grad_barh(x, v, nu, c, Epsilon(0.1));
    for (Index j = 0; j < 7; ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-6));
  }

  SUBCASE("gradient matches finite differences at eps 0.05, 5 atoms") {
    DiscreteMeasure nu = random_measure(5, 3, rng);
    Vec x(3);
    x << 0.0, 0.5, -0.5;
    Vec v = Vec::Zero(5);
    Vec fd = finite_diff_grad(
        [&](const Vec& w) { return barh(x, w, nu, c, Epsilon(0.05)); }, v);
    Vec g = grad_barh(x, v, nu, c, Epsilon(0.05));
    for (Index j = 0; j < 5; ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-6));
  }

  SUBCASE("single-atom gradient is identically zero") {
    DiscreteMeasure nu = random_measure(1, 2, rng);
    Vec x(2);
    x << 1.0, 1.0;
    Vec v(1);
    v << 3.0;
    CHECK(grad_barh(x, v, nu, c, Epsilon(0.3))[0] == 0.0);
  }

  SUBCASE("gradient components sum to zero") {
    for (int t = 0; t < 1000; ++t) {
      Index n = 1 + static_cast<Index>(rng.uniform_below(8));
      DiscreteMeasure nu = random_measure(n, 2, rng);
      Vec x(2);
      x << rng.normal(), rng.normal();
      Vec v(n);
      for (Index j = 0; j < n; ++j) v[j] = rng.normal();
      double eps = rng.uniform01() < 0.2 ? 0.0 : std::exp(-4.0 * rng.uniform01());
      Vec g = grad_barh(x, v, nu, c, Epsilon(eps));
      CHECK(std::abs(g.sum()) <= 1e-12);
    }
  }
}

TEST_CASE("semidual objective values and translation invariance") {
  SeededRng rng(59);

  SUBCASE("single-pair problem evaluates to cost minus eps") {
    Mat cost(1, 1);
    cost << 2.25;
    Vec one = Vec::Ones(1);
    for (double t : {-1.0, 0.0, 4.0}) {
      Vec v(1);
      v << t;
      CHECK(semidual_objective(v, one, one, cost, Epsilon(0.3)) ==
            doctest::Approx(2.25 - 0.3).epsilon(1e-14));
    }
  }

  SUBCASE("adding a constant to v never changes the objective") {
    for (int t = 0; t < 200; ++t) {
      Index i = 2 + static_cast<Index>(rng.uniform_below(5));
      Index j = 2 + static_cast<Index>(rng.uniform_below(5));
      Mat cost(i, j);
      for (Index k = 0; k < cost.size(); ++k) cost(k) = 3.0 * rng.uniform01();
      Vec mu = random_simplex(i, rng), nu = random_simplex(j, rng);
      Vec v(j);
      for (Index k = 0; k < j; ++k) v[k] = rng.normal();
      double lam = 5.0 * rng.normal();
      double eps = rng.uniform01() < 0.25 ? 0.0 : std::exp(-4.0 * rng.uniform01());
      double a = semidual_objective(v, mu, nu, cost, Epsilon(eps));
      double b = semidual_objective((v.array() + lam).matrix(), mu, nu, cost, Epsilon(eps));
      CHECK(std::abs(a - b) <= 1e-10);
    }
  }

  SUBCASE("any v is dominated by the reference optimum") {
    Mat cost(4, 6);
    for (Index k = 0; k < cost.size(); ++k) cost(k) = rng.uniform01();
    Vec mu = random_simplex(4, rng), nu = random_simplex(6, rng);
    Mat xs = Mat::Zero(1, 4), ys = Mat::Zero(1, 6);
    ReferenceSolution ref = reference_solve(DiscreteMeasure(xs, mu), DiscreteMeasure(ys, nu),
                                            cost, Epsilon(0.1));
    for (int t = 0; t < 50; ++t) {
      Vec v(6);
      for (Index k = 0; k < 6; ++k) v[k] = 2.0 * rng.normal();
      CHECK(semidual_objective(v, mu, nu, cost, Epsilon(0.1)) <= ref.objective + 1e-9);
    }
  }
}

TEST_CASE("dual objective forms and the conjugation identity") {
  SeededRng rng(61);

  SUBCASE("zero potentials evaluate the plain Gibbs mass") {
    Mat cost(3, 2);
    cost << 0.5, 1.0, 2.0, 0.1, 1.5, 0.7;
    Vec mu = random_simplex(3, rng), nu = random_simplex(2, rng);
    double eps = 0.4;
    double expect = 0.0;
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j)
        expect += std::exp(-cost(i, j) / eps) * mu[i] * nu[j];
    expect *= -eps;
    CHECK(dual_objective(Vec::Zero(3), Vec::Zero(2), mu, nu, cost, Epsilon(eps)) ==
          doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("saturated single pair gives cost minus eps") {
    Mat cost(1, 1);
    cost << 1.2;
    Vec u(1), v(1), one = Vec::Ones(1);
    u << 1.2;
    v << 0.0;
    CHECK(dual_objective(u, v, one, one, cost, Epsilon(0.25)) ==
          doctest::Approx(1.2 - 0.25).epsilon(1e-14));
  }

  SUBCASE("eps 0 is rejected") {
    Mat cost = Mat::Zero(1, 1);
    Vec one = Vec::Ones(1);
    CHECK_THROWS_AS(dual_objective(Vec::Zero(1), Vec::Zero(1), one, one, cost, Epsilon(0.0)),
                    std::invalid_argument);
  }

  SUBCASE("plugging the smoothed transform recovers the semidual value") {
    for (int t = 0; t < 200; ++t) {
      Mat cost(5, 7);
      for (Index k = 0; k < cost.size(); ++k) cost(k) = 4.0 * rng.uniform01();
      Vec mu = random_simplex(5, rng), nu = random_simplex(7, rng);
      Vec v(7);
      for (Index k = 0; k < 7; ++k) v[k] = rng.normal();
      Epsilon eps(std::exp(-4.0 * rng.uniform01()));
      Vec u = smoothed_ctransform(v, nu, cost, eps);
      double f = dual_objective(u, v, mu, nu, cost, eps);
      double h = semidual_objective(v, mu, nu, cost, eps);
      CHECK(f == doctest::Approx(h).epsilon(1e-10));
    }
  }
}

TEST_CASE("smoothed_ctransform forms and ascent property") {
  SeededRng rng(67);

  SUBCASE("single column copies the cost") {
    Mat cost(4, 1);
    cost << 0.3, 1.1, 0.0, 2.2;
    Vec u = smoothed_ctransform(Vec::Zero(1), Vec::Ones(1), cost, Epsilon(0.5));
    CHECK((u - cost.col(0)).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("eps 0 takes row minima") {
    Mat cost(2, 3);
    cost << 3.0, 1.0, 2.0, 0.5, 4.0, 0.25;
    Vec nu = Vec::Constant(3, 1.0 / 3.0);
    Vec u = smoothed_ctransform(Vec::Zero(3), nu, cost, Epsilon(0.0));
    CHECK(u[0] == 1.0);
    CHECK(u[1] == 0.25);
  }

  SUBCASE("alternating conjugations never decrease the semidual value") {
    for (int t = 0; t < 20; ++t) {
      Mat cost(6, 6);
      for (Index k = 0; k < cost.size(); ++k) cost(k) = 2.0 * rng.uniform01();
      Vec mu = random_simplex(6, rng), nu = random_simplex(6, rng);
      Epsilon eps(0.2);
      Vec v = Vec::Zero(6);
      double h_prev = semidual_objective(v, mu, nu, cost, eps);
      double f_prev = -std::numeric_limits<double>::infinity();
      for (int sweep = 0; sweep < 5; ++sweep) {
        Vec u = smoothed_ctransform(v, nu, cost, eps);
        double f_half = dual_objective(u, v, mu, nu, cost, eps);
        CHECK(f_half >= f_prev - 1e-12);
        v = smoothed_ctransform(u, mu, Mat(cost.transpose()), eps);
        double f_full = dual_objective(u, v, mu, nu, cost, eps);
        CHECK(f_full >= f_half - 1e-12);
        double h = semidual_objective(v, mu, nu, cost, eps);
        CHECK(h >= h_prev - 1e-12);
        h_prev = h;
        f_prev = f_full;
      }
    }
  }
}

TEST_CASE("recover_plan marginals and KL values") {
  SeededRng rng(71);

  SUBCASE("single saturated pair is the unit plan") {
    Mat cost(1, 1);
    cost << 0.8;
    Vec u(1), v(1), one = Vec::Ones(1);
    u << 0.8;
    v << 0.0;
    TransportPlan plan = recover_plan(u, v, one, one, cost, Epsilon(0.3));
    CHECK(plan(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(recover_plan(u, v, one, one, cost, Epsilon(0.0)), std::invalid_argument);
  }

  SUBCASE("transform side makes row marginals exact for any v") {
    for (int t = 0; t < 100; ++t) {
      Mat cost(5, 4);
      for (Index k = 0; k < cost.size(); ++k) cost(k) = 3.0 * rng.uniform01();
      Vec mu = random_simplex(5, rng), nu = random_simplex(4, rng);
      Vec v(4);
      for (Index k = 0; k < 4; ++k) v[k] = rng.normal();
      Epsilon eps(0.15);
      Vec u = smoothed_ctransform(v, nu, cost, eps);
      TransportPlan plan = recover_plan(u, v, mu, nu, cost, eps);
      for (Index i = 0; i < 5; ++i)
        CHECK(plan.row(i).sum() == doctest::Approx(mu[i]).epsilon(1e-12));
    }
  }

  SUBCASE("reference optimum has both marginals within 1e-8") {
    Mat xs(2, 5), ys(2, 5);
    for (Index k = 0; k < xs.size(); ++k) xs(k) = rng.normal();
    for (Index k = 0; k < ys.size(); ++k) ys(k) = rng.normal();
    DiscreteMeasure mu(xs, random_simplex(5, rng)), nu(ys, random_simplex(5, rng));
    Mat cost = build_cost_matrix(CostFunction::squared_euclidean(), xs, ys).entries;
    Epsilon eps(0.1);
    ReferenceSolution ref = reference_solve(mu, nu, cost, eps);
    TransportPlan plan = recover_plan(ref.u_star, ref.v_star, mu.weights(), nu.weights(),
                                      cost, eps);
    CHECK(marginal_violation(plan, mu.weights(), nu.weights()) <= 1e-8);
  }
}

TEST_CASE("marginal_violation closed forms and the gradient identity") {
  SeededRng rng(73);
  Vec mu = random_simplex(4, rng), nu = random_simplex(3, rng);

  CHECK(marginal_violation(TransportPlan(mu * nu.transpose()), mu, nu) <= 1e-15);
  CHECK(marginal_violation(TransportPlan::Zero(4, 3), mu, nu) ==
        doctest::Approx(2.0).epsilon(1e-15));

  for (int t = 0; t < 100; ++t) {
    Mat cost(4, 3);
    for (Index k = 0; k < cost.size(); ++k) cost(k) = 2.0 * rng.uniform01();
    Vec v(3);
    for (Index k = 0; k < 3; ++k) v[k] = rng.normal();
    Epsilon eps(0.2);
    Vec u = smoothed_ctransform(v, nu, cost, eps);
    TransportPlan plan = recover_plan(u, v, mu, nu, cost, eps);
    double grad_l1 = semidual_grad_and_value(v, mu, nu, cost, eps).grad.cwiseAbs().sum();
    CHECK(std::abs(marginal_violation(plan, mu, nu) - grad_l1) <= 1e-10);
  }
}

TEST_CASE("kl_divergence conventions and strong duality") {
  SeededRng rng(79);
  Vec mu = random_simplex(3, rng), nu = random_simplex(3, rng);

  SUBCASE("independent coupling has divergence -1") {
    CHECK(kl_divergence(TransportPlan(mu * nu.transpose()), mu, nu) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    Vec one = Vec::Ones(1);
    CHECK(kl_divergence(TransportPlan::Constant(1, 1, 1.0), one, one) ==
          doctest::Approx(-1.0).epsilon(1e-15));
  }

  SUBCASE("mass outside the product support is infinite") {
    Vec mu0(2), nu0(2);
    mu0 << 1.0, 0.0;
    nu0 << 0.5, 0.5;
    TransportPlan plan(2, 2);
    plan << 0.25, 0.25, 0.25, 0.25;
    CHECK(std::isinf(kl_divergence(plan, mu0, nu0)));
  }

  SUBCASE("primal value at the reference optimum matches the semidual") {
    for (int t = 0; t < 20; ++t) {
      Mat xs(2, 6), ys(2, 6);
      for (Index k = 0; k < xs.size(); ++k) xs(k) = rng.normal();
      for (Index k = 0; k < ys.size(); ++k) ys(k) = rng.normal();
      DiscreteMeasure mu_m(xs, random_simplex(6, rng)), nu_m(ys, random_simplex(6, rng));
      Mat cost = build_cost_matrix(CostFunction::squared_euclidean(), xs, ys).entries;
      Epsilon eps(0.15);
      ReferenceSolution ref = reference_solve(mu_m, nu_m, cost, eps);
      TransportPlan plan = recover_plan(ref.u_star, ref.v_star, mu_m.weights(),
                                        nu_m.weights(), cost, eps);
      double primal = primal_value(plan, cost, mu_m.weights(), nu_m.weights(), eps);
      CHECK(primal == doctest::Approx(ref.objective).epsilon(1e-6));
    }
  }
}
