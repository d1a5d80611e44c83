#include "alma/errors.hpp"
#include "alma/market.hpp"
#include "alma/vecopt.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace alma;
using alma::test::random_mat;
using alma::test::random_vec;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("region validation and gaps") {
    Mat A(2, 1);
    A << 1, 1;
    Mat B(2, 1);
    B << 1, -1;
    LinearFeasibleRegion r(A, vec({-1}), B, vec({0}));
    CHECK(r.dim() == 2);
    ConstraintGaps g = constraint_gaps(r, vec({0.25, 0.25}));
    CHECK(g.ineq[0] == doctest::Approx(-0.5));
    CHECK(g.eq[0] == doctest::Approx(0.0));
    CHECK(is_feasible(r, vec({0.25, 0.25})));
    CHECK_FALSE(is_feasible(r, vec({1.0, 1.0})));
    CHECK(constraint_gaps(r, vec({1.0, 0.0})).max_violation() == doctest::Approx(1.0));

    CHECK_THROWS_AS(LinearFeasibleRegion(A, vec({1, 2}), B, vec({0})), UsageError);
    CHECK_THROWS_AS(constraint_gaps(r, vec({1})), UsageError);
    LinearFeasibleRegion free = LinearFeasibleRegion::unconstrained(3);
    CHECK(free.num_ineq() == 0);
    CHECK(free.num_eq() == 0);
    CHECK(is_feasible(free, vec({5, -5, 1})));
}

TEST_CASE("constraint gaps are affine in x") {
    Rng rng(21);
    for (int t = 0; t < 100; ++t) {
        const Index n = 1 + rng.uniform_int(0, 5);
        const Index p = rng.uniform_int(0, 4), q = rng.uniform_int(0, 2);
        LinearFeasibleRegion r(random_mat(rng, n, p), random_vec(rng, p), random_mat(rng, n, q), random_vec(rng, q));
        const Vec x = random_vec(rng, n), y = random_vec(rng, n);
        auto combo = [&](auto member) {
            const Vec s = member(constraint_gaps(r, x + y)) - member(constraint_gaps(r, x)) -
                          member(constraint_gaps(r, y)) + member(constraint_gaps(r, Vec::Zero(n)));
            return s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
        };
        CHECK(combo([](const ConstraintGaps& g) { return g.ineq; }) <= 1e-12);
        CHECK(combo([](const ConstraintGaps& g) { return g.eq; }) <= 1e-12);
    }
}

TEST_CASE("dominance labels") {
    CHECK(dominance(vec({1, 2}), vec({0, 1})) == Dominance::DominatesStrictly);
    CHECK(dominance(vec({1, 2}), vec({2, 1})) == Dominance::Incomparable);
    CHECK(dominance(vec({1, 1}), vec({1, 1})) == Dominance::Equal);
    CHECK(dominance(vec({1, 2}), vec({1, 1})) == Dominance::WeaklyDominates);
    CHECK(dominance(vec({0, 1}), vec({1, 2})) == Dominance::DominatedBy);
    CHECK(dominance(vec({1, 1}), vec({1, 2})) == Dominance::WeaklyDominatedBy);
    CHECK(to_string(Dominance::Equal) == "Equal");
    CHECK_THROWS_AS(dominance(vec({1}), vec({1, 2})), UsageError);
}

TEST_CASE("strict dominance is a strict partial order") {
    Rng rng(22);
    for (int t = 0; t < 2000; ++t) {
        const Vec a = random_vec(rng, 2), b = random_vec(rng, 2), c = random_vec(rng, 2);
        CHECK(dominance(a, a) == Dominance::Equal);
        if (dominance(a, b) == Dominance::DominatesStrictly) CHECK(dominance(b, a) == Dominance::DominatedBy);
        if (dominance(a, b) == Dominance::DominatesStrictly && dominance(b, c) == Dominance::DominatesStrictly)
            CHECK(dominance(a, c) == Dominance::DominatesStrictly);
    }
}

TEST_CASE("Fritz-John residual") {
    LinearFeasibleRegion free = LinearFeasibleRegion::unconstrained(2);
    Mat J(2, 2);
    J << 1, -1, 0, 0;
    FritzJohnResidual r = fritz_john_residual(free, J, vec({0, 0}), vec({0.5, 0.5}), Vec(0), Vec(0));
    CHECK(r.stationarity == 0.0);
    CHECK(r.sign_violation == 0.0);

    FritzJohnResidual zero = fritz_john_residual(free, J, vec({0, 0}), vec({0, 0}), Vec(0), Vec(0));
    CHECK(zero.stationarity == 0.0);

    FritzJohnResidual neg = fritz_john_residual(free, J, vec({0, 0}), vec({-0.5, 1.5}), Vec(0), Vec(0));
    CHECK(neg.sign_violation == doctest::Approx(0.5));
    CHECK_THROWS_AS(fritz_john_residual(free, J, vec({0, 0}), vec({1}), Vec(0), Vec(0)), UsageError);
}

TEST_CASE("Fritz-John stationarity is homogeneous of degree one") {
    Rng rng(23);
    for (int t = 0; t < 100; ++t) {
        LinearFeasibleRegion r(random_mat(rng, 3, 2), random_vec(rng, 2), random_mat(rng, 3, 1), random_vec(rng, 1));
        const Mat J = random_mat(rng, 3, 2);
        const Vec x = random_vec(rng, 3), xi = random_vec(rng, 2, 0, 1), lam = random_vec(rng, 2, 0, 1),
                  mu = random_vec(rng, 1);
        const double s = rng.uniform(0.1, 10.0);
        FritzJohnResidual a = fritz_john_residual(r, J, x, xi, lam, mu);
        FritzJohnResidual b = fritz_john_residual(r, J, x, s * xi, s * lam, s * mu);
        CHECK(b.stationarity == doctest::Approx(s * a.stationarity).epsilon(1e-12));
        CHECK(b.sign_violation == 0.0);
    }
}

TEST_CASE("Fritz-John certificate of a grid-solved scalarized LP") {
    // maximize 0.5 f1 + 0.5 f2 with f1 = x1, f2 = x2 over x1 + 2 x2 <= 2,
    // x1 <= 1.5; brute force on a grid, then read off multipliers.
    Mat A(2, 2);
    A << 1, 1, 2, 0;
    LinearFeasibleRegion r(A, vec({-2, -1.5}), Mat(2, 0), Vec(0));
    double best = -1e300;
    Vec arg(2);
    const int N = 600;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            const Vec x = vec({2.0 * i / N, 2.0 * j / N});
            if (!is_feasible(r, x, 1e-12)) continue;
            const double v = 0.5 * x[0] + 0.5 * x[1];
            if (v > best) {
                best = v;
                arg = x;
            }
        }
    CHECK(arg[0] == doctest::Approx(1.5));
    CHECK(arg[1] == doctest::Approx(0.25));
    // Both constraints active: [0.5, 0.5] = A lambda gives lambda = [0.25, 0.25].
    Mat J = Mat::Identity(2, 2);
    FritzJohnResidual fj = fritz_john_residual(r, J, arg, vec({0.5, 0.5}), vec({0.25, 0.25}), Vec(0));
    CHECK(fj.stationarity <= 1e-6);
    CHECK(fj.complementarity <= 1e-6);
    CHECK(fj.sign_violation == 0.0);
}

TEST_CASE("quasiconcavity probe") {
    auto negsq = [](const Vec& x) { return -x.squaredNorm(); };
    auto prod = [](const Vec& x) { return x[0] * x[1]; };
    auto sq = [](const Vec& x) { return x.squaredNorm(); };
    Rng rng(24);
    for (int t = 0; t < 50; ++t) CHECK(quasiconcavity_probe(negsq, random_vec(rng, 3), random_vec(rng, 3)));
    CHECK(quasiconcavity_probe(prod, vec({1, 4}), vec({4, 1})));
    CHECK_FALSE(quasiconcavity_probe(sq, vec({1, 0}), vec({-1, 0})));
    CHECK_THROWS_AS(quasiconcavity_probe(sq, vec({1, 0}), vec({-1, 0}), 1), UsageError);
}

TEST_CASE("utility families are quasiconcave on their domain") {
    Rng rng(25);
    for (int t = 0; t < 200; ++t) {
        const Agent a = rng.uniform() < 0.5 ? alma::test::log_agent(rng.uniform(0.5, 4), rng.uniform(0.2, 3))
                                            : alma::test::sigmoid_agent(rng.uniform(0.5, 8), rng.uniform(0.2, 4));
        auto u = [&](const Vec& x) { return utility(a, x[0]); };
        CHECK(quasiconcavity_probe(u, vec({rng.uniform(0, 5)}), vec({rng.uniform(0, 5)})));
    }
}
