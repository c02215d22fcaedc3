#include "support.hpp"

#include "wolbdyn/errors.hpp"
#include "wolbdyn/models.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace wolbdyn;

namespace {

SingleStrainParams random_single(testsupport::Rng& rng) {
    return SingleStrainParams::from_xi(rng.uniform(0.05, 1.0), rng.uniform(), rng.uniform());
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("single-strain field at hand-evaluated states") {
    const auto ex21 = SingleStrainParams::from_xi(0.9, 1.0, 1.0);
    const State2 a = rhs_single({0.0, 1.0}, ex21);
    CHECK(a.i == 0.0);
    CHECK(a.u == 0.0);
    const State2 b = rhs_single({0.9, 0.0}, ex21);
    CHECK(std::abs(b.i) < 1e-15);
    CHECK(b.u == 0.0);

    SingleStrainParams unit;
    unit.tau = 1.0;
    unit.q = 1.0;
    unit.eta = 1.0;
    const State2 c = rhs_single({0.5, 0.5}, unit);
    CHECK(c.i == 0.0);
    CHECK(c.u == doctest::Approx(-0.25).epsilon(1e-15));

    SingleStrainParams p;
    p.tau = 0.9;
    p.q = 0.8;
    p.eta = 1.25;
    const State2 d = rhs_single({0.2, 0.3}, p);
    CHECK(d.i == doctest::Approx(0.055).epsilon(1e-14));
    CHECK(d.u == doctest::Approx(0.074).epsilon(1e-14));
}

TEST_CASE("fecundity variant") {
    const auto p = SingleStrainParams::fecundity(0.8, 0.9, 1.0);
    const State2 d = rhs_single({0.2, 0.3}, p);
    CHECK(d.i == doctest::Approx(0.044).epsilon(1e-14));
    CHECK(d.u == doctest::Approx(0.046).epsilon(1e-14));
}

TEST_CASE("origin has zero derivative and negative states are rejected") {
    const auto p = SingleStrainParams::from_xi(0.7, 0.8, 0.6);
    const State2 z = rhs_single({0.0, 0.0}, p);
    CHECK(z.i == 0.0);
    CHECK(z.u == 0.0);
    CHECK_THROWS_AS(rhs_single({-0.1, 0.5}, p), DomainError);
    CHECK_THROWS_AS(SingleStrainParams::from_xi(0.5, 1.2, 0.1), DomainError);
    CHECK_THROWS_AS(SingleStrainParams::from_xi(0.0, 1.0, 0.1), DomainError);
}

TEST_CASE("two-strain field at the double-infection oracle state") {
    const auto p = double_infection(0.9, 0.9, 1.1, 1.1, 0.9, 0.9);
    CHECK(p.q0AB == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(p.qAB == 0.9);
    CHECK(p.qAAB == 0.9);
    const State4 d = rhs_multistrain({0.1, 0.1, 0.1, 0.1}, p);
    CHECK(std::abs(d.i_AB - 0.033) < 1e-14);
    CHECK(std::abs(d.i_A - 0.0145) < 1e-14);
    CHECK(std::abs(d.i_B - 0.0145) < 1e-14);
    CHECK(std::abs(d.u - 0.00225) < 1e-14);
}

TEST_CASE("two-strain field: disease-free point, p = 0 and presets") {
    const auto p = with_product_escape(simplified_compatible(0.95, 1.2, 0.7, 0.3));
    const State4 d = rhs_multistrain({0.0, 0.0, 0.0, 1.0}, p);
    CHECK(d.i_AB == 0.0);
    CHECK(d.i_A == 0.0);
    CHECK(d.i_B == 0.0);
    CHECK(d.u == 0.0);
    CHECK_THROWS_AS(rhs_multistrain({0.0, 0.0, 0.0, 0.0}, p), DomainError);
    CHECK_THROWS_AS(rhs_multistrain({0.1, -0.1, 0.0, 0.5}, p), DomainError);

    CHECK(is_simplified_compatible(simplified_compatible(1.0, 1.1, 0.95, 0.5)));
    CHECK_FALSE(is_simplified_compatible(mutually_incompatible(1.0, 1.1, 1.0, 0.99, 0.99)));
    CHECK(is_mutually_incompatible(mutually_incompatible(1.0, 1.1, 1.0, 0.99, 0.99)));

    const auto s = simplified_compatible(0.9, 1.3, 0.6, 0.4);
    const State4 state{0.0, 0.2, 0.3, 0.4};
    const State4 r = rhs_multistrain(state, s);
    const double growth = 0.9 - 1.3 * state.total();
    CHECK(r.i_A == doctest::Approx(growth * 0.2).epsilon(1e-14));
    CHECK(r.i_B == doctest::Approx(growth * 0.3).epsilon(1e-14));
}

TEST_CASE("ratio drift contract") {
    const std::vector<State4> still(3, State4{0.0, 0.2, 0.6, 0.1});
    CHECK(ratio_drift(still) == 0.0);
    CHECK_THROWS_AS(ratio_drift(std::span<const State4>{}), DomainError);
    const std::vector<State4> doubly{{0.1, 0.2, 0.3, 0.1}};
    CHECK_THROWS_AS(ratio_drift(doubly), DomainError);
}

TEST_CASE("property: boundary invariance of the single-strain field") {
    testsupport::Rng rng(101);
    for (int k = 0; k < 1000; ++k) {
        auto p = random_single(rng);
        const double u = rng.uniform(0.0, 2.0);
        CHECK(rhs_single({0.0, u}, p).i == 0.0);
        p.tau = 1.0;
        const double i = rng.uniform(0.0, 2.0);
        CHECK(rhs_single({i, 0.0}, p).u == 0.0);
    }
}

TEST_CASE("property: a zero component never has a negative derivative") {
    testsupport::Rng rng(202);
    for (int k = 0; k < 1000; ++k) {
        const auto p = random_single(rng);
        const State2 a = rhs_single({0.0, rng.uniform(0.0, 2.0)}, p);
        CHECK(a.i >= 0.0);
        const State2 b = rhs_single({rng.uniform(0.0, 2.0), 0.0}, p);
        CHECK(b.u >= 0.0);

        MultiStrainParams m;
        m.tau_A = rng.uniform();
        m.tau_B = rng.uniform();
        m.eta_A = rng.uniform(1.0, 2.0);
        m.eta_B = rng.uniform(1.0, 2.0);
        for (double* q : {&m.q0A, &m.q0B, &m.q0AB, &m.qAB, &m.qAAB, &m.qBA, &m.qBAB}) *q = rng.uniform();
        double y[4];
        for (double& v : y) v = rng.uniform(0.01, 1.0);
        const int zero = static_cast<int>(rng.next() % 4);
        y[zero] = 0.0;
        const State4 d = rhs_multistrain({y[0], y[1], y[2], y[3]}, m);
        const double dz[4] = {d.i_AB, d.i_A, d.i_B, d.u};
        CHECK(dz[zero] >= 0.0);
    }
}

TEST_CASE("property: ratio planes of the simplified compatible system") {
    testsupport::Rng rng(303);
    for (int k = 0; k < 1000; ++k) {
        const double tau = rng.uniform();
        const double eta = rng.uniform(1.0, 2.0);
        const auto p = simplified_compatible(tau, eta, rng.uniform(), rng.uniform());
        const State4 s{0.0, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        const double alpha = rng.uniform(0.0, 3.0);
        const State4 d = rhs_multistrain(s, p);
        const double lhs = d.i_A - alpha * d.i_B;
        const double rhs = (tau - eta * s.total()) * (s.i_A - alpha * s.i_B);
        CHECK(std::abs(lhs - rhs) < 1e-12);

        const State4 on{0.0, alpha * s.i_B, s.i_B, s.u};
        const State4 don = rhs_multistrain(on, p);
        CHECK(std::abs(don.i_A - alpha * don.i_B) < 1e-12);
    }
}

TEST_CASE("property: weighted difference plane of the mutually incompatible system") {
    testsupport::Rng rng(404);
    for (int k = 0; k < 1000; ++k) {
        const double tau = rng.uniform();
        const double eta = rng.uniform(1.0, 2.0);
        const double qAB = rng.uniform();
        const double qBA = rng.uniform();
        const auto p = mutually_incompatible(tau, eta, rng.uniform(), qAB, qBA);
        const State4 s{0.0, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        const State4 d = rhs_multistrain(s, p);
        const double lhs = qBA * d.i_A - qAB * d.i_B;
        const double rhs = (tau - eta * s.total()) * (qBA * s.i_A - qAB * s.i_B);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

}
