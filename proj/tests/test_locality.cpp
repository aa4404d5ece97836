#include <doctest.h>

#include "qhist/locality.hpp"

using namespace qhist;

namespace {

TripartiteScenario seeded_scenario(Rng& rng, int n_times, int dim_a = 2, int dim_b = 2,
                                   int dim_c = 2) {
    std::vector<CMatrix> t_a, t_bc;
    std::vector<DecompositionOfIdentity> events;
    for (int j = 0; j < n_times; ++j) {
        t_a.push_back(random_unitary(rng, dim_a));
        t_bc.push_back(random_unitary(rng, dim_b * dim_c));
        events.push_back(DecompositionOfIdentity::from_basis(random_unitary(rng, dim_a)));
    }
    return TripartiteScenario::make(dim_a, dim_b, dim_c, random_ket(rng, dim_a * dim_b),
                                    random_ket(rng, dim_c), std::move(t_a), std::move(t_bc),
                                    std::move(events));
}

}  // namespace

TEST_SUITE("locality") {

TEST_CASE("reduced state of the singlet is maximally mixed") {
    Rng rng(71);
    auto scenario = TripartiteScenario::make(
        2, 2, 2, singlet(), Ket::basis(2, 0), {random_unitary(rng, 2)},
        {random_unitary(rng, 4)},
        {DecompositionOfIdentity::from_basis(random_unitary(rng, 2))});
    const CMatrix rho = reduced_rho_a(scenario);

    // oracle: explicit basis sum over B
    const Ket psi = singlet();
    CMatrix oracle(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) oracle(i, j) += psi[i * 2 + k] * std::conj(psi[j * 2 + k]);
    CHECK((rho - oracle).max_abs() < 1e-15);
    CHECK((rho - CMatrix::identity(2) * cx{0.5, 0}).max_abs() < 1e-15);
}

TEST_CASE("reduced state of a product pair is the pure first factor") {
    Rng rng(72);
    const Ket u = random_ket(rng, 2), v = random_ket(rng, 2);
    auto scenario = TripartiteScenario::make(
        2, 2, 2, kron(u, v), Ket::basis(2, 0), {CMatrix::identity(2)}, {CMatrix::identity(4)},
        {DecompositionOfIdentity::from_basis(random_unitary(rng, 2))});
    CHECK((reduced_rho_a(scenario) - outer(u, u)).max_abs() < 1e-12);
}

TEST_CASE("the two reduction routes agree") {
    Rng rng(73);
    const auto scenario = seeded_scenario(rng, 2);
    const CMatrix via_pair = reduced_rho_a(scenario);
    const CMatrix via_full = partial_trace(
        outer(scenario.initial_state(), scenario.initial_state()), scenario.layout, {"A"});
    CHECK((via_pair - via_full).max_abs() < 1e-14);
    CHECK(std::abs(via_pair.trace() - cx{1, 0}) < 1e-12);
    // positive semidefinite
    const auto e = eig_hermitian(via_pair);
    CHECK(e.eigenvalues.front() >= -1e-10);
}

TEST_CASE("trivial events give the single history unit weight") {
    Rng rng(74);
    auto scenario = TripartiteScenario::make(
        2, 2, 2, random_ket(rng, 4), random_ket(rng, 2), {random_unitary(rng, 2)},
        {random_unitary(rng, 4)},
        {DecompositionOfIdentity::from_projectors({Projector::full(2)})});
    const std::vector<int> alpha{0};
    const cx f = a_history_functional(scenario, alpha, alpha);
    CHECK(std::abs(f - cx{1, 0}) < 1e-12);
}

TEST_CASE("diagonal entries are real and sum to one") {
    Rng rng(75);
    const auto scenario = seeded_scenario(rng, 3);
    const HistoryFamily family = scenario.full_family();
    double total = 0;
    for (size_t h = 0; h < family.history_count(); ++h) {
        const auto alpha = family.history_indices(h);
        const cx v = a_history_functional(scenario, alpha, alpha);
        CHECK(std::abs(v.imag()) < 1e-13);
        total += v.real();
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full and reduced functional forms agree on seeded scenarios") {
    Rng rng(76);
    const auto scenario = seeded_scenario(rng, 3);
    const HistoryFamily family = scenario.full_family();
    const CMatrix rho = reduced_rho_a(scenario);
    double worst = 0;
    for (size_t h1 = 0; h1 < family.history_count(); ++h1)
        for (size_t h2 = 0; h2 < family.history_count(); ++h2) {
            const auto a1 = family.history_indices(h1);
            const auto a2 = family.history_indices(h2);
            const cx full = decoherence_functional(family, a1, a2);
            const cx reduced = decoherence_functional_reduced(
                rho, a_chain_operator(scenario, a1), a_chain_operator(scenario, a2));
            worst = std::max(worst, std::abs(full - reduced));
        }
    CHECK(worst < 1e-13);
}

TEST_CASE("history statistics ignore everything done on the far side") {
    Rng rng(77);
    for (int n_times : {2, 3}) {
        const auto scenario = seeded_scenario(rng, n_times);
        const auto variations = random_variations(rng, scenario, 10);
        CHECK(variations.size() >= 11);  // base + 9 seeded + entangling gate
        CHECK(locality_invariance(scenario, variations) <= 1e-12);
    }
}

TEST_CASE("changing only the environment state changes nothing") {
    Rng rng(81);
    const auto scenario = seeded_scenario(rng, 2);
    std::vector<LocalityVariation> vars;
    vars.push_back(LocalityVariation{scenario.phi_c, scenario.t_bc});
    vars.push_back(LocalityVariation{random_ket(rng, 2), scenario.t_bc});
    vars.push_back(LocalityVariation{Ket::basis(2, 1), scenario.t_bc});
    CHECK(locality_invariance(scenario, vars) <= 1e-12);
    CHECK_THROWS_AS(locality_invariance(scenario, {vars[0]}), std::invalid_argument);
}

TEST_CASE("invariance holds for qutrit environments too") {
    Rng rng(78);
    const auto scenario = seeded_scenario(rng, 2, 2, 2, 3);
    const auto variations = random_variations(rng, scenario, 6);
    CHECK(locality_invariance(scenario, variations) <= 1e-12);
}

TEST_CASE("couplings that would reach the isolated system are inexpressible") {
    Rng rng(79);
    // a unitary on the full (A,B,C) space cannot be passed as a B-C coupling
    CHECK_THROWS_AS(TripartiteScenario::make(
                        2, 2, 2, singlet(), Ket::basis(2, 0), {CMatrix::identity(2)},
                        {random_unitary(rng, 8)},  // wrong dimension: acts on A too
                        {DecompositionOfIdentity::from_basis(random_unitary(rng, 2))}),
                    std::invalid_argument);
    // events touching more than the isolated register are rejected
    CHECK_THROWS_AS(TripartiteScenario::make(
                        2, 2, 2, singlet(), Ket::basis(2, 0), {CMatrix::identity(2)},
                        {CMatrix::identity(4)},
                        {DecompositionOfIdentity::from_basis(random_unitary(rng, 4))}),
                    std::invalid_argument);
}

TEST_CASE("consistency status is itself invariant across variations") {
    Rng rng(80);
    // z-basis events twice with identity A dynamics: a consistent family
    const auto z_events = DecompositionOfIdentity::from_projectors(
        {Projector::onto(Ket::basis(2, 0)), Projector::onto(Ket::basis(2, 1))});
    auto base = TripartiteScenario::make(
        2, 2, 2, random_ket(rng, 4), random_ket(rng, 2),
        {CMatrix::identity(2), CMatrix::identity(2)},
        {random_unitary(rng, 4), random_unitary(rng, 4)}, {z_events, z_events});
    for (const auto& var : random_variations(rng, base, 6)) {
        const auto varied = TripartiteScenario::make(
            2, 2, 2, base.phi_ab, var.phi_c, base.t_a, var.t_bc, base.a_events);
        CHECK(consistency_check(varied.full_family()).consistent);
    }
}

}  // TEST_SUITE
