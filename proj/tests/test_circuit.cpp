#include <doctest.h>

#include "qhist/circuit.hpp"

using namespace qhist;

namespace {

CircuitSpec singlet_identity_spec() {
    return CircuitSpec::make(singlet(), Ket::basis(2, 0), Ket::basis(2, 0),
                             {CMatrix::identity(2), CMatrix::identity(2)},
                             {CMatrix::identity(2), CMatrix::identity(2)});
}

Ket uniform_superposition(int dim) {
    Ket k(dim);
    for (int i = 0; i < dim; ++i) k[i] = 1.0 / std::sqrt(static_cast<double>(dim));
    return k;
}

}  // namespace

TEST_SUITE("circuit") {

TEST_CASE("controlled build with identity family is the identity") {
    const CMatrix c = build_controlled({CMatrix::identity(2), CMatrix::identity(2)}, 2);
    CHECK((c - CMatrix::identity(4)).max_abs() == 0.0);
}

TEST_CASE("controlled build of (I, X) is the standard controlled-NOT") {
    const CMatrix c = build_controlled({CMatrix::identity(2), pauli_x()}, 2);
    const CMatrix cnot = CMatrix::from_rows(
        {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
    CHECK((c - cnot).max_abs() == 0.0);
}

TEST_CASE("controlled build of a seeded family is unitary") {
    Rng rng(41);
    const CMatrix c = build_controlled({random_unitary(rng, 3), random_unitary(rng, 3)}, 2);
    CHECK((c.adjoint() * c - CMatrix::identity(6)).max_abs() < 1e-12);
    CHECK_THROWS_AS(build_controlled({CMatrix::identity(2)}, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_controlled({pauli_x() * cx{2, 0}, pauli_x()}, 2),
                    std::invalid_argument);
}

TEST_CASE("control on the right places the selector on the trailing factor") {
    const CMatrix c = build_controlled({CMatrix::identity(2), pauli_x()}, 2, ControlSide::right);
    // |i⟩_target |c⟩_control with X applied to the target when c = 1
    const Ket in = kron(Ket::basis(2, 0), Ket::basis(2, 1));
    const Ket out = apply(c, in);
    CHECK(std::abs(out[2 * 1 + 1] - cx{1, 0}) < 1e-15);  // target flipped to 1, control kept
}

TEST_CASE("identity families leave the initial state untouched") {
    const auto spec = singlet_identity_spec();
    const Ket psi0 = spec.initial_state();
    const Ket psi3 = evolve_t0_t3(spec);
    double dev = 0;
    for (int i = 0; i < psi0.dim(); ++i) dev = std::max(dev, std::abs(psi0[i] - psi3[i]));
    CHECK(dev == 0.0);
}

TEST_CASE("evolution preserves the norm on seeded specs") {
    Rng rng(42);
    for (int k = 0; k < 20; ++k) {
        const auto spec = random_circuit_spec(rng);
        CHECK(std::abs(evolve_t0_t3(spec).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("a fixed control applies exactly the selected unitary") {
    Rng rng(43);
    const CMatrix u0 = random_unitary(rng, 2), u1 = random_unitary(rng, 2);
    const auto spec = CircuitSpec::make(
        kron(Ket::basis(2, 0), Ket::basis(2, 1)), Ket::basis(2, 1), Ket::basis(2, 0),
        {u0, u1}, {CMatrix::identity(2), CMatrix::identity(2)});
    const Ket psi3 = evolve_t0_t3(spec);
    // control a is basis state 1, so U^(1) acts on the A register
    const Ket expect = kron(Ket::basis(2, 1),
                            kron(apply(u1, Ket::basis(2, 0)), kron(Ket::basis(2, 1), Ket::basis(2, 0))));
    double dev = 0;
    for (int i = 0; i < psi3.dim(); ++i) dev = std::max(dev, std::abs(psi3[i] - expect[i]));
    CHECK(dev < 1e-12);
}

TEST_CASE("back projectors: identity gate keeps the standard basis") {
    const auto spec = singlet_identity_spec();
    const auto p = back_projector(spec, 0, 0);
    CHECK((p.matrix() - outer(Ket::basis(2, 0), Ket::basis(2, 0))).max_abs() == 0.0);
}

TEST_CASE("back projectors: a Hadamard gate selects the diagonal basis") {
    const auto spec = CircuitSpec::make(singlet(), Ket::basis(2, 0), Ket::basis(2, 0),
                                        {hadamard(), CMatrix::identity(2)},
                                        {CMatrix::identity(2), CMatrix::identity(2)});
    const Ket diag_plus(std::vector<cx>{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
    CHECK((back_projector(spec, 0, 0).matrix() - outer(diag_plus, diag_plus)).max_abs() < 1e-12);
}

TEST_CASE("back projector family is complete for every control value") {
    Rng rng(44);
    const auto spec = random_circuit_spec(rng, 3);
    for (int a = 0; a < spec.dim_a(); ++a) {
        const auto family = back_projector_family(spec, a);
        CMatrix sum(spec.dim_A(), spec.dim_A());
        for (const auto& p : family.members()) sum = sum + p.matrix();
        CHECK((sum - CMatrix::identity(spec.dim_A())).max_abs() < 1e-12);
        for (const auto& p : family.members()) CHECK(p.rank() == 1);
    }
    CHECK_THROWS_AS(back_projector(spec, 5, 0), std::invalid_argument);
}

TEST_CASE("singlet with identity families reproduces the anticorrelated table") {
    const auto spec = singlet_identity_spec();
    const auto joint = joint_distribution(spec, DistributionRoute::final_state);
    CHECK(joint.at({{"A", "+1"}, {"B", "+1"}, {"a", "1"}, {"b", "1"}}) ==
          doctest::Approx(0).epsilon(1e-12));
    CHECK(joint.at({{"A", "+1"}, {"B", "-1"}, {"a", "1"}, {"b", "1"}}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(joint.at({{"A", "-1"}, {"B", "+1"}, {"a", "1"}, {"b", "1"}}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(joint.at({{"A", "-1"}, {"B", "-1"}, {"a", "1"}, {"b", "1"}}) ==
          doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("the two distribution routes agree on seeded specs") {
    Rng rng(45);
    for (int k = 0; k < 25; ++k) {
        const auto spec = random_circuit_spec(rng);
        const auto final_route = joint_distribution(spec, DistributionRoute::final_state);
        const auto reduced_route = joint_distribution(spec, DistributionRoute::reduced);
        CHECK(final_route.max_abs_difference(reduced_route) <= 1e-12);
    }
}

TEST_CASE("setting choices are independent on every spec") {
    Rng rng(46);
    for (int k = 0; k < 10; ++k) {
        const auto spec = random_circuit_spec(rng);
        const auto pr_ab = joint_distribution(spec, DistributionRoute::final_state)
                               .marginal({"a", "b"});
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const std::vector<int> idx{a, b};
                CHECK(std::abs(pr_ab.at(idx) - spec.pr_a(a) * spec.pr_b(b)) < 1e-12);
            }
    }
}

TEST_CASE("uniform ancillas give uniform setting probabilities") {
    const auto spec = CircuitSpec::make(singlet(), uniform_superposition(2),
                                        uniform_superposition(2),
                                        {CMatrix::identity(2), hadamard()},
                                        {CMatrix::identity(2), hadamard()});
    const auto pr_a = joint_distribution(spec, DistributionRoute::final_state).marginal({"a"});
    for (int a = 0; a < 2; ++a) {
        const std::vector<int> idx{a};
        CHECK(pr_a.at(idx) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("deferred measurement equivalence") {
    CHECK(deferred_equivalence(singlet_identity_spec()) == 0.0);

    Rng rng(47);
    for (int k = 0; k < 25; ++k)
        CHECK(deferred_equivalence(random_circuit_spec(rng)) <= 1e-12);

    // x/z measurement types on both sides of the singlet
    const double s2 = 1.0 / std::sqrt(2.0);
    const Ket plus(std::vector<cx>{s2, s2});
    const auto zx_spec = CircuitSpec::make(singlet(), plus, plus,
                                           {hadamard(), CMatrix::identity(2)},
                                           {hadamard(), CMatrix::identity(2)});
    CHECK(deferred_equivalence(zx_spec) <= 1e-12);
}

TEST_CASE("joint-distribution correlations match the carried-back sign operators") {
    Rng rng(48);
    for (int k = 0; k < 10; ++k) {
        const auto spec = random_circuit_spec(rng);
        const auto joint = joint_distribution(spec, DistributionRoute::reduced);
        const auto setting = circuit_chsh_setting(spec);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                CHECK(std::abs(circuit_correlation(joint, a, b) -
                               quantum_correlation(spec.phi_ab, setting, a, b)) <= 1e-12);
    }
}

TEST_CASE("a product shared state factorizes the outcome distribution") {
    Rng rng(49);
    const auto spec = CircuitSpec::make(kron(random_ket(rng, 2), random_ket(rng, 2)),
                                        uniform_superposition(2), uniform_superposition(2),
                                        {random_unitary(rng, 2), random_unitary(rng, 2)},
                                        {random_unitary(rng, 2), random_unitary(rng, 2)});
    const auto joint = joint_distribution(spec, DistributionRoute::final_state);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const auto cond = joint.conditional(
                {{"a", std::to_string(a + 1)}, {"b", std::to_string(b + 1)}});
            const auto pr_A = cond.marginal({"A"});
            const auto pr_B = cond.marginal({"B"});
            for (int A = 0; A < 2; ++A)
                for (int B = 0; B < 2; ++B) {
                    const std::vector<int> ab{A, B}, ia{A}, ib{B};
                    CHECK(std::abs(cond.at(ab) - pr_A.at(ia) * pr_B.at(ib)) < 1e-12);
                }
        }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(CircuitSpec::make(singlet(), Ket::basis(2, 0), Ket::basis(2, 0),
                                      {CMatrix::identity(2)},  // one unitary, two control states
                                      {CMatrix::identity(2), CMatrix::identity(2)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(CircuitSpec::make(singlet() * cx{2, 0}, Ket::basis(2, 0), Ket::basis(2, 0),
                                      {CMatrix::identity(2), CMatrix::identity(2)},
                                      {CMatrix::identity(2), CMatrix::identity(2)}),
                    std::invalid_argument);
}

}  // TEST_SUITE
