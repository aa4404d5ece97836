#ifndef QHIST_CIRCUIT_HPP
#define QHIST_CIRCUIT_HPP

#include "qhist/chsh.hpp"
#include "qhist/distribution.hpp"
#include "qhist/projector.hpp"
#include "qhist/quantum.hpp"

namespace qhist {

// ── Ancilla-controlled measurement circuit ───────────────────────────────────
//
// Four registers in layout order (a, A, B, b). The ancillas a and b select
// which unitary is applied to A and B before a standard-basis measurement,
// which is equivalent to choosing the measurement basis at the last moment.
//
//   t0: |Ψ0⟩ = |φ_a⟩ ⊗ |Φ⟩_AB ⊗ |φ_b⟩
//   t0→t2: identity
//   t2→t3: controlled-U on (a,A) and controlled-V on (B,b)
//   t3: standard-basis measurement of all four registers

enum class ControlSide { left, right };

// Σ_c |c⟩⟨c| ⊗ U^(c) (control left) or Σ_c U^(c) ⊗ |c⟩⟨c| (control right).
inline CMatrix build_controlled(const std::vector<CMatrix>& family, int control_dim,
                                ControlSide side = ControlSide::left) {
    if (static_cast<int>(family.size()) != control_dim)
        throw std::invalid_argument("build_controlled: family size must equal control dim");
    const int target_dim = family.front().rows();
    CMatrix result(control_dim * target_dim, control_dim * target_dim);
    for (int c = 0; c < control_dim; ++c) {
        const CMatrix& u = family[static_cast<size_t>(c)];
        if (!u.square() || u.rows() != target_dim)
            throw std::invalid_argument("build_controlled: mixed target dimensions");
        if (!u.is_unitary(1e-10))
            throw std::invalid_argument("build_controlled: family member " + std::to_string(c) +
                                        " is not unitary");
        const CMatrix sel = outer(Ket::basis(control_dim, c), Ket::basis(control_dim, c));
        result = result + (side == ControlSide::left ? kron(sel, u) : kron(u, sel));
    }
    return result;
}

struct CircuitSpec {
    SpaceLayout layout;               // factors (a, A, B, b), in this order
    Ket phi_ab;                       // |Φ⟩ on A⊗B
    Ket phi_a, phi_b;                 // ancilla states
    std::vector<CMatrix> u_family;    // unitaries on A, indexed by a
    std::vector<CMatrix> v_family;    // unitaries on B, indexed by b

    static CircuitSpec make(Ket phi_ab, Ket phi_a, Ket phi_b, std::vector<CMatrix> u_family,
                            std::vector<CMatrix> v_family) {
        const int dim_a = phi_a.dim(), dim_b = phi_b.dim();
        if (u_family.size() != static_cast<size_t>(dim_a) ||
            v_family.size() != static_cast<size_t>(dim_b))
            throw std::invalid_argument("CircuitSpec: one unitary required per ancilla basis state");
        const int dim_A = u_family.front().rows();
        const int dim_B = v_family.front().rows();
        if (phi_ab.dim() != dim_A * dim_B)
            throw std::invalid_argument("CircuitSpec: shared state does not match register dims");
        for (const auto* fam : {&u_family, &v_family})
            for (const auto& u : *fam)
                if (!u.is_unitary(1e-10))
                    throw std::invalid_argument("CircuitSpec: non-unitary family member");
        if (!phi_ab.is_normalized(1e-10) || !phi_a.is_normalized(1e-10) ||
            !phi_b.is_normalized(1e-10))
            throw std::invalid_argument("CircuitSpec: states must be normalized");
        SpaceLayout layout({{"a", dim_a}, {"A", dim_A}, {"B", dim_B}, {"b", dim_b}});
        return CircuitSpec{std::move(layout), std::move(phi_ab), std::move(phi_a),
                           std::move(phi_b), std::move(u_family), std::move(v_family)};
    }

    int dim_a() const { return layout.dim(0); }
    int dim_A() const { return layout.dim(1); }
    int dim_B() const { return layout.dim(2); }
    int dim_b() const { return layout.dim(3); }

    // Outcome labels: ancillas count from 1; two-level measured registers are
    // labeled +1/-1 (basis state 0 is +1), larger ones count from 1.
    static std::string register_label(int dim, int basis_index) {
        if (dim == 2) return basis_index == 0 ? "+1" : "-1";
        return std::to_string(basis_index + 1);
    }
    static std::string ancilla_label(int basis_index) { return std::to_string(basis_index + 1); }

    Ket initial_state() const { return kron(phi_a, kron(phi_ab, phi_b)); }

    // Pr(a) = |⟨a|φ_a⟩|², Pr(b) = |⟨b|φ_b⟩|²
    double pr_a(int a) const { return std::norm(phi_a[a]); }
    double pr_b(int b) const { return std::norm(phi_b[b]); }
};

// |Ψ3⟩ = (controlled-U ⊗ controlled-V)|Ψ0⟩. The evolution before the gates is
// the identity, so this is the full development over the circuit.
inline Ket evolve_t0_t3(const CircuitSpec& spec) {
    const CMatrix cu = build_controlled(spec.u_family, spec.dim_a(), ControlSide::left);
    const CMatrix cv = build_controlled(spec.v_family, spec.dim_b(), ControlSide::right);
    return apply(kron(cu, cv), spec.initial_state());
}

// Measurement projector carried backwards through the selected unitary:
// P^(a)_A = U^(a)† [A] U^(a). For fixed a these form a decomposition of the
// A identity (the basis "chosen" by the quantum coin).
inline Projector back_projector(const CircuitSpec& spec, int a, int outcome_A) {
    if (a < 0 || a >= spec.dim_a()) throw std::invalid_argument("back_projector: bad ancilla value");
    if (outcome_A < 0 || outcome_A >= spec.dim_A())
        throw std::invalid_argument("back_projector: bad outcome index");
    const CMatrix& u = spec.u_family[static_cast<size_t>(a)];
    const CMatrix sel = outer(Ket::basis(spec.dim_A(), outcome_A), Ket::basis(spec.dim_A(), outcome_A));
    return Projector::from_matrix(u.adjoint() * sel * u);
}

inline Projector back_projector_b(const CircuitSpec& spec, int b, int outcome_B) {
    if (b < 0 || b >= spec.dim_b()) throw std::invalid_argument("back_projector_b: bad ancilla value");
    if (outcome_B < 0 || outcome_B >= spec.dim_B())
        throw std::invalid_argument("back_projector_b: bad outcome index");
    const CMatrix& v = spec.v_family[static_cast<size_t>(b)];
    const CMatrix sel = outer(Ket::basis(spec.dim_B(), outcome_B), Ket::basis(spec.dim_B(), outcome_B));
    return Projector::from_matrix(v.adjoint() * sel * v);
}

inline DecompositionOfIdentity back_projector_family(const CircuitSpec& spec, int a) {
    std::vector<Projector> members;
    for (int outcome = 0; outcome < spec.dim_A(); ++outcome)
        members.push_back(back_projector(spec, a, outcome));
    return DecompositionOfIdentity::from_projectors(std::move(members));
}

inline DecompositionOfIdentity back_projector_family_b(const CircuitSpec& spec, int b) {
    std::vector<Projector> members;
    for (int outcome = 0; outcome < spec.dim_B(); ++outcome)
        members.push_back(back_projector_b(spec, b, outcome));
    return DecompositionOfIdentity::from_projectors(std::move(members));
}

enum class DistributionRoute {
    final_state,  // Born rule on |Ψ3⟩ with standard-basis projectors
    reduced,      // Pr(a)Pr(b)⟨Φ|P^(a)_A ⊗ Q^(b)_B|Φ⟩ on the shared state alone
};

inline std::vector<LabeledDistribution::Axis> joint_axes(const CircuitSpec& spec) {
    auto labels = [](int dim, bool ancilla) {
        std::vector<std::string> out;
        for (int i = 0; i < dim; ++i)
            out.push_back(ancilla ? CircuitSpec::ancilla_label(i)
                                  : CircuitSpec::register_label(dim, i));
        return out;
    };
    return {
        {"A", labels(spec.dim_A(), false)},
        {"B", labels(spec.dim_B(), false)},
        {"a", labels(spec.dim_a(), true)},
        {"b", labels(spec.dim_b(), true)},
    };
}

// Joint outcome distribution Pr(A, B, a, b) by either route. The two routes
// agree entrywise; tests pin the tolerance at 1e-12.
inline LabeledDistribution joint_distribution(const CircuitSpec& spec, DistributionRoute route) {
    const int nA = spec.dim_A(), nB = spec.dim_B(), na = spec.dim_a(), nb = spec.dim_b();
    std::vector<double> values(static_cast<size_t>(nA) * nB * na * nb, 0.0);

    auto slot = [&](int A, int B, int a, int b) -> double& {
        return values[static_cast<size_t>(((A * nB + B) * na + a) * nb + b)];
    };

    if (route == DistributionRoute::final_state) {
        const Ket psi3 = evolve_t0_t3(spec);
        // ⟨Ψ3|[a]⊗[A]⊗[B]⊗[b]|Ψ3⟩ for the standard-basis projectors is the
        // squared amplitude of the corresponding component.
        for (int flat = 0; flat < spec.layout.total_dim(); ++flat) {
            const auto d = spec.layout.unflatten(flat);
            slot(d[1], d[2], d[0], d[3]) += std::norm(psi3[flat]);
        }
    } else {
        const SpaceLayout ab({{"A", nA}, {"B", nB}});
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < nb; ++b) {
                const double pab = spec.pr_a(a) * spec.pr_b(b);
                for (int A = 0; A < nA; ++A)
                    for (int B = 0; B < nB; ++B) {
                        const CMatrix pq = kron(back_projector(spec, a, A).matrix(),
                                                back_projector_b(spec, b, B).matrix());
                        const cx val = expectation(spec.phi_ab, pq);
                        slot(A, B, a, b) = pab * val.real();
                    }
            }
    }
    return LabeledDistribution::normalized(joint_axes(spec), std::move(values));
}

// Simulate the variant where the ancillas are measured first and the outcome
// classically selects which unitary to apply: branch on (a, b) with weight
// Pr(a)Pr(b), evolve the shared state with the selected U,V, measure.
// Returns the largest entrywise deviation from the all-quantum circuit.
inline double deferred_equivalence(const CircuitSpec& spec) {
    const LabeledDistribution quantum = joint_distribution(spec, DistributionRoute::final_state);
    const int nA = spec.dim_A(), nB = spec.dim_B(), na = spec.dim_a(), nb = spec.dim_b();
    std::vector<double> values(static_cast<size_t>(nA) * nB * na * nb, 0.0);

    for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b) {
            const double pab = spec.pr_a(a) * spec.pr_b(b);
            if (pab == 0.0) continue;
            const Ket evolved = apply(
                kron(spec.u_family[static_cast<size_t>(a)], spec.v_family[static_cast<size_t>(b)]),
                spec.phi_ab);
            for (int A = 0; A < nA; ++A)
                for (int B = 0; B < nB; ++B)
                    values[static_cast<size_t>(((A * nB + B) * na + a) * nb + b)] =
                        pab * std::norm(evolved[A * nB + B]);
        }
    const LabeledDistribution classical =
        LabeledDistribution::normalized(joint_axes(spec), std::move(values));
    return classical.max_abs_difference(quantum);
}

// Sign observables U^(a)† σz-like U^(a) induced by the back-propagated
// projectors; defined for two-level measured registers.
inline ChshSetting circuit_chsh_setting(const CircuitSpec& spec) {
    if (spec.dim_a() != 2 || spec.dim_b() != 2 || spec.dim_A() != 2 || spec.dim_B() != 2)
        throw std::invalid_argument("circuit_chsh_setting: requires two settings and qubit registers");
    auto sign_op = [](const Projector& plus, const Projector& minus) {
        return plus.matrix() - minus.matrix();
    };
    ChshSetting s{
        {sign_op(back_projector(spec, 0, 0), back_projector(spec, 0, 1)),
         sign_op(back_projector(spec, 1, 0), back_projector(spec, 1, 1))},
        {sign_op(back_projector_b(spec, 0, 0), back_projector_b(spec, 0, 1)),
         sign_op(back_projector_b(spec, 1, 0), back_projector_b(spec, 1, 1))},
    };
    s.validate();
    return s;
}

// Outcome-product correlation C(a,b) from the joint distribution.
inline double circuit_correlation(const LabeledDistribution& joint, int a, int b) {
    const auto cond = joint.conditional(
        {{"a", joint.axes()[2].labels[static_cast<size_t>(a)]},
         {"b", joint.axes()[3].labels[static_cast<size_t>(b)]}});
    const auto& A_labels = cond.axes()[0].labels;
    const auto& B_labels = cond.axes()[1].labels;
    if (A_labels.size() != 2 || B_labels.size() != 2)
        throw std::invalid_argument("circuit_correlation: requires two-level registers");
    double c = 0;
    for (int A = 0; A < 2; ++A)
        for (int B = 0; B < 2; ++B) {
            const std::vector<int> idx{A, B};
            c += (A == 0 ? 1.0 : -1.0) * (B == 0 ? 1.0 : -1.0) * cond.at(idx);
        }
    return c;
}

// Seeded random qubit circuit for property sweeps.
inline CircuitSpec random_circuit_spec(Rng& rng, int dim = 2) {
    std::vector<CMatrix> u_family, v_family;
    for (int k = 0; k < 2; ++k) {
        u_family.push_back(random_unitary(rng, dim));
        v_family.push_back(random_unitary(rng, dim));
    }
    return CircuitSpec::make(random_ket(rng, dim * dim), random_ket(rng, 2), random_ket(rng, 2),
                             std::move(u_family), std::move(v_family));
}

}  // namespace qhist

#endif
