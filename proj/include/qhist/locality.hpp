#ifndef QHIST_LOCALITY_HPP
#define QHIST_LOCALITY_HPP

#include <optional>

#include "qhist/histories.hpp"

namespace qhist {

// ── Tripartite isolation scenarios ───────────────────────────────────────────
//
// Registers (A, B, C) where A is isolated: every interval evolves as
// T_A ⊗ T_BC, so nothing C does to B can reach A. A-histories are sequences
// of A-only events; the claim under test is that their decoherence matrix is
// unchanged by any choice of |φ⟩_C and T_BC. Couplings between A and C are
// inexpressible by construction.

struct TripartiteScenario {
    SpaceLayout layout;  // (A, B, C)
    std::vector<CMatrix> t_a;   // per interval, on A
    std::vector<CMatrix> t_bc;  // per interval, on B⊗C
    Ket phi_ab;                 // shared A⊗B state
    Ket phi_c;                  // C state
    std::vector<DecompositionOfIdentity> a_events;  // per time, on A only

    static TripartiteScenario make(int dim_a, int dim_b, int dim_c, Ket phi_ab, Ket phi_c,
                                   std::vector<CMatrix> t_a, std::vector<CMatrix> t_bc,
                                   std::vector<DecompositionOfIdentity> a_events) {
        SpaceLayout layout({{"A", dim_a}, {"B", dim_b}, {"C", dim_c}});
        if (phi_ab.dim() != dim_a * dim_b)
            throw std::invalid_argument("TripartiteScenario: shared state must live on A and B");
        if (phi_c.dim() != dim_c)
            throw std::invalid_argument("TripartiteScenario: environment state must live on C");
        if (!phi_ab.is_normalized(1e-10) || !phi_c.is_normalized(1e-10))
            throw std::invalid_argument("TripartiteScenario: states must be normalized");
        if (t_a.empty() || t_a.size() != t_bc.size() || t_a.size() != a_events.size())
            throw std::invalid_argument("TripartiteScenario: one A evolution, one B-C evolution "
                                        "and one A event set per interval required");
        for (const auto& u : t_a)
            if (!u.square() || u.rows() != dim_a || !u.is_unitary(1e-10))
                throw std::invalid_argument("TripartiteScenario: A evolutions must be unitary on A");
        for (const auto& u : t_bc)
            if (!u.square() || u.rows() != dim_b * dim_c || !u.is_unitary(1e-10))
                throw std::invalid_argument(
                    "TripartiteScenario: B-C evolutions must be unitary on the B-C pair");
        for (const auto& ev : a_events)
            if (ev.dim() != dim_a)
                throw std::invalid_argument("TripartiteScenario: events must act on A alone");
        return TripartiteScenario{std::move(layout), std::move(t_a),     std::move(t_bc),
                                  std::move(phi_ab), std::move(phi_c),   std::move(a_events)};
    }

    int dim_a() const { return layout.dim(0); }
    int dim_b() const { return layout.dim(1); }
    int dim_c() const { return layout.dim(2); }
    int n_times() const { return static_cast<int>(a_events.size()); }

    Ket initial_state() const { return kron(phi_ab, phi_c); }

    // The same history family, expressed on the full space.
    HistoryFamily full_family() const {
        std::vector<double> times{0.0};
        std::vector<DecompositionOfIdentity> events;
        std::vector<CMatrix> evolutions;
        for (int j = 0; j < n_times(); ++j) {
            times.push_back(static_cast<double>(j + 1));
            std::vector<Projector> members;
            for (const auto& p : a_events[static_cast<size_t>(j)].members())
                members.push_back(
                    Projector::from_matrix(embed(p.matrix(), layout, {"A"})));
            events.push_back(DecompositionOfIdentity::from_projectors(std::move(members)));
            evolutions.push_back(kron(t_a[static_cast<size_t>(j)], t_bc[static_cast<size_t>(j)]));
        }
        return HistoryFamily::make(layout, initial_state(), std::move(times), std::move(events),
                                   std::move(evolutions));
    }
};

// ρ_A at t0, traced straight from the shared state; manifestly independent of
// everything on the C side.
inline CMatrix reduced_rho_a(const TripartiteScenario& scenario) {
    const SpaceLayout ab({{"A", scenario.dim_a()}, {"B", scenario.dim_b()}});
    return partial_trace(outer(scenario.phi_ab, scenario.phi_ab), ab, {"A"});
}

// A-only chain operator K_A(α) = P_n T_A(n) ··· P_1 T_A(1).
inline CMatrix a_chain_operator(const TripartiteScenario& scenario, std::span<const int> alpha) {
    if (alpha.size() != scenario.a_events.size())
        throw std::invalid_argument("a_chain_operator: wrong history length");
    CMatrix k = CMatrix::identity(scenario.dim_a());
    for (size_t j = 0; j < alpha.size(); ++j) {
        const auto& ev = scenario.a_events[j];
        if (alpha[j] < 0 || static_cast<size_t>(alpha[j]) >= ev.size())
            throw std::invalid_argument("a_chain_operator: event index out of range");
        k = ev[static_cast<size_t>(alpha[j])].matrix() * (scenario.t_a[j] * k);
    }
    return k;
}

// Decoherence functional of an A-history pair, evaluated both on the full
// state and in the reduced form Tr[ρ_A K_A† K_A']. The two must agree; a gap
// beyond tolerance means the isolation assumption was broken somewhere.
inline cx a_history_functional(const TripartiteScenario& scenario, std::span<const int> alpha,
                               std::span<const int> alpha_prime, double tol = 1e-12) {
    const HistoryFamily family = scenario.full_family();
    const cx full = decoherence_functional(family, alpha, alpha_prime);
    const cx reduced = decoherence_functional_reduced(
        reduced_rho_a(scenario), a_chain_operator(scenario, alpha),
        a_chain_operator(scenario, alpha_prime));
    if (std::abs(full - reduced) > tol * (1.0 + std::abs(full)))
        throw std::runtime_error(
            "a_history_functional: full-state and reduced forms disagree by " +
            std::to_string(std::abs(full - reduced)) + "; factorized dynamics violated");
    return full;
}

// Full decoherence matrix over all A-history pairs (full-state form).
inline CMatrix a_decoherence_matrix(const TripartiteScenario& scenario) {
    const HistoryFamily family = scenario.full_family();
    const size_t n = family.history_count();
    std::vector<Ket> states;
    states.reserve(n);
    for (size_t h = 0; h < n; ++h) states.push_back(chain_state(family, family.history_indices(h)));
    CMatrix j(static_cast<int>(n), static_cast<int>(n));
    for (size_t h1 = 0; h1 < n; ++h1)
        for (size_t h2 = 0; h2 < n; ++h2)
            j(static_cast<int>(h1), static_cast<int>(h2)) = states[h1].inner(states[h2]);
    return j;
}

// One "something done to B": a fresh C state and fresh B-C couplings.
struct LocalityVariation {
    Ket phi_c;
    std::vector<CMatrix> t_bc;
};

// Rebuild the scenario under each variation and measure how much the
// A-history decoherence matrix moves. The locality statement is that it
// does not move at all.
inline double locality_invariance(const TripartiteScenario& scenario,
                                  const std::vector<LocalityVariation>& variations) {
    if (variations.size() < 2)
        throw std::invalid_argument("locality_invariance: need at least two variations");
    std::optional<CMatrix> reference;
    double max_dev = 0;
    for (const auto& var : variations) {
        const auto varied = TripartiteScenario::make(
            scenario.dim_a(), scenario.dim_b(), scenario.dim_c(), scenario.phi_ab, var.phi_c,
            scenario.t_a, var.t_bc, scenario.a_events);
        const CMatrix j = a_decoherence_matrix(varied);
        if (!reference)
            reference = j;
        else
            max_dev = std::max(max_dev, (j - *reference).max_abs());
    }
    return max_dev;
}

// Seeded variation list: random C states and B-C couplings, plus one
// maximally entangling shift gate on the B-C pair.
inline std::vector<LocalityVariation> random_variations(Rng& rng, const TripartiteScenario& base,
                                                        int count) {
    std::vector<LocalityVariation> out;
    out.push_back(LocalityVariation{base.phi_c, base.t_bc});
    const int dbc = base.dim_b() * base.dim_c();
    for (int k = 1; k < count; ++k) {
        LocalityVariation v;
        v.phi_c = random_ket(rng, base.dim_c());
        for (int j = 0; j < base.n_times(); ++j) v.t_bc.push_back(random_unitary(rng, dbc));
        out.push_back(std::move(v));
    }
    // controlled-shift coupling: |i⟩_B|j⟩_C → |i⟩_B|j+i mod d⟩_C
    LocalityVariation cnot_like;
    cnot_like.phi_c = Ket::basis(base.dim_c(), 0);
    CMatrix shift(dbc, dbc);
    for (int i = 0; i < base.dim_b(); ++i)
        for (int j = 0; j < base.dim_c(); ++j)
            shift(i * base.dim_c() + (j + i) % base.dim_c(), i * base.dim_c() + j) = 1.0;
    for (int j = 0; j < base.n_times(); ++j) cnot_like.t_bc.push_back(shift);
    out.push_back(std::move(cnot_like));
    return out;
}

}  // namespace qhist

#endif
