#ifndef QHIST_HISTORIES_HPP
#define QHIST_HISTORIES_HPP

#include "qhist/circuit.hpp"
#include "qhist/distribution.hpp"
#include "qhist/projector.hpp"

namespace qhist {

// ── History families ─────────────────────────────────────────────────────────
//
// A family is an initial state at t0 followed, at each later time, by one
// event from a decomposition of the identity, with unitary evolution on each
// interval. A history is a choice of one event per time; its chain operator is
//   K(α) = P_n^(α_n) T(t_n, t_{n-1}) ··· P_1^(α_1) T(t_1, t_0).

struct HistoryFamily {
    SpaceLayout layout;
    Ket initial;                                   // |Ψ0⟩ at times[0]
    std::vector<double> times;                     // t0 < t1 < ... < tn
    std::vector<DecompositionOfIdentity> events;   // one per time t1..tn
    std::vector<CMatrix> evolutions;               // T(t_j, t_{j-1}), j = 1..n

    static HistoryFamily make(SpaceLayout layout, Ket initial, std::vector<double> times,
                              std::vector<DecompositionOfIdentity> events,
                              std::vector<CMatrix> evolutions) {
        const int d = layout.total_dim();
        if (initial.dim() != d)
            throw std::invalid_argument("HistoryFamily: initial state does not match layout");
        if (!initial.is_normalized(1e-10))
            throw std::invalid_argument("HistoryFamily: initial state not normalized");
        if (times.size() < 2)
            throw std::invalid_argument("HistoryFamily: need at least one event time");
        if (times.size() > 5)
            throw std::invalid_argument("HistoryFamily: at most 4 event times supported");
        for (size_t j = 1; j < times.size(); ++j)
            if (!(times[j - 1] < times[j]))
                throw std::invalid_argument("HistoryFamily: times must be strictly increasing");
        if (events.size() != times.size() - 1 || evolutions.size() != times.size() - 1)
            throw std::invalid_argument("HistoryFamily: one decomposition and one evolution "
                                        "per interval required");
        for (const auto& ev : events)
            if (ev.dim() != d)
                throw std::invalid_argument("HistoryFamily: event decomposition dim mismatch");
        for (const auto& t : evolutions) {
            if (!t.square() || t.rows() != d)
                throw std::invalid_argument("HistoryFamily: evolution dim mismatch");
            if (!t.is_unitary(1e-10))
                throw std::invalid_argument("HistoryFamily: evolution is not unitary");
        }
        return HistoryFamily{std::move(layout), std::move(initial), std::move(times),
                             std::move(events), std::move(evolutions)};
    }

    int n_times() const { return static_cast<int>(events.size()); }

    size_t history_count() const {
        size_t n = 1;
        for (const auto& ev : events) n *= ev.size();
        return n;
    }

    // histories enumerated with the first event time slowest
    std::vector<int> history_indices(size_t flat) const {
        std::vector<int> alpha(events.size());
        for (size_t j = events.size(); j-- > 0;) {
            alpha[j] = static_cast<int>(flat % events[j].size());
            flat /= events[j].size();
        }
        return alpha;
    }

    void check_alpha(std::span<const int> alpha) const {
        if (alpha.size() != events.size())
            throw std::invalid_argument("HistoryFamily: wrong history length");
        for (size_t j = 0; j < events.size(); ++j)
            if (alpha[j] < 0 || static_cast<size_t>(alpha[j]) >= events[j].size())
                throw std::invalid_argument("HistoryFamily: event index out of range at time " +
                                            std::to_string(j + 1));
    }
};

inline CMatrix chain_operator(const HistoryFamily& family, std::span<const int> alpha) {
    family.check_alpha(alpha);
    CMatrix k = family.evolutions[0];
    k = family.events[0][static_cast<size_t>(alpha[0])].matrix() * k;
    for (size_t j = 1; j < family.events.size(); ++j)
        k = family.events[j][static_cast<size_t>(alpha[j])].matrix() * (family.evolutions[j] * k);
    return k;
}

// K(α)|Ψ0⟩, evaluated as a chain of matrix-vector products.
inline Ket chain_state(const HistoryFamily& family, std::span<const int> alpha) {
    family.check_alpha(alpha);
    Ket v = family.initial;
    for (size_t j = 0; j < family.events.size(); ++j) {
        v = apply(family.evolutions[j], v);
        v = apply(family.events[j][static_cast<size_t>(alpha[j])].matrix(), v);
    }
    return v;
}

// 𝒥(α, α′) = ⟨Ψ0|K(α)† K(α′)|Ψ0⟩. Diagonal entries are history weights;
// a family supports probabilities only when the off-diagonals vanish.
inline cx decoherence_functional(const HistoryFamily& family, std::span<const int> alpha,
                                 std::span<const int> alpha_prime) {
    return chain_state(family, alpha).inner(chain_state(family, alpha_prime));
}

// Reduced form Tr[ρ K† K′] for subsystem histories with factorized dynamics.
inline cx decoherence_functional_reduced(const CMatrix& rho, const CMatrix& k,
                                         const CMatrix& k_prime) {
    return (rho * (k.adjoint() * k_prime)).trace();
}

// Full functional table. Histories that differ in their final event are
// orthogonal by construction, so the only entries that can fail to vanish
// live in blocks of fixed final outcome, indexed by the earlier outcomes.
struct DecoherenceMatrix {
    std::vector<CMatrix> blocks;   // one per final-time outcome
    std::vector<int> earlier_shape;
    double max_offdiag = 0;        // largest |off-diagonal| across all blocks
    double max_diag = 0;           // largest diagonal weight (the scale)

    size_t earlier_count() const {
        size_t n = 1;
        for (int s : earlier_shape) n *= static_cast<size_t>(s);
        return n;
    }
};

inline DecoherenceMatrix decoherence_matrix(const HistoryFamily& family) {
    DecoherenceMatrix out;
    for (int j = 0; j + 1 < family.n_times(); ++j)
        out.earlier_shape.push_back(static_cast<int>(family.events[static_cast<size_t>(j)].size()));
    const size_t n_earlier = out.earlier_count();
    const size_t n_final = family.events.back().size();

    // cache K(α)|Ψ0⟩ per full history
    std::vector<std::vector<Ket>> states(n_final);
    for (size_t f = 0; f < n_final; ++f) {
        states[f].reserve(n_earlier);
        for (size_t e = 0; e < n_earlier; ++e) {
            std::vector<int> alpha(out.earlier_shape.size());
            size_t rest = e;
            for (size_t j = out.earlier_shape.size(); j-- > 0;) {
                alpha[j] = static_cast<int>(rest % static_cast<size_t>(out.earlier_shape[j]));
                rest /= static_cast<size_t>(out.earlier_shape[j]);
            }
            alpha.push_back(static_cast<int>(f));
            states[f].push_back(chain_state(family, alpha));
        }
    }

    for (size_t f = 0; f < n_final; ++f) {
        CMatrix block(static_cast<int>(n_earlier), static_cast<int>(n_earlier));
        for (size_t e1 = 0; e1 < n_earlier; ++e1)
            for (size_t e2 = 0; e2 < n_earlier; ++e2) {
                const cx val = states[f][e1].inner(states[f][e2]);
                block(static_cast<int>(e1), static_cast<int>(e2)) = val;
                if (e1 == e2)
                    out.max_diag = std::max(out.max_diag, val.real());
                else
                    out.max_offdiag = std::max(out.max_offdiag, std::abs(val));
            }
        out.blocks.push_back(std::move(block));
    }
    return out;
}

struct ConsistencyResult {
    bool consistent = false;
    double max_offdiag = 0;
    double scale = 0;  // largest diagonal weight
};

// Medium decoherence: every off-diagonal functional entry vanishes, relative
// to the largest history weight.
inline ConsistencyResult consistency_check(const HistoryFamily& family, double tol = 1e-10) {
    const auto dm = decoherence_matrix(family);
    const double scale = std::max(dm.max_diag, 1e-300);
    return ConsistencyResult{dm.max_offdiag <= tol * scale, dm.max_offdiag, dm.max_diag};
}

// Diagonal of the functional as a probability table over the history indices.
// Refuses inconsistent families, where those numbers are not probabilities.
inline LabeledDistribution master_distribution(const HistoryFamily& family, double tol = 1e-10) {
    const auto check = consistency_check(family, tol);
    if (!check.consistent)
        throw std::domain_error(
            "master_distribution: family is not consistent (max off-diagonal " +
            std::to_string(check.max_offdiag) + " vs scale " + std::to_string(check.scale) +
            "); probabilities are undefined");

    std::vector<LabeledDistribution::Axis> axes;
    for (size_t j = 0; j < family.events.size(); ++j) {
        LabeledDistribution::Axis ax;
        ax.name = "t" + std::to_string(j + 1);
        for (size_t k = 0; k < family.events[j].size(); ++k)
            ax.labels.push_back(std::to_string(k + 1));
        axes.push_back(std::move(ax));
    }
    std::vector<double> values(family.history_count());
    for (size_t flat = 0; flat < values.size(); ++flat) {
        const auto alpha = family.history_indices(flat);
        values[flat] = std::max(0.0, decoherence_functional(family, alpha, alpha).real());
    }
    return LabeledDistribution::normalized(std::move(axes), std::move(values), 1e-10);
}

// ── Circuit history families ─────────────────────────────────────────────────
//
// The family used for the hidden-variable analysis: initial circuit state,
// a decomposition {Λ_λ} of the shared A⊗B register at t1, and the product
// events [a]⊗P^(a)_A⊗Q^(b)_B⊗[b] at t2 (measurement outcomes carried back
// through the gates). All evolutions on these intervals are the identity.

struct CircuitFamilyResult {
    HistoryFamily family;
    // event index at t2 runs over (a, A, B, b) with a slowest
    int na, nA, nB, nb;
};

inline CircuitFamilyResult circuit_history_family(const CircuitSpec& spec,
                                                  const DecompositionOfIdentity& lambda) {
    if (lambda.dim() != spec.dim_A() * spec.dim_B())
        throw std::invalid_argument("circuit_history_family: hidden-variable decomposition must "
                                    "act on the shared register pair");
    const int total = spec.layout.total_dim();

    std::vector<Projector> lambda_full;
    for (const auto& p : lambda.members())
        lambda_full.push_back(Projector::from_matrix(embed(p.matrix(), spec.layout, {"A", "B"})));

    std::vector<Projector> final_events;
    for (int a = 0; a < spec.dim_a(); ++a) {
        const CMatrix pa = outer(Ket::basis(spec.dim_a(), a), Ket::basis(spec.dim_a(), a));
        for (int A = 0; A < spec.dim_A(); ++A) {
            const CMatrix pA = back_projector(spec, a, A).matrix();
            for (int B = 0; B < spec.dim_B(); ++B) {
                for (int b = 0; b < spec.dim_b(); ++b) {
                    const CMatrix pb = outer(Ket::basis(spec.dim_b(), b), Ket::basis(spec.dim_b(), b));
                    const CMatrix q = back_projector_b(spec, b, B).matrix();
                    final_events.push_back(
                        Projector::from_matrix(kron(pa, kron(pA, kron(q, pb)))));
                }
            }
        }
    }

    auto family = HistoryFamily::make(
        spec.layout, spec.initial_state(), {0.0, 1.0, 2.0},
        {DecompositionOfIdentity::from_projectors(std::move(lambda_full)),
         DecompositionOfIdentity::from_projectors(std::move(final_events))},
        {CMatrix::identity(total), CMatrix::identity(total)});
    return CircuitFamilyResult{std::move(family), spec.dim_a(), spec.dim_A(), spec.dim_B(),
                               spec.dim_b()};
}

// Master distribution of the circuit family with axes (A, B, a, b, lambda).
inline LabeledDistribution circuit_master_distribution(const CircuitSpec& spec,
                                                       const DecompositionOfIdentity& lambda,
                                                       double tol = 1e-10) {
    const auto cf = circuit_history_family(spec, lambda);
    const auto raw = master_distribution(cf.family, tol);  // axes (t1, t2)

    std::vector<LabeledDistribution::Axis> axes = joint_axes(spec);
    LabeledDistribution::Axis lam{"lambda", {}};
    for (size_t k = 0; k < lambda.size(); ++k) lam.labels.push_back(std::to_string(k + 1));
    axes.push_back(std::move(lam));

    const int nA = cf.nA, nB = cf.nB, na = cf.na, nb = cf.nb;
    const int nl = static_cast<int>(lambda.size());
    std::vector<double> values(static_cast<size_t>(nA) * nB * na * nb * nl);
    for (int A = 0; A < nA; ++A)
        for (int B = 0; B < nB; ++B)
            for (int a = 0; a < na; ++a)
                for (int b = 0; b < nb; ++b)
                    for (int l = 0; l < nl; ++l) {
                        // t2 events were enumerated with (a, A, B, b), a slowest
                        const int t2 = ((a * nA + A) * nB + B) * nb + b;
                        const std::vector<int> raw_idx{l, t2};
                        values[static_cast<size_t>((((A * nB + B) * na + a) * nb + b) * nl + l)] =
                            raw.at(raw_idx);
                    }
    return LabeledDistribution::normalized(std::move(axes), std::move(values), 1e-10);
}

// ── Factorization over hidden variables ──────────────────────────────────────

// Branch states |Φ_λ⟩ = Λ_λ|Φ⟩; zero-norm branches carry no probability.
inline std::vector<Ket> branch_states(const Ket& phi, const DecompositionOfIdentity& lambda) {
    std::vector<Ket> out;
    out.reserve(lambda.size());
    for (const auto& p : lambda.members()) out.push_back(apply(p.matrix(), phi));
    return out;
}

struct FactorizationReport {
    bool holds = false;
    double worst_residual = 0;
    // per-λ: weight ⟨Φ_λ|Φ_λ⟩ and the worst |⟨PQ⟩_λ - ⟨P⟩_λ⟨Q⟩_λ| over A,B,a,b
    struct PerLambda {
        double weight = 0;
        double worst_residual = 0;
        bool skipped = false;  // zero-weight branch
    };
    std::vector<PerLambda> per_lambda;
};

// Does every branch state make the measured-basis projectors statistically
// independent across the two sides? ⟨R⟩_λ = ⟨Φ_λ|R|Φ_λ⟩ / ⟨Φ_λ|Φ_λ⟩.
inline FactorizationReport factorization_check(
    const Ket& phi, const DecompositionOfIdentity& lambda,
    const std::vector<DecompositionOfIdentity>& p_families,
    const std::vector<DecompositionOfIdentity>& q_families, double tol) {
    const int dim_A = p_families.front().dim();
    const int dim_B = q_families.front().dim();
    if (phi.dim() != dim_A * dim_B || lambda.dim() != phi.dim())
        throw std::invalid_argument("factorization_check: dimension mismatch");

    const SpaceLayout ab({{"A", dim_A}, {"B", dim_B}});
    std::vector<CMatrix> p_embedded, q_embedded;
    for (const auto& pf : p_families)
        for (const auto& p : pf.members()) p_embedded.push_back(embed(p.matrix(), ab, {"A"}));
    for (const auto& qf : q_families)
        for (const auto& q : qf.members()) q_embedded.push_back(embed(q.matrix(), ab, {"B"}));

    FactorizationReport report;
    report.holds = true;
    const auto branches = branch_states(phi, lambda);
    for (const auto& branch : branches) {
        FactorizationReport::PerLambda row;
        const double w = branch.norm() * branch.norm();
        row.weight = w;
        if (w <= 1e-14) {
            row.skipped = true;
            report.per_lambda.push_back(row);
            continue;
        }
        const Ket unit = branch * cx{1.0 / branch.norm(), 0.0};
        for (const auto& p_emb : p_embedded) {
            const double mean_p = expectation(unit, p_emb).real();
            for (const auto& q_emb : q_embedded) {
                const double mean_q = expectation(unit, q_emb).real();
                const double mean_pq = expectation(unit, p_emb * q_emb).real();
                row.worst_residual =
                    std::max(row.worst_residual, std::abs(mean_pq - mean_p * mean_q));
            }
        }
        report.worst_residual = std::max(report.worst_residual, row.worst_residual);
        if (row.worst_residual > tol) report.holds = false;
        report.per_lambda.push_back(row);
    }
    return report;
}

}  // namespace qhist

#endif
