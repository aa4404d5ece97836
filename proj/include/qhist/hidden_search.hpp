#ifndef QHIST_HIDDEN_SEARCH_HPP
#define QHIST_HIDDEN_SEARCH_HPP

#include <optional>

#include "qhist/histories.hpp"

namespace qhist {

// ── Candidate hidden-variable decompositions ─────────────────────────────────

enum class CandidateKind {
    von_neumann,    // {[Φ], I - [Φ]}
    local_basis_a,  // {[α_j] ⊗ I_B} from a joint eigenbasis of the A-side projectors
    local_basis_b,  // {I_A ⊗ [β_j]} likewise for the B side
    product_grid,   // {[α_i] ⊗ [β_j]} over enumerated local bases
};

struct CandidateClass {
    CandidateKind kind = CandidateKind::von_neumann;
    int resolution = 2;  // product_grid: angles per side (qubits), samples (qudits)
    std::uint64_t seed = kDefaultSeed;

    void validate() const {
        if (kind == CandidateKind::product_grid && resolution < 2)
            throw std::invalid_argument("CandidateClass: grid resolution must be >= 2");
    }
};

namespace detail {

// Shared eigenbasis of a projector family via a weighted sum with
// rationally independent weights: commuting members make every eigenvector
// of Σ_k sqrt(prime_k) P_k a joint eigenvector. For noncommuting members the
// construction still yields a valid decomposition of the identity, and the
// downstream checks fail honestly.
inline CMatrix weighted_family_basis(const std::vector<DecompositionOfIdentity>& families) {
    static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    const int d = families.front().dim();
    CMatrix sum(d, d);
    size_t k = 0;
    for (const auto& fam : families)
        for (const auto& p : fam.members()) {
            sum = sum + p.matrix() * cx{std::sqrt(primes[k % 12]) * (1.0 + static_cast<double>(k / 12)), 0.0};
            ++k;
        }
    return eig_hermitian(sum).eigenvectors;
}

// Orthonormal qubit basis from Bloch angles: {cos(θ/2)|0⟩ + e^{iφ}sin(θ/2)|1⟩,
// sin(θ/2)|0⟩ - e^{iφ}cos(θ/2)|1⟩} as matrix columns.
inline CMatrix bloch_basis(double theta, double phi) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const cx e = std::polar(1.0, phi);
    CMatrix m(2, 2);
    m(0, 0) = c;
    m(1, 0) = e * s;
    m(0, 1) = s;
    m(1, 1) = -e * c;
    return m;
}

// Deterministic basis list per side: polar x azimuth grid for qubits, seeded
// unitary samples for higher dimensions. θ = 0 appears once (all azimuths
// coincide there).
inline std::vector<CMatrix> grid_bases(int dim, int resolution, Rng& rng) {
    std::vector<CMatrix> bases;
    if (dim == 2) {
        const double pi = 3.14159265358979323846;
        bases.push_back(bloch_basis(0.0, 0.0));
        for (int i = 1; i < resolution; ++i)
            for (int j = 0; j < resolution; ++j)
                bases.push_back(bloch_basis(pi * i / resolution, 2.0 * pi * j / resolution));
    } else {
        for (int k = 0; k < resolution * resolution; ++k) bases.push_back(random_unitary(rng, dim));
    }
    return bases;
}

}  // namespace detail

// Enumerate candidate decompositions of the shared-register identity.
inline std::vector<DecompositionOfIdentity> generate_candidates(const CandidateClass& cls,
                                                                const CircuitSpec& spec) {
    cls.validate();
    const int dim_A = spec.dim_A(), dim_B = spec.dim_B();
    std::vector<DecompositionOfIdentity> out;

    switch (cls.kind) {
        case CandidateKind::von_neumann: {
            const Projector on_phi = Projector::onto(spec.phi_ab);
            out.push_back(DecompositionOfIdentity::from_projectors(
                {on_phi, on_phi.complement()}));
            break;
        }
        case CandidateKind::local_basis_a: {
            std::vector<DecompositionOfIdentity> fams;
            for (int a = 0; a < spec.dim_a(); ++a) fams.push_back(back_projector_family(spec, a));
            const CMatrix basis = detail::weighted_family_basis(fams);
            std::vector<Projector> members;
            for (int j = 0; j < dim_A; ++j) {
                Ket v(dim_A);
                for (int i = 0; i < dim_A; ++i) v[i] = basis(i, j);
                members.push_back(Projector::from_matrix(
                    kron(outer(v, v), CMatrix::identity(dim_B))));
            }
            out.push_back(DecompositionOfIdentity::from_projectors(std::move(members)));
            break;
        }
        case CandidateKind::local_basis_b: {
            std::vector<DecompositionOfIdentity> fams;
            for (int b = 0; b < spec.dim_b(); ++b) fams.push_back(back_projector_family_b(spec, b));
            const CMatrix basis = detail::weighted_family_basis(fams);
            std::vector<Projector> members;
            for (int j = 0; j < dim_B; ++j) {
                Ket v(dim_B);
                for (int i = 0; i < dim_B; ++i) v[i] = basis(i, j);
                members.push_back(Projector::from_matrix(
                    kron(CMatrix::identity(dim_A), outer(v, v))));
            }
            out.push_back(DecompositionOfIdentity::from_projectors(std::move(members)));
            break;
        }
        case CandidateKind::product_grid: {
            Rng rng(cls.seed);
            const auto bases_a = detail::grid_bases(dim_A, cls.resolution, rng);
            const auto bases_b = detail::grid_bases(dim_B, cls.resolution, rng);
            for (const auto& ba : bases_a)
                for (const auto& bb : bases_b) {
                    std::vector<Projector> members;
                    for (int i = 0; i < dim_A; ++i)
                        for (int j = 0; j < dim_B; ++j) {
                            Ket va(dim_A), vb(dim_B);
                            for (int r = 0; r < dim_A; ++r) va[r] = ba(r, i);
                            for (int r = 0; r < dim_B; ++r) vb[r] = bb(r, j);
                            members.push_back(Projector::onto(kron(va, vb)));
                        }
                    out.push_back(DecompositionOfIdentity::from_projectors(std::move(members)));
                }
            break;
        }
    }
    return out;
}

// ── Candidate evaluation ─────────────────────────────────────────────────────

struct CandidateEvaluation {
    bool consistent = false;
    bool independent = false;
    bool factorizing = false;
    double consistency_residual = 0;    // relative to the largest history weight
    double independence_residual = 0;
    double factorization_residual = 0;

    bool all() const { return consistent && independent && factorizing; }
};

// Checks the three conditions on one candidate, working on the shared
// register pair: branch states |Φ_λ⟩ = Λ_λ|Φ⟩, off-diagonal functional
// entries Pr(a)Pr(b)⟨Φ_λ|P^(a)_A Q^(b)_B|Φ_λ′⟩ for λ ≠ λ′, hidden-variable
// independence of the setting choice, and per-branch factorization.
inline CandidateEvaluation evaluate_candidate(const DecompositionOfIdentity& lambda,
                                              const CircuitSpec& spec, double tol = 1e-10) {
    CandidateEvaluation eval;
    const int dim_A = spec.dim_A(), dim_B = spec.dim_B();
    const SpaceLayout ab({{"A", dim_A}, {"B", dim_B}});

    std::vector<DecompositionOfIdentity> p_families, q_families;
    for (int a = 0; a < spec.dim_a(); ++a) p_families.push_back(back_projector_family(spec, a));
    for (int b = 0; b < spec.dim_b(); ++b) q_families.push_back(back_projector_family_b(spec, b));

    const auto branches = branch_states(spec.phi_ab, lambda);

    // consistency: off-diagonals of every outcome block vanish relative to
    // the largest diagonal weight
    double max_offdiag = 0, max_diag = 0;
    for (int a = 0; a < spec.dim_a(); ++a)
        for (int b = 0; b < spec.dim_b(); ++b) {
            const double pab = spec.pr_a(a) * spec.pr_b(b);
            for (int A = 0; A < dim_A; ++A)
                for (int B = 0; B < dim_B; ++B) {
                    const CMatrix pq = kron(p_families[static_cast<size_t>(a)][static_cast<size_t>(A)].matrix(),
                                            q_families[static_cast<size_t>(b)][static_cast<size_t>(B)].matrix());
                    for (size_t l1 = 0; l1 < branches.size(); ++l1) {
                        const Ket lhs = apply(pq, branches[l1]);
                        for (size_t l2 = 0; l2 < branches.size(); ++l2) {
                            const cx val = branches[l2].inner(lhs) * pab;
                            if (l1 == l2)
                                max_diag = std::max(max_diag, val.real());
                            else
                                max_offdiag = std::max(max_offdiag, std::abs(val));
                        }
                    }
                }
        }
    eval.consistency_residual = max_offdiag / std::max(max_diag, 1e-300);
    eval.consistent = max_offdiag <= tol * std::max(max_diag, 1e-300);

    // independence: Pr(λ|a,b) = Pr(λ) on the diagonal table
    {
        std::vector<LabeledDistribution::Axis> axes = joint_axes(spec);
        LabeledDistribution::Axis lam{"lambda", {}};
        for (size_t k = 0; k < lambda.size(); ++k) lam.labels.push_back(std::to_string(k + 1));
        axes.push_back(std::move(lam));

        const int na = spec.dim_a(), nb = spec.dim_b();
        const int nl = static_cast<int>(lambda.size());
        std::vector<double> diag(static_cast<size_t>(dim_A) * dim_B * na * nb * nl);
        for (int A = 0; A < dim_A; ++A)
            for (int B = 0; B < dim_B; ++B)
                for (int a = 0; a < na; ++a)
                    for (int b = 0; b < nb; ++b) {
                        const CMatrix pq =
                            kron(p_families[static_cast<size_t>(a)][static_cast<size_t>(A)].matrix(),
                                 q_families[static_cast<size_t>(b)][static_cast<size_t>(B)].matrix());
                        const double pab = spec.pr_a(a) * spec.pr_b(b);
                        for (int l = 0; l < nl; ++l) {
                            const double v =
                                pab * expectation(branches[static_cast<size_t>(l)], pq).real();
                            diag[static_cast<size_t>((((A * dim_B + B) * na + a) * nb + b) * nl + l)] =
                                std::max(0.0, v);
                        }
                    }
        const auto table = LabeledDistribution::normalized(std::move(axes), std::move(diag), 1e-9);
        const auto ind = independence_check(table, tol);
        eval.independent = ind.independent;
        eval.independence_residual = ind.worst_residual;
    }

    // factorization on each branch
    const auto fact = factorization_check(spec.phi_ab, lambda, p_families, q_families, tol);
    eval.factorizing = fact.holds;
    eval.factorization_residual = fact.worst_residual;
    return eval;
}

// ── Search ───────────────────────────────────────────────────────────────────

enum class SearchOutcome { found, not_found_in_class, impossible };

struct SearchVerdict {
    SearchOutcome outcome = SearchOutcome::not_found_in_class;
    std::optional<DecompositionOfIdentity> witness;    // set when found
    std::optional<double> chsh_certificate;            // set when computable
    int candidates_examined = 0;
    std::vector<CandidateEvaluation> examined;  // residuals per candidate, in scan order
    CandidateEvaluation best;   // smallest worst-residual among examined
    bool certificate_saturates_bound = false;  // |certificate - 2| <= 1e-10

    static constexpr double kImpossibleThreshold = 2.0 + 1e-6;
};

// Bell certificate from the circuit's own joint distribution; computable for
// two settings per side on two-level registers.
inline std::optional<double> bell_certificate(const CircuitSpec& spec) {
    if (spec.dim_a() != 2 || spec.dim_b() != 2 || spec.dim_A() != 2 || spec.dim_B() != 2)
        return std::nullopt;
    const auto joint = joint_distribution(spec, DistributionRoute::reduced);
    return max_chsh_combination(
        circuit_correlation(joint, 0, 0), circuit_correlation(joint, 0, 1),
        circuit_correlation(joint, 1, 0), circuit_correlation(joint, 1, 1));
}

// A violated Bell bound is a nonexistence proof for the whole class, so the
// certificate is checked before any candidate: found and impossible can never
// both be reachable on one spec. Within the class the first candidate passing
// all three checks wins (canonical enumeration order keeps this deterministic).
inline SearchVerdict search(const CircuitSpec& spec, const CandidateClass& cls, double tol = 1e-10) {
    SearchVerdict verdict;
    verdict.chsh_certificate = bell_certificate(spec);
    if (verdict.chsh_certificate) {
        verdict.certificate_saturates_bound = std::abs(*verdict.chsh_certificate - 2.0) <= 1e-10;
        if (*verdict.chsh_certificate > SearchVerdict::kImpossibleThreshold) {
            verdict.outcome = SearchOutcome::impossible;
            return verdict;
        }
    }

    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& lambda : generate_candidates(cls, spec)) {
        const auto eval = evaluate_candidate(lambda, spec, tol);
        ++verdict.candidates_examined;
        verdict.examined.push_back(eval);
        const double score = std::max({eval.consistency_residual, eval.independence_residual,
                                       eval.factorization_residual});
        if (score < best_score) {
            best_score = score;
            verdict.best = eval;
        }
        if (eval.all()) {
            verdict.outcome = SearchOutcome::found;
            verdict.witness = lambda;
            verdict.best = eval;
            return verdict;
        }
    }
    verdict.outcome = SearchOutcome::not_found_in_class;
    return verdict;
}

// LHV model induced by a witness: weights Pr(λ) = ⟨Φ_λ|Φ_λ⟩ and response rows
// Pr(A|a,λ) = ⟨P^(a)_A⟩_λ. Defined for two-level measured registers.
inline LhvModel induced_lhv_model(const CircuitSpec& spec, const DecompositionOfIdentity& lambda) {
    if (spec.dim_A() != 2 || spec.dim_B() != 2)
        throw std::invalid_argument("induced_lhv_model: requires two-level measured registers");
    LhvModel model;
    for (int a = 0; a < spec.dim_a(); ++a) model.a_settings.push_back(std::to_string(a + 1));
    for (int b = 0; b < spec.dim_b(); ++b) model.b_settings.push_back(std::to_string(b + 1));
    model.a_outcomes = {+1, -1};
    model.b_outcomes = {+1, -1};

    const auto branches = branch_states(spec.phi_ab, lambda);
    double total_weight = 0;
    for (const auto& branch : branches) {
        const double w = branch.norm() * branch.norm();
        if (w <= 1e-14) continue;  // absent branch
        total_weight += w;
        const Ket unit = branch * cx{1.0 / branch.norm(), 0.0};
        LhvModel::HiddenState hs;
        hs.weight = w;
        for (int a = 0; a < spec.dim_a(); ++a) {
            std::vector<double> row;
            for (int A = 0; A < 2; ++A) {
                const CMatrix p = kron(back_projector(spec, a, A).matrix(),
                                       CMatrix::identity(spec.dim_B()));
                row.push_back(std::clamp(expectation(unit, p).real(), 0.0, 1.0));
            }
            const double s = row[0] + row[1];
            row[0] /= s;
            row[1] /= s;
            hs.a_response.push_back(std::move(row));
        }
        for (int b = 0; b < spec.dim_b(); ++b) {
            std::vector<double> row;
            for (int B = 0; B < 2; ++B) {
                const CMatrix q = kron(CMatrix::identity(spec.dim_A()),
                                       back_projector_b(spec, b, B).matrix());
                row.push_back(std::clamp(expectation(unit, q).real(), 0.0, 1.0));
            }
            const double s = row[0] + row[1];
            row[0] /= s;
            row[1] /= s;
            hs.b_response.push_back(std::move(row));
        }
        model.lambdas.push_back(std::move(hs));
    }
    for (auto& hs : model.lambdas) hs.weight /= total_weight;
    double check = 0;
    for (const auto& hs : model.lambdas) check += hs.weight;
    model.lambdas.back().weight += 1.0 - check;
    model.validate();
    return model;
}

}  // namespace qhist

#endif
