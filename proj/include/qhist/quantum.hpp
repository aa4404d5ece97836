#ifndef QHIST_QUANTUM_HPP
#define QHIST_QUANTUM_HPP

#include <functional>

#include "qhist/eig.hpp"
#include "qhist/layout.hpp"
#include "qhist/projector.hpp"

namespace qhist {

// ── Spin operators ───────────────────────────────────────────────────────────

struct SpinOperators {
    CMatrix jx, jy, jz;
    double j;  // total angular momentum quantum number, (dim-1)/2
};

// Ladder-operator construction on the basis |m⟩, m = J, J-1, ..., -J
// (index 0 carries m = J). Satisfies [Jx, Jy] = i Jz exactly up to roundoff.
inline SpinOperators spin_operators(int dim) {
    if (dim < 2) throw std::invalid_argument("spin_operators: dim must be >= 2");
    const double j = 0.5 * (dim - 1);
    CMatrix jz(dim, dim), jplus(dim, dim);
    for (int k = 0; k < dim; ++k) jz(k, k) = j - k;
    // J+ |m⟩ = sqrt(j(j+1) - m(m+1)) |m+1⟩; |m+1⟩ sits one index above.
    for (int k = 1; k < dim; ++k) {
        const double m = j - k;
        jplus(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const CMatrix jminus = jplus.adjoint();
    SpinOperators ops{
        (jplus + jminus) * cx{0.5, 0.0},
        (jplus - jminus) * cx{0.0, -0.5},
        jz,
        j,
    };
    return ops;
}

inline CMatrix pauli_x() { return CMatrix::from_rows({{0, 1}, {1, 0}}); }
inline CMatrix pauli_y() { return CMatrix::from_rows({{0, cx{0, -1}}, {cx{0, 1}, 0}}); }
inline CMatrix pauli_z() { return CMatrix::from_rows({{1, 0}, {0, -1}}); }
inline CMatrix hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    return CMatrix::from_rows({{s, s}, {s, -s}});
}

// ── Sign operator ────────────────────────────────────────────────────────────

struct SignOperator {
    CMatrix a_hat;      // P_plus - P_minus; spectrum within {-1, 0, +1}
    Projector p_plus;   // strictly positive eigenvalue subspace
    Projector p_minus;  // strictly negative eigenvalue subspace
    Projector p_zero;   // kernel (present for integer spin)
};

// Spectral split of a Hermitian observable into sign subspaces. Eigenvalues
// with |λ| <= threshold count as zero.
inline SignOperator sign_operator(const CMatrix& j_component, double threshold = 1e-10) {
    const auto e = eig_hermitian(j_component);
    const int n = j_component.rows();
    CMatrix plus(n, n), minus(n, n), zero(n, n);
    for (int k = 0; k < n; ++k) {
        const Ket v = eigenvector_column(e, k);
        const CMatrix vp = outer(v, v);
        if (e.eigenvalues[static_cast<size_t>(k)] > threshold)
            plus = plus + vp;
        else if (e.eigenvalues[static_cast<size_t>(k)] < -threshold)
            minus = minus + vp;
        else
            zero = zero + vp;
    }
    return SignOperator{
        plus - minus,
        Projector::from_matrix(plus),
        Projector::from_matrix(minus),
        Projector::from_matrix(zero),
    };
}

// ── Born rule and conditioning ───────────────────────────────────────────────

inline double born_probability(const Ket& state, const Projector& p) {
    if (state.dim() != p.dim())
        throw std::invalid_argument("born_probability: state/projector dimension mismatch");
    if (!state.is_normalized(1e-10))
        throw std::invalid_argument("born_probability: state is not normalized");
    const cx val = expectation(state, p.matrix());
    if (std::abs(val.imag()) > 1e-12)
        throw std::runtime_error("born_probability: expectation has a non-real part");
    return std::clamp(val.real(), 0.0, 1.0);
}

struct ConditionalState {
    double probability;
    CMatrix conditional_rho;  // on the remaining factors, unit trace
};

// Condition |state⟩ on a projective outcome of one factor: returns the
// outcome probability and the normalized reduced state of everything else.
inline ConditionalState condition_on_outcome(const Ket& state, const Projector& p_local,
                                             const SpaceLayout& layout,
                                             const std::string& conditioned_factor) {
    if (state.dim() != layout.total_dim())
        throw std::invalid_argument("condition_on_outcome: state does not match layout");
    if (p_local.dim() != layout.dim_of(conditioned_factor))
        throw std::invalid_argument("condition_on_outcome: projector does not match factor");
    if (!state.is_normalized(1e-10))
        throw std::invalid_argument("condition_on_outcome: state is not normalized");

    const CMatrix p_full = embed(p_local.matrix(), layout, {conditioned_factor});
    const Ket branch = apply(p_full, state);
    const double bn = branch.norm();
    const double prob = bn * bn;
    if (prob <= 1e-14)
        throw std::domain_error("condition_on_outcome: conditional state undefined "
                                "(outcome probability is zero)");

    std::vector<std::string> keep;
    for (int k = 0; k < layout.factor_count(); ++k)
        if (layout.label(k) != conditioned_factor) keep.push_back(layout.label(k));

    CMatrix rho = partial_trace(outer(branch, branch), layout, keep);
    rho = rho * cx{1.0 / rho.trace().real(), 0.0};
    return ConditionalState{prob, rho};
}

// ── Discretized line and interval projectors ─────────────────────────────────

struct GridLine {
    int n_points;
    double x_min, x_max;

    GridLine(int n, double lo, double hi) : n_points(n), x_min(lo), x_max(hi) {
        if (n < 2) throw std::invalid_argument("GridLine: need at least 2 points");
        if (!(lo < hi)) throw std::invalid_argument("GridLine: x_min must be < x_max");
    }

    double point(int i) const {
        return x_min + (x_max - x_min) * static_cast<double>(i) / (n_points - 1);
    }
};

// Diagonal projector keeping the grid points inside [x_lo, x_hi].
inline Projector interval_projector(const GridLine& grid, double x_lo, double x_hi) {
    if (x_lo > x_hi) throw std::invalid_argument("interval_projector: x_lo > x_hi");
    CMatrix m(grid.n_points, grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.point(i);
        if (x_lo <= x && x <= x_hi) m(i, i) = 1.0;
    }
    return Projector::from_matrix(m);
}

// Pointwise sampling of a wavefunction, normalized in the grid l2 sense.
inline Ket sampled_state(const GridLine& grid, const std::function<cx(double)>& psi) {
    Ket k(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) k[i] = psi(grid.point(i));
    return k.normalized();
}

// Tent pulse supported exactly on [x1, x2], peaked at the midpoint.
inline Ket triangle_pulse(const GridLine& grid, double x1, double x2) {
    const double mid = 0.5 * (x1 + x2), half = 0.5 * (x2 - x1);
    return sampled_state(grid, [&](double x) -> cx {
        if (x < x1 || x > x2) return 0.0;
        return 1.0 - std::abs(x - mid) / half;
    });
}

// Unitary mapping the eigenbasis of an observable to the standard basis,
// eigenvalues in descending order (basis index 0 carries the top eigenvalue).
// Measuring in the standard basis after it is equivalent to measuring the
// observable's own basis before it.
inline CMatrix measurement_unitary(const CMatrix& observable) {
    const auto e = eig_hermitian(observable);
    const int n = observable.rows();
    CMatrix u(n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) u(k, i) = std::conj(e.eigenvectors(i, n - 1 - k));
    return u;
}

// ── Common states ────────────────────────────────────────────────────────────

// Two-qubit singlet (|01⟩ - |10⟩)/√2: perfect anticorrelation along any axis.
inline Ket singlet() {
    Ket k(4);
    k[1] = 1.0 / std::sqrt(2.0);
    k[2] = -1.0 / std::sqrt(2.0);
    return k;
}

}  // namespace qhist

#endif
