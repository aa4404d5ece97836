#ifndef QHIST_EIG_HPP
#define QHIST_EIG_HPP

#include <algorithm>
#include <numeric>

#include "qhist/cmatrix.hpp"

namespace qhist {

struct HermitianEig {
    std::vector<double> eigenvalues;  // ascending
    CMatrix eigenvectors;             // orthonormal columns, same order
};

// Cyclic Jacobi for complex Hermitian matrices. Each rotation annihilates one
// off-diagonal pair; sweeps repeat until the off-diagonal mass is at roundoff.
// Backward stable: every update is a unitary similarity transform.
inline HermitianEig eig_hermitian(const CMatrix& m) {
    const double scale = 1.0 + m.frobenius_norm();
    if (!m.square() || m.hermiticity_error() > 1e-10 * scale)
        throw std::invalid_argument("eig_hermitian: input is not Hermitian");

    const int n = m.rows();
    CMatrix a = m;
    CMatrix v = CMatrix::identity(n);

    auto offdiag_norm = [&]() {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return std::sqrt(2.0 * s);
    };

    const double stop = 1e-15 * scale;
    for (int sweep = 0; sweep < 64 && offdiag_norm() > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cx apq = a(p, q);
                const double r = std::abs(apq);
                if (r <= 1e-18 * scale) continue;

                // Unitary 2x2 rotation G = [[c, -s e^{iθ}], [s e^{-iθ}, c]]
                // with θ = arg(a_pq) and tan(2t) = 2r / (a_pp - a_qq)
                // zeroes the (p,q) entry of G† A G.
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double t = 0.5 * std::atan2(2.0 * r, app - aqq);
                const double c = std::cos(t), s = std::sin(t);
                const cx phase = apq / r;  // e^{iθ}
                const cx gpq = -s * phase;
                const cx gqp = s * std::conj(phase);

                // Columns p,q of A and V: X <- X G
                for (int i = 0; i < n; ++i) {
                    const cx aip = a(i, p), aiq = a(i, q);
                    a(i, p) = aip * c + aiq * gqp;
                    a(i, q) = aip * gpq + aiq * c;
                    const cx vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip * c + viq * gqp;
                    v(i, q) = vip * gpq + viq * c;
                }
                // Rows p,q of A: A <- G† A
                for (int j = 0; j < n; ++j) {
                    const cx apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj + std::conj(gqp) * aqj;
                    a(q, j) = std::conj(gpq) * apj + c * aqj;
                }
                a(p, q) = 0;
                a(q, p) = 0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

    HermitianEig out;
    out.eigenvalues.resize(static_cast<size_t>(n));
    out.eigenvectors = CMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[static_cast<size_t>(k)] = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]).real();
        for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[static_cast<size_t>(k)]);
    }
    return out;
}

inline Ket eigenvector_column(const HermitianEig& e, int k) {
    Ket v(e.eigenvectors.rows());
    for (int i = 0; i < e.eigenvectors.rows(); ++i) v[i] = e.eigenvectors(i, k);
    return v;
}

// Largest singular value, via the top eigenvalue of M†M.
inline double spectral_norm(const CMatrix& m) {
    const CMatrix mm = m.adjoint() * m;
    if (mm.frobenius_norm() < 1e-300) return 0.0;
    const auto e = eig_hermitian(mm);
    return std::sqrt(std::max(0.0, e.eigenvalues.back()));
}

// ‖AB − BA‖ in the spectral norm.
inline double commutator_norm(const CMatrix& a, const CMatrix& b) {
    if (!a.square() || !b.square() || a.rows() != b.rows())
        throw std::invalid_argument("commutator_norm: operands must be square with equal dims");
    return spectral_norm(a * b - b * a);
}

}  // namespace qhist

#endif
