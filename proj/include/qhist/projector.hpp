#ifndef QHIST_PROJECTOR_HPP
#define QHIST_PROJECTOR_HPP

#include <cmath>
#include <string>
#include <vector>

#include "qhist/cmatrix.hpp"

namespace qhist {

// Hermitian idempotent representing a quantum property (a closed subspace).
class Projector {
public:
    static Projector from_matrix(const CMatrix& m, double tol = 1e-10) {
        if (!m.square()) throw std::invalid_argument("Projector: matrix not square");
        if (!m.all_finite()) throw std::invalid_argument("Projector: non-finite entries");
        const double scale = 1.0 + m.frobenius_norm();
        if (m.hermiticity_error() > tol * scale)
            throw std::invalid_argument("Projector: not Hermitian");
        if ((m * m - m).frobenius_norm() > tol * scale)
            throw std::invalid_argument("Projector: not idempotent");
        const double tr = m.trace().real();
        const int rank = static_cast<int>(std::lround(tr));
        if (std::abs(tr - rank) > 1e-8)
            throw std::invalid_argument("Projector: trace is not a near-integer rank");
        return Projector(m, rank);
    }

    // Rank-1 projector |v⟩⟨v| from a normalized ket.
    static Projector onto(const Ket& v) {
        if (!v.is_normalized(1e-10))
            throw std::invalid_argument("Projector::onto: ket must be normalized");
        return Projector(outer(v, v), 1);
    }

    static Projector zero(int dim) { return Projector(CMatrix(dim, dim), 0); }
    static Projector full(int dim) { return Projector(CMatrix::identity(dim), dim); }

    const CMatrix& matrix() const { return matrix_; }
    int rank() const { return rank_; }
    int dim() const { return matrix_.rows(); }

    Projector complement() const {
        return Projector(CMatrix::identity(dim()) - matrix_, dim() - rank_);
    }

    bool commutes_with(const Projector& other, double tol = 1e-10) const {
        return (matrix_ * other.matrix_ - other.matrix_ * matrix_).frobenius_norm() <= tol;
    }

private:
    Projector(CMatrix m, int rank) : matrix_(std::move(m)), rank_(rank) {}

    CMatrix matrix_;
    int rank_ = 0;
};

// Mutually orthogonal projectors summing to the identity: a quantum sample
// space. Construction validates both conditions.
class DecompositionOfIdentity {
public:
    static DecompositionOfIdentity from_projectors(std::vector<Projector> members,
                                                   double tol = 1e-10) {
        if (members.empty())
            throw std::invalid_argument("DecompositionOfIdentity: no members");
        const int d = members.front().dim();
        CMatrix sum(d, d);
        for (const auto& p : members) {
            if (p.dim() != d)
                throw std::invalid_argument("DecompositionOfIdentity: mixed dimensions");
            sum = sum + p.matrix();
        }
        if ((sum - CMatrix::identity(d)).frobenius_norm() > tol * d)
            throw std::invalid_argument("DecompositionOfIdentity: members do not sum to identity");
        for (size_t i = 0; i < members.size(); ++i)
            for (size_t j = i + 1; j < members.size(); ++j)
                if ((members[i].matrix() * members[j].matrix()).frobenius_norm() > tol)
                    throw std::invalid_argument(
                        "DecompositionOfIdentity: members " + std::to_string(i) + " and " +
                        std::to_string(j) + " are not orthogonal");
        return DecompositionOfIdentity(std::move(members));
    }

    // Rank-1 decomposition from the orthonormal columns of a unitary.
    static DecompositionOfIdentity from_basis(const CMatrix& columns, double tol = 1e-10) {
        if (!columns.square())
            throw std::invalid_argument("DecompositionOfIdentity: basis matrix not square");
        std::vector<Projector> members;
        members.reserve(static_cast<size_t>(columns.cols()));
        for (int k = 0; k < columns.cols(); ++k) {
            Ket v(columns.rows());
            for (int i = 0; i < columns.rows(); ++i) v[i] = columns(i, k);
            members.push_back(Projector::onto(v.normalized()));
        }
        return from_projectors(std::move(members), tol);
    }

    size_t size() const { return members_.size(); }
    int dim() const { return members_.front().dim(); }
    const Projector& operator[](size_t i) const { return members_[i]; }
    const std::vector<Projector>& members() const { return members_; }

private:
    explicit DecompositionOfIdentity(std::vector<Projector> members)
        : members_(std::move(members)) {}

    std::vector<Projector> members_;
};

}  // namespace qhist

#endif
