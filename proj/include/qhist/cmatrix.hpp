#ifndef QHIST_CMATRIX_HPP
#define QHIST_CMATRIX_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhist {

using cx = std::complex<double>;

inline bool is_finite(cx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Dense complex matrix, row-major. The universal carrier for operators,
// projectors, unitaries and density matrices in this library.
class CMatrix {
public:
    CMatrix() = default;

    CMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("CMatrix: dimensions must be positive");
    }

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static CMatrix diagonal(const std::vector<double>& d) {
        CMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    // Row-by-row construction; validates finiteness.
    static CMatrix from_rows(std::initializer_list<std::initializer_list<cx>> rows) {
        const int r = static_cast<int>(rows.size());
        const int c = static_cast<int>(rows.begin()->size());
        CMatrix m(r, c);
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c)
                throw std::invalid_argument("CMatrix::from_rows: ragged rows");
            int j = 0;
            for (cx v : row) {
                if (!is_finite(v)) throw std::invalid_argument("CMatrix::from_rows: non-finite entry");
                m(i, j++) = v;
            }
            ++i;
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cx& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    cx operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<cx>& data() const { return data_; }

    CMatrix operator+(const CMatrix& o) const {
        check_same_shape(o, "+");
        CMatrix r = *this;
        for (size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
        return r;
    }

    CMatrix operator-(const CMatrix& o) const {
        check_same_shape(o, "-");
        CMatrix r = *this;
        for (size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
        return r;
    }

    CMatrix operator*(cx s) const {
        CMatrix r = *this;
        for (auto& v : r.data_) v *= s;
        return r;
    }

    friend CMatrix operator*(cx s, const CMatrix& m) { return m * s; }

    CMatrix operator*(const CMatrix& o) const {
        if (cols_ != o.rows_)
            throw std::invalid_argument("CMatrix: dimension mismatch in product (" +
                                        shape_str() + " * " + o.shape_str() + ")");
        CMatrix r(rows_, o.cols_);
        // i-k-j loop order keeps the inner accesses contiguous
        for (int i = 0; i < rows_; ++i) {
            const cx* arow = &data_[static_cast<size_t>(i) * cols_];
            cx* rrow = &r.data_[static_cast<size_t>(i) * o.cols_];
            for (int k = 0; k < cols_; ++k) {
                const cx a = arow[k];
                if (a == cx{}) continue;
                const cx* brow = &o.data_[static_cast<size_t>(k) * o.cols_];
                for (int j = 0; j < o.cols_; ++j) rrow[j] += a * brow[j];
            }
        }
        return r;
    }

    CMatrix adjoint() const {
        CMatrix r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    cx trace() const {
        if (!square()) throw std::invalid_argument("CMatrix::trace: matrix not square");
        cx t = 0;
        for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](cx v) { return is_finite(v); });
    }

    double hermiticity_error() const {
        if (!square()) return std::numeric_limits<double>::infinity();
        double s = 0;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) s += std::norm((*this)(i, j) - std::conj((*this)(j, i)));
        return std::sqrt(s);
    }

    bool is_hermitian(double tol = 1e-10) const {
        return square() && hermiticity_error() <= tol * (1.0 + frobenius_norm());
    }

    // ‖U†U − I‖_F ≤ tol
    bool is_unitary(double tol = 1e-10) const {
        if (!square()) return false;
        return (adjoint() * (*this) - identity(rows_)).frobenius_norm() <= tol * rows_;
    }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    void check_same_shape(const CMatrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string("CMatrix: shape mismatch in ") + op +
                                        " (" + shape_str() + " vs " + o.shape_str() + ")");
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<cx> data_;
};

// Complex state vector. Physical inputs are expected to be normalized;
// intermediate branch states may carry any norm.
class Ket {
public:
    Ket() = default;

    explicit Ket(int dim) : amp_(static_cast<size_t>(dim)) {
        if (dim < 1) throw std::invalid_argument("Ket: dimension must be positive");
    }

    explicit Ket(std::vector<cx> amplitudes) : amp_(std::move(amplitudes)) {
        if (amp_.empty()) throw std::invalid_argument("Ket: empty amplitude list");
        for (cx v : amp_)
            if (!is_finite(v)) throw std::invalid_argument("Ket: non-finite amplitude");
    }

    static Ket basis(int dim, int index) {
        if (index < 0 || index >= dim) throw std::invalid_argument("Ket::basis: index out of range");
        Ket k(dim);
        k[index] = 1.0;
        return k;
    }

    int dim() const { return static_cast<int>(amp_.size()); }

    cx& operator[](int i) { return amp_[static_cast<size_t>(i)]; }
    cx operator[](int i) const { return amp_[static_cast<size_t>(i)]; }

    double norm() const {
        double s = 0;
        for (cx v : amp_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_normalized(double tol = 1e-10) const { return std::abs(norm() - 1.0) <= tol; }

    Ket normalized() const {
        const double n = norm();
        if (n < 1e-300) throw std::domain_error("Ket::normalized: zero vector");
        Ket r = *this;
        for (auto& v : r.amp_) v /= n;
        return r;
    }

    // ⟨this|other⟩
    cx inner(const Ket& other) const {
        if (dim() != other.dim()) throw std::invalid_argument("Ket::inner: dimension mismatch");
        cx s = 0;
        for (int i = 0; i < dim(); ++i) s += std::conj(amp_[i]) * other.amp_[i];
        return s;
    }

    Ket operator+(const Ket& o) const {
        if (dim() != o.dim()) throw std::invalid_argument("Ket: dimension mismatch in +");
        Ket r = *this;
        for (int i = 0; i < dim(); ++i) r.amp_[i] += o.amp_[i];
        return r;
    }

    Ket operator-(const Ket& o) const {
        if (dim() != o.dim()) throw std::invalid_argument("Ket: dimension mismatch in -");
        Ket r = *this;
        for (int i = 0; i < dim(); ++i) r.amp_[i] -= o.amp_[i];
        return r;
    }

    Ket operator*(cx s) const {
        Ket r = *this;
        for (auto& v : r.amp_) v *= s;
        return r;
    }

    friend Ket operator*(cx s, const Ket& k) { return k * s; }

private:
    std::vector<cx> amp_;
};

inline Ket apply(const CMatrix& m, const Ket& v) {
    if (m.cols() != v.dim())
        throw std::invalid_argument("apply: operator/state dimension mismatch");
    Ket r(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        cx s = 0;
        for (int j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

// |u⟩⟨v|
inline CMatrix outer(const Ket& u, const Ket& v) {
    CMatrix m(u.dim(), v.dim());
    for (int i = 0; i < u.dim(); ++i)
        for (int j = 0; j < v.dim(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
}

// ⟨state|M|state⟩
inline cx expectation(const Ket& state, const CMatrix& m) {
    return state.inner(apply(m, state));
}

}  // namespace qhist

#endif
