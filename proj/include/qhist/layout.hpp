#ifndef QHIST_LAYOUT_HPP
#define QHIST_LAYOUT_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qhist/cmatrix.hpp"

namespace qhist {

// Dense-feasibility cap on the total dimension of a tensor-product space.
inline constexpr int kMaxTotalDim = 4096;

struct LayoutError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Ordered list of labeled tensor factors. The leftmost factor is the
// slowest-varying index of the flattened space.
class SpaceLayout {
public:
    SpaceLayout() = default;

    explicit SpaceLayout(std::vector<std::pair<std::string, int>> factors)
        : factors_(std::move(factors)) {
        if (factors_.empty()) throw LayoutError("SpaceLayout: no factors");
        long total = 1;
        for (size_t i = 0; i < factors_.size(); ++i) {
            const auto& [label, dim] = factors_[i];
            if (dim < 1) throw LayoutError("SpaceLayout: factor '" + label + "' has dim < 1");
            for (size_t j = i + 1; j < factors_.size(); ++j)
                if (factors_[j].first == label)
                    throw LayoutError("SpaceLayout: duplicate label '" + label + "'");
            total *= dim;
            if (total > kMaxTotalDim)
                throw LayoutError("SpaceLayout: total dimension exceeds cap of " +
                                  std::to_string(kMaxTotalDim));
        }
        total_ = static_cast<int>(total);
    }

    int factor_count() const { return static_cast<int>(factors_.size()); }
    int total_dim() const { return total_; }
    const std::string& label(int k) const { return factors_[static_cast<size_t>(k)].first; }
    int dim(int k) const { return factors_[static_cast<size_t>(k)].second; }

    int index_of(const std::string& label) const {
        for (size_t k = 0; k < factors_.size(); ++k)
            if (factors_[k].first == label) return static_cast<int>(k);
        throw LayoutError("SpaceLayout: unknown factor label '" + label + "'");
    }

    int dim_of(const std::string& label) const { return dim(index_of(label)); }

    bool has_label(const std::string& label) const {
        for (const auto& [l, d] : factors_) {
            (void)d;
            if (l == label) return true;
        }
        return false;
    }

    std::vector<int> unflatten(int flat) const {
        std::vector<int> digits(factors_.size());
        for (int k = factor_count() - 1; k >= 0; --k) {
            digits[static_cast<size_t>(k)] = flat % dim(k);
            flat /= dim(k);
        }
        return digits;
    }

    int flatten(std::span<const int> digits) const {
        int flat = 0;
        for (int k = 0; k < factor_count(); ++k) flat = flat * dim(k) + digits[static_cast<size_t>(k)];
        return flat;
    }

private:
    std::vector<std::pair<std::string, int>> factors_;
    int total_ = 0;
};

// Kronecker product, left factor slowest.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const long r = static_cast<long>(a.rows()) * b.rows();
    const long c = static_cast<long>(a.cols()) * b.cols();
    if (r > kMaxTotalDim || c > kMaxTotalDim)
        throw LayoutError("kron: result dimension exceeds cap of " + std::to_string(kMaxTotalDim));
    CMatrix m(static_cast<int>(r), static_cast<int>(c));
    for (int i1 = 0; i1 < a.rows(); ++i1)
        for (int j1 = 0; j1 < a.cols(); ++j1) {
            const cx av = a(i1, j1);
            if (av == cx{}) continue;
            for (int i2 = 0; i2 < b.rows(); ++i2)
                for (int j2 = 0; j2 < b.cols(); ++j2)
                    m(i1 * b.rows() + i2, j1 * b.cols() + j2) = av * b(i2, j2);
        }
    return m;
}

inline Ket kron(const Ket& a, const Ket& b) {
    const long d = static_cast<long>(a.dim()) * b.dim();
    if (d > kMaxTotalDim)
        throw LayoutError("kron: result dimension exceeds cap of " + std::to_string(kMaxTotalDim));
    Ket k(static_cast<int>(d));
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < b.dim(); ++j) k[i * b.dim() + j] = a[i] * b[j];
    return k;
}

// Trace out every factor not in `keep`; the result acts on the kept factors
// in layout order. Keeping nothing yields the 1x1 matrix [trace].
inline CMatrix partial_trace(const CMatrix& m, const SpaceLayout& layout,
                             const std::vector<std::string>& keep) {
    if (!m.square() || m.rows() != layout.total_dim())
        throw LayoutError("partial_trace: operator does not match layout dimension");
    std::vector<bool> kept(static_cast<size_t>(layout.factor_count()), false);
    for (const auto& label : keep) kept[static_cast<size_t>(layout.index_of(label))] = true;

    int keep_dim = 1, env_dim = 1;
    for (int k = 0; k < layout.factor_count(); ++k)
        (kept[static_cast<size_t>(k)] ? keep_dim : env_dim) *= layout.dim(k);

    // Map (kept multi-index, env multi-index) -> flat index of the full space.
    const int total = layout.total_dim();
    std::vector<int> kept_of(static_cast<size_t>(total)), env_of(static_cast<size_t>(total));
    for (int flat = 0; flat < total; ++flat) {
        const auto digits = layout.unflatten(flat);
        int kf = 0, ef = 0;
        for (int k = 0; k < layout.factor_count(); ++k) {
            if (kept[static_cast<size_t>(k)])
                kf = kf * layout.dim(k) + digits[static_cast<size_t>(k)];
            else
                ef = ef * layout.dim(k) + digits[static_cast<size_t>(k)];
        }
        kept_of[static_cast<size_t>(flat)] = kf;
        env_of[static_cast<size_t>(flat)] = ef;
    }
    std::vector<int> flat_of(static_cast<size_t>(keep_dim) * env_dim);
    for (int flat = 0; flat < total; ++flat)
        flat_of[static_cast<size_t>(kept_of[static_cast<size_t>(flat)]) * env_dim +
                env_of[static_cast<size_t>(flat)]] = flat;

    CMatrix out(keep_dim, keep_dim);
    for (int k1 = 0; k1 < keep_dim; ++k1)
        for (int k2 = 0; k2 < keep_dim; ++k2) {
            cx s = 0;
            for (int e = 0; e < env_dim; ++e)
                s += m(flat_of[static_cast<size_t>(k1) * env_dim + e],
                       flat_of[static_cast<size_t>(k2) * env_dim + e]);
            out(k1, k2) = s;
        }
    return out;
}

// Embed an operator acting on a subset of factors (listed in layout order)
// into the full space, with identity on the remaining factors.
inline CMatrix embed(const CMatrix& op, const SpaceLayout& layout,
                     const std::vector<std::string>& acts_on) {
    if (acts_on.empty()) throw LayoutError("embed: empty factor list");
    std::vector<int> targets;
    targets.reserve(acts_on.size());
    for (const auto& label : acts_on) targets.push_back(layout.index_of(label));
    for (size_t i = 1; i < targets.size(); ++i)
        if (targets[i] <= targets[i - 1])
            throw LayoutError("embed: factors must be listed in layout order");

    int op_dim = 1;
    for (int t : targets) op_dim *= layout.dim(t);
    if (!op.square() || op.rows() != op_dim)
        throw LayoutError("embed: operator dimension does not match listed factors");

    std::vector<bool> is_target(static_cast<size_t>(layout.factor_count()), false);
    for (int t : targets) is_target[static_cast<size_t>(t)] = true;

    const int total = layout.total_dim();
    std::vector<int> tgt_of(static_cast<size_t>(total)), env_of(static_cast<size_t>(total));
    for (int flat = 0; flat < total; ++flat) {
        const auto digits = layout.unflatten(flat);
        int tf = 0, ef = 0;
        for (int k = 0; k < layout.factor_count(); ++k) {
            if (is_target[static_cast<size_t>(k)])
                tf = tf * layout.dim(k) + digits[static_cast<size_t>(k)];
            else
                ef = ef * layout.dim(k) + digits[static_cast<size_t>(k)];
        }
        tgt_of[static_cast<size_t>(flat)] = tf;
        env_of[static_cast<size_t>(flat)] = ef;
    }

    CMatrix out(total, total);
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j)
            if (env_of[static_cast<size_t>(i)] == env_of[static_cast<size_t>(j)])
                out(i, j) = op(tgt_of[static_cast<size_t>(i)], tgt_of[static_cast<size_t>(j)]);
    return out;
}

// Apply ⟨bra| to one factor of |state⟩, returning a ket on the remaining
// factors (in layout order). Not normalized.
inline Ket partial_inner(const Ket& bra, const Ket& state, const SpaceLayout& layout,
                         const std::string& factor) {
    if (state.dim() != layout.total_dim())
        throw LayoutError("partial_inner: state does not match layout");
    const int t = layout.index_of(factor);
    if (bra.dim() != layout.dim(t))
        throw LayoutError("partial_inner: bra does not match factor dimension");

    int rest_dim = layout.total_dim() / layout.dim(t);
    Ket out(rest_dim);
    for (int flat = 0; flat < layout.total_dim(); ++flat) {
        const auto digits = layout.unflatten(flat);
        int rf = 0;
        for (int k = 0; k < layout.factor_count(); ++k)
            if (k != t) rf = rf * layout.dim(k) + digits[static_cast<size_t>(k)];
        out[rf] += std::conj(bra[digits[static_cast<size_t>(t)]]) * state[flat];
    }
    return out;
}

}  // namespace qhist

#endif
