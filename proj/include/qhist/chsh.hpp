#ifndef QHIST_CHSH_HPP
#define QHIST_CHSH_HPP

#include <array>
#include <string>
#include <vector>

#include "qhist/eig.hpp"
#include "qhist/layout.hpp"
#include "qhist/rng.hpp"

namespace qhist {

// ── Local-hidden-variable models ─────────────────────────────────────────────

// Stochastic response-table model: a hidden state λ carries a weight and, for
// each measurement setting, a probability row over the outcome values.
// Deterministic models are the special case of 0/1 rows.
struct LhvModel {
    std::vector<std::string> a_settings, b_settings;
    std::vector<double> a_outcomes, b_outcomes;  // e.g. {-1,+1} or {-1,0,+1}

    struct HiddenState {
        double weight = 0;
        // response[setting][outcome] = Pr(outcome | setting, λ)
        std::vector<std::vector<double>> a_response, b_response;
    };
    std::vector<HiddenState> lambdas;

    void validate() const {
        double total = 0;
        for (const auto& l : lambdas) {
            if (l.weight < 0) throw std::invalid_argument("LhvModel: negative weight");
            total += l.weight;
            check_rows(l.a_response, a_settings.size(), a_outcomes.size(), "a");
            check_rows(l.b_response, b_settings.size(), b_outcomes.size(), "b");
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("LhvModel: weights do not sum to 1");
    }

    int a_index(const std::string& label) const { return find(a_settings, label, "a"); }
    int b_index(const std::string& label) const { return find(b_settings, label, "b"); }

private:
    static void check_rows(const std::vector<std::vector<double>>& rows, size_t n_settings,
                           size_t n_outcomes, const char* side) {
        if (rows.size() != n_settings)
            throw std::invalid_argument(std::string("LhvModel: wrong ") + side + "-response count");
        for (const auto& row : rows) {
            if (row.size() != n_outcomes)
                throw std::invalid_argument(std::string("LhvModel: ragged ") + side + "-response row");
            double s = 0;
            for (double p : row) {
                if (p < -1e-15) throw std::invalid_argument("LhvModel: negative probability");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw std::invalid_argument("LhvModel: response row does not sum to 1");
        }
    }

    static int find(const std::vector<std::string>& labels, const std::string& label,
                    const char* side) {
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return static_cast<int>(i);
        throw std::invalid_argument(std::string("LhvModel: unknown ") + side + "-setting '" +
                                    label + "'");
    }
};

// Per-λ conditional mean of the outcome under one setting.
inline double lhv_mean(const std::vector<double>& outcomes, const std::vector<double>& row) {
    double m = 0;
    for (size_t i = 0; i < outcomes.size(); ++i) m += outcomes[i] * row[i];
    return m;
}

// C(a,b) = Σ_λ Pr(λ) A_a(λ) B_b(λ): the expectation of the outcome product
// under the factorized master distribution.
inline double lhv_correlation(const LhvModel& model, const std::string& a, const std::string& b) {
    const int ia = model.a_index(a), ib = model.b_index(b);
    double c = 0;
    for (const auto& l : model.lambdas)
        c += l.weight * lhv_mean(model.a_outcomes, l.a_response[static_cast<size_t>(ia)]) *
             lhv_mean(model.b_outcomes, l.b_response[static_cast<size_t>(ib)]);
    return c;
}

// C(a,b) + C(a,b') + C(a',b) - C(a',b'); bounded by 2 for responses in [-1,1].
inline double lhv_chsh(const LhvModel& model, const std::string& a, const std::string& ap,
                       const std::string& b, const std::string& bp) {
    return lhv_correlation(model, a, b) + lhv_correlation(model, a, bp) +
           lhv_correlation(model, ap, b) - lhv_correlation(model, ap, bp);
}

// Seeded random stochastic model for property sweeps.
inline LhvModel random_lhv_model(Rng& rng, int n_lambdas, bool with_zero_outcome = false) {
    LhvModel m;
    m.a_settings = {"a", "a'"};
    m.b_settings = {"b", "b'"};
    m.a_outcomes = with_zero_outcome ? std::vector<double>{-1, 0, 1} : std::vector<double>{-1, 1};
    m.b_outcomes = m.a_outcomes;

    auto random_row = [&](size_t n) {
        std::vector<double> row(n);
        double s = 0;
        for (auto& p : row) {
            p = rng.uniform() + 1e-9;
            s += p;
        }
        for (auto& p : row) p /= s;
        return row;
    };

    double total = 0;
    for (int k = 0; k < n_lambdas; ++k) {
        LhvModel::HiddenState l;
        l.weight = rng.uniform() + 1e-9;
        total += l.weight;
        for (size_t s = 0; s < 2; ++s) {
            l.a_response.push_back(random_row(m.a_outcomes.size()));
            l.b_response.push_back(random_row(m.b_outcomes.size()));
        }
        m.lambdas.push_back(std::move(l));
    }
    for (auto& l : m.lambdas) l.weight /= total;
    // renormalize exactly against accumulated roundoff
    double check = 0;
    for (const auto& l : m.lambdas) check += l.weight;
    m.lambdas.back().weight += 1.0 - check;
    m.validate();
    return m;
}

// ── Operator-valued settings ─────────────────────────────────────────────────

// Two observables per side, each with spectrum inside [-1, 1]; the quantum
// analog of the ±1-valued random variables above.
struct ChshSetting {
    std::array<CMatrix, 2> a_ops;  // for settings a, a'
    std::array<CMatrix, 2> b_ops;  // for settings b, b'

    void validate(double tol = 1e-10) const {
        for (const auto* side : {&a_ops, &b_ops})
            for (const auto& op : *side) {
                const auto e = eig_hermitian(op);  // throws if not Hermitian
                if (e.eigenvalues.front() < -1.0 - tol || e.eigenvalues.back() > 1.0 + tol)
                    throw std::invalid_argument("ChshSetting: spectrum outside [-1, 1]");
            }
        if (a_ops[0].rows() != a_ops[1].rows() || b_ops[0].rows() != b_ops[1].rows())
            throw std::invalid_argument("ChshSetting: mismatched dimensions within a side");
    }

    int dim_a() const { return a_ops[0].rows(); }
    int dim_b() const { return b_ops[0].rows(); }
};

// ⟨ψ| A_i ⊗ B_j |ψ⟩ for i, j in {0, 1} picking the unprimed/primed setting.
inline double quantum_correlation(const Ket& state, const ChshSetting& setting, int i, int j) {
    if (i < 0 || i > 1 || j < 0 || j > 1)
        throw std::invalid_argument("quantum_correlation: setting index must be 0 or 1");
    const CMatrix op = kron(setting.a_ops[static_cast<size_t>(i)], setting.b_ops[static_cast<size_t>(j)]);
    if (op.rows() != state.dim())
        throw std::invalid_argument("quantum_correlation: state/settings dimension mismatch");
    if (!state.is_normalized(1e-10))
        throw std::invalid_argument("quantum_correlation: state is not normalized");
    const cx val = expectation(state, op);
    if (std::abs(val.imag()) > 1e-12)
        throw std::runtime_error("quantum_correlation: expectation has a non-real part");
    return val.real();
}

struct ChshOperatorSpectrum {
    CMatrix w_hat;
    double min_eig = 0, max_eig = 0;
};

// Ŵ = Aa⊗Bb + Aa⊗Bb' + Aa'⊗Bb - Aa'⊗Bb'. With commuting pairs on each side
// its spectrum stays in [-2, 2]; noncommuting pairs can push it to ±2√2.
inline ChshOperatorSpectrum chsh_operator_spectrum(const ChshSetting& setting) {
    setting.validate();
    CMatrix w = kron(setting.a_ops[0], setting.b_ops[0]) + kron(setting.a_ops[0], setting.b_ops[1]) +
                kron(setting.a_ops[1], setting.b_ops[0]) - kron(setting.a_ops[1], setting.b_ops[1]);
    const auto e = eig_hermitian(w);
    return ChshOperatorSpectrum{std::move(w), e.eigenvalues.front(), e.eigenvalues.back()};
}

// Largest |CHSH combination| over the four placements of the minus sign
// (i.e. over setting relabelings). Used as a Bell certificate.
inline double max_chsh_combination(double c00, double c01, double c10, double c11) {
    const double w[4] = {
        c00 + c01 + c10 - c11,
        c00 + c01 - c10 + c11,
        c00 - c01 + c10 + c11,
        -c00 + c01 + c10 + c11,
    };
    double best = 0;
    for (double x : w) best = std::max(best, std::abs(x));
    return best;
}

}  // namespace qhist

#endif
