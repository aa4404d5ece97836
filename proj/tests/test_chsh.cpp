#include <doctest.h>

#include "qhist/chsh.hpp"
#include "qhist/quantum.hpp"

using namespace qhist;

namespace {

LhvModel deterministic_model(double a_value, double b_value) {
    // one hidden state, responses concentrated on a fixed outcome
    LhvModel m;
    m.a_settings = {"a", "a'"};
    m.b_settings = {"b", "b'"};
    m.a_outcomes = {-1, 1};
    m.b_outcomes = {-1, 1};
    LhvModel::HiddenState l;
    l.weight = 1.0;
    const std::vector<double> a_row = a_value > 0 ? std::vector<double>{0, 1}
                                                  : std::vector<double>{1, 0};
    const std::vector<double> b_row = b_value > 0 ? std::vector<double>{0, 1}
                                                  : std::vector<double>{1, 0};
    l.a_response = {a_row, a_row};
    l.b_response = {b_row, b_row};
    m.lambdas = {l};
    m.validate();
    return m;
}

}  // namespace

TEST_SUITE("chsh") {

TEST_CASE("deterministic response models") {
    const auto anti = deterministic_model(+1, -1);
    CHECK(lhv_correlation(anti, "a", "b") == doctest::Approx(-1).epsilon(1e-15));

    const auto aligned = deterministic_model(+1, +1);
    CHECK(lhv_chsh(aligned, "a", "a'", "b", "b'") == doctest::Approx(2).epsilon(1e-15));
}

TEST_CASE("uniform responses wash out every correlation") {
    LhvModel m;
    m.a_settings = {"a", "a'"};
    m.b_settings = {"b", "b'"};
    m.a_outcomes = {-1, 1};
    m.b_outcomes = {-1, 1};
    LhvModel::HiddenState l;
    l.weight = 1.0;
    l.a_response = {{0.5, 0.5}, {0.5, 0.5}};
    l.b_response = {{0.25, 0.75}, {0.9, 0.1}};
    m.lambdas = {l};
    m.validate();
    CHECK(lhv_correlation(m, "a", "b") == doctest::Approx(0).epsilon(1e-15));
    CHECK(lhv_chsh(m, "a", "a'", "b", "b'") == doctest::Approx(0).epsilon(1e-15));
    CHECK_THROWS_AS(lhv_correlation(m, "zzz", "b"), std::invalid_argument);
}

TEST_CASE("seeded model matches exhaustive enumeration over outcome triples") {
    Rng rng(31);
    const auto m = random_lhv_model(rng, 8);
    for (const auto& a : m.a_settings)
        for (const auto& b : m.b_settings) {
            // oracle: brute-force sum over (λ, A, B)
            double oracle = 0;
            const int ia = m.a_index(a), ib = m.b_index(b);
            for (const auto& l : m.lambdas)
                for (size_t oa = 0; oa < m.a_outcomes.size(); ++oa)
                    for (size_t ob = 0; ob < m.b_outcomes.size(); ++ob)
                        oracle += l.weight * m.a_outcomes[oa] * m.b_outcomes[ob] *
                                  l.a_response[static_cast<size_t>(ia)][oa] *
                                  l.b_response[static_cast<size_t>(ib)][ob];
            CHECK(lhv_correlation(m, a, b) == doctest::Approx(oracle).epsilon(1e-12));
        }
}

TEST_CASE("classical bound holds across a seeded sweep") {
    Rng rng(32);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto m = random_lhv_model(rng, 1 + (k % 8), k % 3 == 0);
        worst = std::max(worst, std::abs(lhv_chsh(m, "a", "a'", "b", "b'")));
    }
    CHECK(worst <= 2.0 + 1e-12);
}

TEST_CASE("model validation rejects broken tables") {
    LhvModel m;
    m.a_settings = {"a", "a'"};
    m.b_settings = {"b", "b'"};
    m.a_outcomes = {-1, 1};
    m.b_outcomes = {-1, 1};
    LhvModel::HiddenState l;
    l.weight = 0.7;  // weights will not sum to 1
    l.a_response = {{0.5, 0.5}, {0.5, 0.5}};
    l.b_response = {{0.5, 0.5}, {0.5, 0.5}};
    m.lambdas = {l};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.lambdas[0].weight = 1.0;
    m.lambdas[0].a_response[0] = {0.9, 0.2};  // row sums to 1.1
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("quantum correlations on the singlet") {
    const Ket psi = singlet();
    const ChshSetting zz{{pauli_z(), pauli_x()}, {pauli_z(), pauli_x()}};
    // oracle: four-term Born expansion
    auto born_corr = [&](const CMatrix& a_op, const CMatrix& b_op) {
        const auto sa = sign_operator(a_op), sb = sign_operator(b_op);
        double c = 0;
        for (int A : {0, 1})
            for (int B : {0, 1}) {
                const Projector& p = A == 0 ? sa.p_plus : sa.p_minus;
                const Projector& q = B == 0 ? sb.p_plus : sb.p_minus;
                c += (A == 0 ? 1 : -1) * (B == 0 ? 1 : -1) *
                     born_probability(psi, Projector::from_matrix(kron(p.matrix(), q.matrix())));
            }
        return c;
    };
    CHECK(quantum_correlation(psi, zz, 0, 0) == doctest::Approx(-1).epsilon(1e-12));
    CHECK(quantum_correlation(psi, zz, 0, 0) ==
          doctest::Approx(born_corr(pauli_z(), pauli_z())).epsilon(1e-12));
    CHECK(quantum_correlation(psi, zz, 0, 1) == doctest::Approx(0).epsilon(1e-12));
    CHECK(quantum_correlation(psi, zz, 0, 1) ==
          doctest::Approx(born_corr(pauli_z(), pauli_x())).epsilon(1e-12));

    const Ket product = kron(Ket::basis(2, 0), Ket::basis(2, 0));
    CHECK(quantum_correlation(product, zz, 0, 0) == doctest::Approx(+1).epsilon(1e-12));
}

TEST_CASE("singlet correlation equals minus the axis dot product") {
    const Ket psi = singlet();
    Rng rng(33);
    for (int k = 0; k < 10; ++k) {
        const double ta = rng.uniform(0, 3.141592653589793);
        const double pa = rng.uniform(0, 2 * 3.141592653589793);
        const double tb = rng.uniform(0, 3.141592653589793);
        const double pb = rng.uniform(0, 2 * 3.141592653589793);
        auto axis_op = [](double t, double p) {
            return pauli_z() * cx{std::cos(t), 0} +
                   pauli_x() * cx{std::sin(t) * std::cos(p), 0} +
                   pauli_y() * cx{std::sin(t) * std::sin(p), 0};
        };
        const ChshSetting setting{{axis_op(ta, pa), axis_op(ta, pa)},
                                  {axis_op(tb, pb), axis_op(tb, pb)}};
        const double dot =
            std::cos(ta) * std::cos(tb) + std::sin(ta) * std::sin(tb) * std::cos(pa - pb);
        CHECK(quantum_correlation(psi, setting, 0, 0) == doctest::Approx(-dot).epsilon(1e-10));
    }
}

TEST_CASE("operator spectrum with equal commuting settings stays classical") {
    const ChshSetting same{{pauli_z(), pauli_z()}, {pauli_z(), pauli_z()}};
    const auto s = chsh_operator_spectrum(same);
    // W collapses to 2 Aa⊗Bb
    CHECK(s.min_eig >= -2.0 - 1e-12);
    CHECK(s.max_eig <= 2.0 + 1e-12);
}

TEST_CASE("noncommuting settings reach the quantum extremes") {
    const ChshSetting zx{{pauli_z(), pauli_x()}, {pauli_z(), pauli_x()}};
    const auto s = chsh_operator_spectrum(zx);
    const double r8 = 2.0 * std::sqrt(2.0);

    // oracle: W² = 4I + [Aa,Aa']⊗[Bb',Bb] pins the squared spectrum to {8,8,0,0},
    // and tr W = 0 forces the extremes to ±2√2 with a two-dimensional kernel
    const CMatrix w2 = CMatrix::identity(4) * cx{4.0, 0} +
                       kron(pauli_z() * pauli_x() - pauli_x() * pauli_z(),
                            pauli_x() * pauli_z() - pauli_z() * pauli_x());
    CHECK((s.w_hat * s.w_hat - w2).max_abs() < 1e-12);
    CHECK(s.min_eig == doctest::Approx(-r8).epsilon(1e-10));
    CHECK(s.max_eig == doctest::Approx(+r8).epsilon(1e-10));
}

TEST_CASE("commuting pairs on both sides keep the spectrum within the classical range") {
    Rng rng(34);
    for (int k = 0; k < 20; ++k) {
        const CMatrix ua = random_unitary(rng, 3), ub = random_unitary(rng, 2);
        auto pair_in = [&](const CMatrix& u, int dim) {
            std::vector<double> d1, d2;
            for (int i = 0; i < dim; ++i) {
                d1.push_back(rng.uniform(-1, 1));
                d2.push_back(rng.uniform(-1, 1));
            }
            return std::array<CMatrix, 2>{u * CMatrix::diagonal(d1) * u.adjoint(),
                                          u * CMatrix::diagonal(d2) * u.adjoint()};
        };
        const ChshSetting setting{pair_in(ua, 3), pair_in(ub, 2)};
        // commutation within each side, by construction
        CHECK(commutator_norm(setting.a_ops[0], setting.a_ops[1]) < 1e-12);
        CHECK(commutator_norm(setting.b_ops[0], setting.b_ops[1]) < 1e-12);
        const auto s = chsh_operator_spectrum(setting);
        CHECK(s.min_eig >= -2.0 - 1e-9);
        CHECK(s.max_eig <= 2.0 + 1e-9);
    }
}

TEST_CASE("setting validation rejects spectra outside the unit range") {
    const ChshSetting bad{{pauli_z() * cx{2.0, 0}, pauli_x()}, {pauli_z(), pauli_x()}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    const ChshSetting fine{{pauli_z(), pauli_x()}, {pauli_z(), pauli_x()}};
    CHECK_THROWS_AS(quantum_correlation(singlet(), fine, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(quantum_correlation(Ket::basis(8, 0), fine, 0, 0), std::invalid_argument);
}

TEST_CASE("normalized spin commutator scaling across dims") {
    for (int dim : {2, 3, 5, 9, 17, 41}) {
        const auto s = spin_operators(dim);
        const cx inv_j{1.0 / s.j, 0};
        const double ratio = commutator_norm(s.jx * inv_j, s.jy * inv_j) * s.j /
                             spectral_norm(s.jz * inv_j);
        CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
    }
}

}  // TEST_SUITE
