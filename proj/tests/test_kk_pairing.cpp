#include "fixtures.hpp"

#include "kflow/corner_index.hpp"
#include "kflow/errors.hpp"
#include "kflow/kk_pairing.hpp"
#include "kflow/models.hpp"
#include "kflow/proj_calc.hpp"
#include "kflow/spectral_triple.hpp"

#include <doctest.h>

using namespace kflow;
using oracle::diag;

namespace {

Mat phases(const Mat& basis, const std::vector<double>& angles) {
    Eigen::VectorXcd d(static_cast<Eigen::Index>(angles.size()));
    for (std::size_t i = 0; i < angles.size(); ++i) d(static_cast<Eigen::Index>(i)) = std::exp(cplx(0, angles[i]));
    return basis * d.asDiagonal() * basis.adjoint();
}

// Pairing data with a commuting (p, u) pair on a non-ideal block and
// arbitrary data on an ideal block.
PairingData mixed_data(std::mt19937_64& rng, double noise) {
    const VnAlgebra alg({{4, 1.0, false}, {5, 1.0, true}});
    std::uniform_real_distribution<double> ang(0.1, 6.0);
    const Mat v = oracle::unitary(4, rng);
    const Mat p0 = v * diag({1, 1, 0, 0}) * v.adjoint();
    const Mat u0 = phases(v, {ang(rng), ang(rng), ang(rng), ang(rng)});
    const Mat k = noise * oracle::hermitian(5, rng);
    const auto p = make_operator({p0, Mat(oracle::projection(5, 2, rng) + k)});
    const auto u = make_operator({u0, oracle::unitary(5, rng)});
    return make_pairing_data(alg, p, u);
}

}  // namespace

TEST_SUITE("kk_pairing") {

TEST_CASE("unitary_log") {
    const VnAlgebra alg({{1, 1.0, true}});
    CHECK(oracle::opnorm(unitary_log(BlockOperator::identity(alg))) == 0.0);
    CHECK(unitary_log(make_operator({diag({-1})})).block(0)(0, 0).real() == doctest::Approx(0.5));
    Mat i(1, 1);
    i(0, 0) = cplx(0, 1);
    CHECK(unitary_log(make_operator({i})).block(0)(0, 0).real() == doctest::Approx(0.25));
    CHECK_THROWS_AS(unitary_log(make_operator({diag({2})})), PreconditionError);
}

TEST_CASE("unitary_log inverts exp on random unitaries") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = make_operator({oracle::unitary(6, rng), oracle::unitary(3, rng)});
        const auto q = unitary_log(u);
        CHECK(q.is_selfadjoint());
        CHECK(oracle::opnorm(q) <= 1.0);
        CHECK(oracle::opnorm(unitary_exp(q) - u) <= 1e-10);
    }
}

TEST_CASE("sin and cos of q") {
    std::mt19937_64 rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        const auto q = unitary_log(make_operator({oracle::unitary(7, rng)}));
        const auto s = q.apply([](double x) { return std::sin(M_PI * x); });
        const auto c = q.apply([](double x) { return std::cos(M_PI * x); });
        Eigen::SelfAdjointEigenSolver<Mat> es(s.block(0));
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        CHECK(oracle::norm(s.block(0) * s.block(0) + c.block(0) * c.block(0) - Mat::Identity(7, 7)) <= 1e-12);
    }
}

TEST_CASE("cos identity modulo the ideal") {
    std::mt19937_64 rng(63);
    const VnAlgebra alg({{3, 1.0, false}, {3, 1.0, true}});
    const auto q = make_operator({oracle::projection(3, 1, rng), oracle::projection(3, 2, rng)});
    CHECK(cos_identity_check(q, alg) <= 1e-12);
    const auto noisy = q + make_operator({Mat::Zero(3, 3), Mat(0.1 * fixtures::unit_hermitian(3, rng))});
    CHECK(cos_identity_check(noisy, alg) <= 1e-12);

    // Residual against the size of π(q² - q).
    for (double delta : {1e-6, 1e-4}) {
        const auto off = q + make_operator({Mat(delta * fixtures::unit_hermitian(3, rng)), Mat::Zero(3, 3)});
        const double defect = quotient_norm(off * off - off, alg);
        if (defect > Tolerances{}.gap) {
            CHECK_THROWS_AS(cos_identity_check(off, alg), PreconditionError);
        }
        Tolerances loose;
        loose.gap = 1e-3;
        CHECK(cos_identity_check(off, alg, loose) <= 10 * delta);
    }
}

TEST_CASE("intermediate operator") {
    std::mt19937_64 rng(64);
    const VnAlgebra alg({{3, 1.0, false}, {2, 1.0, true}});
    const auto p = make_operator({diag({1, 0, 0}), diag({0, 1})});
    const auto one = BlockOperator::identity(alg);

    const auto trivial = make_pairing_data(alg, p, one);
    const auto w = intermediate_operator(trivial);
    CHECK(oracle::opnorm(w.w - cplx(0, -1) * one) <= 1e-14);
    CHECK(pairing_via_boundary(trivial).is_zero());

    // p = 1: W = -i cos(πq) + sin(πq) = -i exp(iπq), an honest unitary.
    const auto u = make_operator({oracle::unitary(3, rng), oracle::unitary(2, rng)});
    const auto full = make_pairing_data(alg, one, u);
    const auto wf = intermediate_operator(full);
    CHECK(wf.w.is_unitary());
    CHECK(pairing_via_boundary(full).is_zero());
}

TEST_CASE("pairing data validation") {
    std::mt19937_64 rng(65);
    const VnAlgebra alg({{3, 1.0, false}});
    const auto p = make_operator({diag({1, 0, 0})});
    CHECK_THROWS_AS(make_pairing_data(alg, p, make_operator({oracle::unitary(3, rng)})), PreconditionError);
    CHECK_THROWS_AS(make_pairing_data(alg, make_operator({diag({0.5, 0, 0})}), BlockOperator::identity(alg)),
                    PreconditionError);
}

TEST_CASE("commuting data has zero pairing") {
    const VnAlgebra alg({{3, 1.0, true}});
    Mat u = Mat::Zero(3, 3);
    u(0, 0) = cplx(0, 1), u(1, 1) = -1, u(2, 2) = 1;
    const auto data = make_pairing_data(alg, make_operator({diag({1, 1, 0})}), make_operator({u}));
    CHECK(pairing_via_boundary(data).is_zero());
}

TEST_CASE("mixed data: residuals and stability") {
    std::mt19937_64 rng(66);
    for (int trial = 0; trial < 10; ++trial) {
        const auto data = mixed_data(rng, 0.05);
        const auto rep = pairing_report(data);
        CHECK(rep.snapped);
        CHECK(rep.w_residual <= 1e-7);
        CHECK(rep.commutator <= 1e-8);
        CHECK(rep.value == rep.via_intermediate);
        // Compact perturbation of p leaves the class alone.
        const auto k = make_operator({Mat::Zero(4, 4), Mat(0.02 * fixtures::unit_hermitian(5, rng))});
        const auto moved = make_pairing_data(data.alg, data.p + k, data.u);
        CHECK(pairing_via_boundary(moved) == rep.value);
    }
}

TEST_CASE("any norm-one lift gives the same boundary") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 10; ++trial) {
        const auto data = mixed_data(rng, 0.0);
        const auto one = BlockOperator::identity(data.alg);
        const auto lift = data.p * data.u * data.p + one - data.p;
        Mat c = oracle::gaussian(5, 5, rng);
        c /= oracle::norm(c);
        const BlockOperator y({lift.block(0), c});
        CHECK(oracle::opnorm(y) <= 1.0 + 1e-12);
        CHECK(boundary_map(y, data.alg) == boundary_map(lift, data.alg));
    }
}

TEST_CASE("conjugation psi") {
    std::mt19937_64 rng(68);
    const VnAlgebra alg({{3, 1.0, true}});
    const auto v = make_operator({oracle::unitary(3, rng)});
    const auto psi = BlockMap::conjugation(v);
    const auto a = make_operator({oracle::gaussian(3, 3, rng)});
    CHECK(verify_multiplicative(psi, {a, a.adjoint()}, alg) <= 1e-10);
    const BlockMap bad{"scale", [](const BlockOperator& x) { return 2.0 * x; }};
    CHECK_THROWS_AS(verify_multiplicative(bad, {a}, alg), PreconditionError);
    CHECK_THROWS_AS(BlockMap::conjugation(2.0 * v), PreconditionError);
}

TEST_CASE("pairing agrees with sf on the Dirac family") {
    for (int k = -2; k <= 2; ++k) {
        const auto model = models::dirac_circle(6, k);
        const auto& t = model.triple;
        const auto data = make_pairing_data(t.algebra(), t.positive_projection(), model.u);
        CHECK(pairing_via_boundary(data) == sf_unitary(t, model.u));
    }
}

}
