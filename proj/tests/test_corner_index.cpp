#include "oracles.hpp"

#include "kflow/corner_index.hpp"
#include "kflow/errors.hpp"
#include "kflow/models.hpp"
#include "kflow/proj_calc.hpp"

#include <doctest.h>

using namespace kflow;
using oracle::diag;

namespace {

// Corner index on one block by rank-nullity: dim ker(qSp|p) - dim coker(qSp|p→q).
long corner_index_oracle(const Mat& s, const Mat& p, const Mat& q) {
    const long r = oracle::rank(q * s * p);
    return (oracle::rank(p) - r) - (oracle::rank(q) - r);
}

}  // namespace

TEST_SUITE("corner_index") {

TEST_CASE("Fredholm detection") {
    const VnAlgebra alg({{2, 1.0, false}});
    const auto one = BlockOperator::identity(alg);
    CHECK(is_corner_fredholm(one, one, one, alg).fredholm);

    const VnAlgebra ideal({{3, 1.0, true}});
    const auto p = make_operator({diag({1, 1, 0})});
    const auto s = make_operator({diag({0, 5, 0})});
    CHECK(is_corner_fredholm(s, p, p, ideal).fredholm);

    const auto half = make_operator({diag({1, 0})});
    const auto rep = is_corner_fredholm(BlockOperator::zero(alg), half, half, alg);
    CHECK_FALSE(rep.fredholm);
    CHECK(rep.failing_block == 0);

    CHECK_THROWS_AS(is_corner_fredholm(one, half, half, alg), PreconditionError);
}

TEST_CASE("gap report is the smallest corner singular value") {
    const VnAlgebra alg({{3, 1.0, false}, {2, 1.0, true}});
    const auto s = make_operator({diag({0.3, 2.0, 0.0}), diag({0, 0})});
    const auto p = make_operator({diag({1, 1, 0}), diag({1, 1})});
    const auto rep = is_corner_fredholm(s, p, p, alg);
    CHECK(rep.fredholm);
    CHECK(rep.min_gap == doctest::Approx(0.3));
}

TEST_CASE("corner_index examples") {
    std::mt19937_64 rng(31);
    const VnAlgebra alg({{3, 1.0, false}});
    const auto one = BlockOperator::identity(alg);
    CHECK(corner_index(make_operator({oracle::unitary(3, rng)}), one, one, alg).size() == 0);

    const VnAlgebra two({{2, 1.0, true}});
    const auto one2 = BlockOperator::identity(two);
    CHECK(corner_index(make_operator({diag({1, 0})}), one2, one2, two) == K0Class({0}));

    const int m = 5;
    Mat shift = Mat::Zero(m, m);
    for (int j = 0; j + 1 < m; ++j) shift(j + 1, j) = 1.0;
    const VnAlgebra sh({{m, 1.0, true}});
    const auto ones = BlockOperator::identity(sh);
    CHECK(oracle::kernel_dim(shift) == 1);
    CHECK(oracle::kernel_dim(shift.adjoint()) == 1);
    CHECK(corner_index(make_operator({shift}), ones, ones, sh) == K0Class({0}));

    // Between projections of different rank the index is the rank difference.
    const auto p = make_operator({diag({1, 1, 1, 0, 0})});
    const auto q = make_operator({diag({1, 1, 0, 0, 0})});
    CHECK(corner_index(q * make_operator({shift}) * p, p, q, sh) == K0Class({1}));
}

TEST_CASE("corner_index rejects non-Fredholm input") {
    const VnAlgebra alg({{2, 1.0, false}});
    const auto half = make_operator({diag({1, 0})});
    CHECK_THROWS_AS(corner_index(BlockOperator::zero(alg), half, half, alg), PreconditionError);
}

TEST_CASE("boundary_map") {
    std::mt19937_64 rng(32);
    const VnAlgebra alg({{3, 1.0, true}, {2, 1.0, false}});
    CHECK(boundary_map(make_operator({oracle::unitary(3, rng), oracle::unitary(2, rng)}), alg).is_zero());

    const VnAlgebra two({{2, 1.0, true}});
    CHECK(boundary_map(make_operator({diag({0, 1})}), two) == K0Class({0}));

    const VnAlgebra mixed({{2, 1.0, false}});
    CHECK_THROWS_AS(boundary_map(make_operator({diag({0, 1})}), mixed), PreconditionError);
}

TEST_CASE("compressed winding symbol at m = 2") {
    // N(pup + 1 - p) and N(pu*p + 1 - p) by brute force on the 5-dim window.
    const auto model = models::dirac_circle(2, 1);
    const auto& t = model.triple;
    const Mat p = t.positive_projection().block(0);
    CHECK(p.isApprox(diag({0, 0, 1, 1, 1})));
    const Mat u = model.u.block(0);
    const Mat id = Mat::Identity(5, 5);
    const Mat s = p * u * p + id - p;
    CHECK(oracle::kernel_dim(s) == 1);
    CHECK(oracle::kernel_dim(s.adjoint()) == 1);
    const Mat k = oracle::kernel_basis(s);
    const Mat c = oracle::kernel_basis(s.adjoint());
    // Kernel sits on the wrap edge j = m, cokernel on j = 0.
    CHECK(std::abs(k(4, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(c(2, 0)) == doctest::Approx(1.0));
    CHECK(boundary_map(make_operator({s}), t.algebra()) == K0Class({0}));
}

TEST_CASE("homotopy invariance along Fredholm paths") {
    std::mt19937_64 rng(33);
    const VnAlgebra alg({{4, 1.0, false}, {5, 1.0, true}});
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = make_operator({oracle::projection(4, 2, rng), oracle::projection(5, 3, rng)});
        const auto q = make_operator({oracle::projection(4, 2, rng), oracle::projection(5, 1 + trial % 3, rng)});
        const auto s0 = q * make_operator({oracle::gaussian(4, 4, rng), oracle::gaussian(5, 5, rng)}) * p;
        const auto k = q * make_operator({oracle::gaussian(4, 4, rng), oracle::gaussian(5, 5, rng)}) * p;
        const auto base = is_corner_fredholm(s0, p, q, alg);
        if (!base.fredholm) continue;
        const double step = 0.5 * base.min_gap / std::max(1e-12, oracle::opnorm(k));
        const auto idx0 = corner_index(s0, p, q, alg);
        for (int j = 1; j <= 8; ++j) {
            const auto sj = s0 + (step * j / 8.0) * k;
            CHECK(corner_index(sj, p, q, alg) == idx0);
        }
        CHECK(idx0[0] == corner_index_oracle(s0.block(1), p.block(1), q.block(1)));
    }
}

TEST_CASE("index is additive under composition") {
    std::mt19937_64 rng(34);
    const VnAlgebra alg({{3, 1.0, false}, {4, 1.0, true}, {3, 2.0, true}});
    for (int trial = 0; trial < 25; ++trial) {
        auto proj = [&](int r1, int r2) {
            return make_operator({oracle::projection(3, 2, rng), oracle::projection(4, r1, rng),
                                  oracle::projection(3, r2, rng)});
        };
        const auto p = proj(trial % 5, trial % 4);
        const auto q = proj((trial + 1) % 5, (trial + 2) % 4);
        const auto r = proj((trial + 3) % 5, (trial + 1) % 4);
        const auto s = q * make_operator({oracle::gaussian(3, 3, rng), oracle::gaussian(4, 4, rng), oracle::gaussian(3, 3, rng)}) * p;
        const auto t = r * make_operator({oracle::gaussian(3, 3, rng), oracle::gaussian(4, 4, rng), oracle::gaussian(3, 3, rng)}) * q;
        const auto lhs = corner_index(t * s, p, r, alg);
        CHECK(lhs == corner_index(t, q, r, alg) + corner_index(s, p, q, alg));
        CHECK(lhs[0] == corner_index_oracle((t * s).block(1), p.block(1), r.block(1)));
        CHECK(lhs[1] == corner_index_oracle((t * s).block(2), p.block(2), r.block(2)));
    }
}

TEST_CASE("index of the polar phase") {
    std::mt19937_64 rng(35);
    const VnAlgebra alg({{3, 1.0, false}, {5, 1.0, true}});
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = make_operator({oracle::projection(3, 2, rng), oracle::projection(5, 3, rng)});
        const auto q = make_operator({oracle::projection(3, 2, rng), oracle::projection(5, 2, rng)});
        const auto s = q * make_operator({oracle::gaussian(3, 3, rng), oracle::gaussian(5, 5, rng)}) * p;
        CHECK(corner_index(s, p, q, alg) == corner_index(polar_phase(s), p, q, alg));
    }
}

TEST_CASE("qp is Fredholm when the quotient images are close") {
    std::mt19937_64 rng(36);
    const VnAlgebra alg({{4, 1.0, false}, {4, 1.0, true}});
    for (int trial = 0; trial < 20; ++trial) {
        const Mat p0 = oracle::projection(4, 2, rng);
        Eigen::SelfAdjointEigenSolver<Mat> es(oracle::hermitian(4, rng));
        const Eigen::VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0, 0.15)).array().exp();
        const Mat w = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        const Mat q0 = w * p0 * w.adjoint();
        if (oracle::norm(p0 - q0) >= 1.0) continue;
        const auto p = make_operator({p0, oracle::projection(4, 1, rng)});
        const auto q = make_operator({q0, oracle::projection(4, 3, rng)});
        CHECK(is_corner_fredholm(q * p, p, q, alg).fredholm);
        // With full-norm closeness the index of pq vanishes.
        const auto pf = make_operator({p0, p0});
        const auto qf = make_operator({q0, q0});
        CHECK(corner_index(pf * qf, qf, pf, alg).is_zero());
    }
}

}
