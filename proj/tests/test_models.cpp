#include "oracles.hpp"

#include "kflow/errors.hpp"
#include "kflow/models.hpp"
#include "kflow/spec_flow.hpp"
#include "kflow/spectral_triple.hpp"

#include <doctest.h>

#include <map>

using namespace kflow;
using oracle::diag;

namespace {

const VnAlgebra& unit_block(int n) {
    static std::map<int, VnAlgebra> cache;
    return cache.try_emplace(n, VnAlgebra({{n, 1.0, true}})).first->second;
}

// Interior readout by hand: kernel vectors of pup + 1 - p and pu*p + 1 - p
// whose mass lies in |j| < m - |k|.
long windowed_oracle(int m, int k) {
    const int n = 2 * m + 1;
    Mat p = Mat::Zero(n, n), u = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (i - m >= 0) p(i, i) = 1.0;
        u(((i + k) % n + n) % n, i) = 1.0;
    }
    const Mat id = Mat::Identity(n, n);
    auto interior = [&](const Mat& basis) {
        double w = 0.0;
        for (Eigen::Index c = 0; c < basis.cols(); ++c)
            for (int i = 0; i < n; ++i)
                if (std::abs(i - m) < m - std::abs(k)) w += std::norm(basis(i, c));
        return std::lround(w);
    };
    return interior(oracle::kernel_basis(p * u * p + id - p)) -
           interior(oracle::kernel_basis(p * u.adjoint() * p + id - p));
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("dirac_circle") {
    CHECK_THROWS_AS(models::dirac_circle(1, 0), PreconditionError);
    CHECK_THROWS_AS(models::dirac_circle(3, 3), PreconditionError);
    const auto zero = models::dirac_circle(4, 0);
    CHECK(oracle::opnorm(zero.u - BlockOperator::identity(zero.triple.algebra())) == 0.0);
    CHECK(sf_unitary(zero.triple, zero.u).is_zero());

    const auto m2 = models::dirac_circle(2, 1);
    CHECK(m2.triple.dirac().block(0).isApprox(diag({-2, -1, 0, 1, 2})));
    CHECK(m2.u.block(0)(3, 2) == cplx(1.0, 0.0));  // e_0 -> e_1
    CHECK(m2.u.block(0)(0, 4) == cplx(1.0, 0.0));  // wrap: e_2 -> e_{-2}
    CHECK(m2.triple.generators().size() == 3);
}

TEST_CASE("Toeplitz kernels at the anchor") {
    const auto tk = models::toeplitz_kernels(2, 1);
    CHECK(tk.kernel == 1);
    CHECK(tk.cokernel == 1);
    CHECK(tk.interior_kernel == 0);
    CHECK(tk.interior_cokernel == 1);
    CHECK(tk.windowed_index() == -1);
    CHECK(tk.windowed_index() == windowed_oracle(2, 1));
    // The K0 class itself sees both edges and vanishes.
    const auto model = models::dirac_circle(2, 1);
    CHECK(sf_unitary(model.triple, model.u) == K0Class({0}));
}

TEST_CASE("windowed readout is linear in the winding") {
    for (int m : {8, 16}) {
        for (int k = -3; k <= 3; ++k) {
            const auto tk = models::toeplitz_kernels(m, k);
            CHECK(tk.windowed_index() == windowed_oracle(m, k));
            CHECK(tk.windowed_index() == -k);
            CHECK(tk.kernel == tk.cokernel);
        }
    }
}

TEST_CASE("calibration of the crossing sign") {
    const auto path = OperatorPath::linear(make_operator({diag({1, -1})}), make_operator({diag({1, 1})}));
    const long oracle_count = models::crossing_oracle(path, 1000);
    CHECK(oracle_count == models::kUpwardCrossingSign);
    CHECK(numeric_spectral_flow(path, unit_block(2)) == static_cast<double>(oracle_count));
    CHECK(models::crossing_oracle(path.reversed(), 1000) == -oracle_count);

    const auto half = OperatorPath::linear(make_operator({diag({1, -0.5})}), make_operator({diag({1, 0.5})}));
    CHECK(models::crossing_oracle(half, 2000) == numeric_spectral_flow(half, unit_block(2)));
}

TEST_CASE("crossing oracle edge cases") {
    const auto flat = OperatorPath::constant(make_operator({diag({1, -2})}));
    CHECK(models::crossing_oracle(flat, 1000) == 0);
    CHECK_THROWS_AS(models::crossing_oracle(flat, 10), PreconditionError);
    const auto to_zero = OperatorPath::linear(make_operator({diag({1, -1})}), make_operator({diag({1, 0})}));
    CHECK_THROWS_AS(models::crossing_oracle(to_zero, 1000), PreconditionError);
}

TEST_CASE("random crossing paths") {
    CHECK_THROWS_AS(models::random_crossing_path(2, {1, -1}, 1), PreconditionError);
    CHECK_THROWS_AS(models::random_crossing_path(3, {2}, 1), PreconditionError);

    const auto a = models::random_crossing_path(4, {1, 1, -1}, 7);
    const auto b = models::random_crossing_path(4, {1, 1, -1}, 7);
    CHECK(oracle::opnorm(a.at(0.37) - b.at(0.37)) == 0.0);

    CHECK(numeric_spectral_flow(models::random_crossing_path(3, {}, 2), unit_block(3)) == 0.0);

    const auto one_up = models::random_crossing_path(2, {1}, 3);
    CHECK(spectral_flow(one_up, unit_block(2)) == K0Class({models::kUpwardCrossingSign}));

    const long net = models::crossing_oracle(a, 2000);
    CHECK(net == models::kUpwardCrossingSign * (1 + 1 - 1));
    CHECK(numeric_spectral_flow(a, unit_block(4)) == static_cast<double>(net));
    CHECK(models::crossing_oracle(a.reversed(), 2000) == -net);
}

TEST_CASE("weighted models") {
    CHECK_THROWS_AS(models::weighted_model({2}, {1.0, 2.0}, {true}), ModelError);
    CHECK_THROWS_AS(models::weighted_model({2}, {-1.0}, {true}), ModelError);
    const auto path = OperatorPath::linear(make_operator({diag({1, -1})}), make_operator({diag({1, 1})}));
    CHECK(numeric_spectral_flow(path, models::weighted_model({2}, {0.5}, {true})) == -0.5);

    // Two blocks with independent crossings: τ* sums per block.
    const auto p1 = models::random_crossing_path(3, {1, 1}, 11);
    const auto p2 = models::random_crossing_path(2, {-1}, 12);
    const auto both = OperatorPath::sampled(
        [&](double t) { return BlockOperator({p1.at(t).block(0), p2.at(t).block(0)}); }, 256);
    const auto alg = models::weighted_model({3, 2}, {1.0, 1.0 / 3.0}, {true, true});
    const auto counts = models::crossing_oracle_blocks(both, 2000);
    CHECK(counts == std::vector<long>{-2, 1});
    CHECK(numeric_spectral_flow(both, alg) == doctest::Approx(-2.0 + 1.0 / 3.0).epsilon(1e-15));
}

}
