#include "kflow/kk_pairing.hpp"

#include "kflow/corner_index.hpp"
#include "kflow/errors.hpp"
#include "kflow/proj_calc.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kflow {

namespace {

constexpr double kLogTolerance = 1e-10;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

BlockMap BlockMap::identity() {
    return {"identity", [](const BlockOperator& x) { return x; }};
}

BlockMap BlockMap::conjugation(BlockOperator v) {
    if (!v.is_unitary()) throw PreconditionError("conjugation map: V is not unitary");
    return {"conjugation", [v = std::move(v)](const BlockOperator& x) { return v * x * v.adjoint(); }};
}

double verify_multiplicative(const BlockMap& psi, const std::vector<BlockOperator>& generators,
                             const VnAlgebra& alg, double tol) {
    const BlockOperator one = BlockOperator::identity(alg);
    double worst = (psi(one) - one).norm();
    for (const auto& a : generators) {
        for (const auto& b : generators) worst = std::max(worst, (psi(a * b) - psi(a) * psi(b)).norm());
        worst = std::max(worst, (psi(a.adjoint()) - psi(a).adjoint()).norm());
    }
    if (worst > tol) {
        std::ostringstream os;
        os << "psi is not a unital *-homomorphism on the generators (defect " << worst << ")";
        throw PreconditionError(os.str());
    }
    return worst;
}

BlockOperator unitary_exp(const BlockOperator& q) {
    std::vector<Mat> bs;
    bs.reserve(q.size());
    for (const auto& m : q.blocks())
        bs.push_back(la::apply_complex(m, [](double x) { return std::exp(cplx(0.0, kTwoPi * x)); }));
    return BlockOperator(std::move(bs));
}

BlockOperator unitary_log(const BlockOperator& u, const Tolerances& tol) {
    Tolerances strict = tol;
    strict.proj_rel = kLogTolerance / 2.0;
    if (!u.is_unitary(strict)) throw PreconditionError("unitary_log: operator is not unitary");
    std::vector<Mat> bs;
    bs.reserve(u.size());
    for (const auto& m : u.blocks()) {
        // A normal matrix has a diagonal Schur form with unitary Z.
        Eigen::ComplexSchur<Mat> schur(m);
        const Mat& z = schur.matrixU();
        const Mat& t = schur.matrixT();
        Vec q(m.rows());
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
            double a = std::arg(t(k, k)) / kTwoPi;  // (-1/2, 1/2]
            if (a < 0.0) a += 1.0;
            // Branch cut at eigenvalue 1: arguments just below 2π wrap to 0.
            if (a > 1.0 - 1e-12 || a >= 1.0) a = 0.0;
            q(k) = a;
        }
        Mat qm = z * q.cast<cplx>().asDiagonal() * z.adjoint();
        bs.push_back(0.5 * (qm + qm.adjoint()));
    }
    BlockOperator out(std::move(bs));
    const double err = (unitary_exp(out) - u).norm();
    if (err > kLogTolerance) {
        std::ostringstream os;
        os << "unitary_log: reconstruction error " << err << " (operator is not normal?)";
        throw NumericalError(os.str());
    }
    return out;
}

double cos_identity_check(const BlockOperator& q, const VnAlgebra& alg, const Tolerances& tol) {
    q.check_conforms(alg);
    if (!q.is_selfadjoint(tol)) throw PreconditionError("cos_identity_check: q is not selfadjoint");
    const double defect = quotient_norm(q * q - q, alg);
    if (defect > tol.gap) {
        std::ostringstream os;
        os << "cos_identity_check: pi(q^2 - q) has norm " << defect;
        throw PreconditionError(os.str());
    }
    const BlockOperator one = BlockOperator::identity(alg);
    const BlockOperator c = q.apply([](double x) { return std::cos(std::numbers::pi * x); });
    return quotient_norm(c + 2.0 * q - one, alg);
}

PairingData make_pairing_data(VnAlgebra alg, BlockOperator p, BlockOperator u, BlockMap psi, const Tolerances& tol) {
    p.check_conforms(alg);
    u.check_conforms(alg);
    if (!p.is_selfadjoint(tol)) throw PreconditionError("pairing: p is not selfadjoint");
    const double pdef = quotient_norm(p * p - p, alg);
    if (pdef > tol.gap) {
        std::ostringstream os;
        os << "pairing: p is not a projection modulo J (defect " << pdef << ")";
        throw PreconditionError(os.str());
    }
    const BlockOperator pu = psi(u);
    const double comm = quotient_norm(p * pu - pu * p, alg);
    if (comm > tol.gap) {
        std::ostringstream os;
        os << "pairing: [p, psi(u)] is not in J (quotient norm " << comm << ")";
        throw PreconditionError(os.str());
    }
    BlockOperator q = unitary_log(u, tol);
    return {std::move(alg), std::move(psi), std::move(p), std::move(u), std::move(q)};
}

IntermediateOperator intermediate_operator(const PairingData& data, const Tolerances& tol) {
    const auto& alg = data.alg;
    const BlockOperator one = BlockOperator::identity(alg);
    const BlockOperator c = data.q.apply([](double x) { return std::cos(std::numbers::pi * x); });
    const BlockOperator s = data.q.apply([](double x) { return std::sin(std::numbers::pi * x); });
    IntermediateOperator out;
    out.w = cplx(0.0, -1.0) * data.psi(c) + data.psi(s) * (2.0 * data.p - one);
    const BlockOperator wa = out.w.adjoint();
    out.residual_left = quotient_norm(wa * out.w - one, alg);
    out.residual_right = quotient_norm(out.w * wa - one, alg);
    if (out.residual_left > 10.0 * tol.gap || out.residual_right > 10.0 * tol.gap) {
        std::ostringstream os;
        os << "pairing data error: pi(W) is not unitary (residuals " << out.residual_left << ", "
           << out.residual_right << ")";
        throw PreconditionError(os.str());
    }
    return out;
}

PairingReport pairing_report(const PairingData& data, const Tolerances& tol) {
    const auto& alg = data.alg;
    const BlockOperator one = BlockOperator::identity(alg);
    Tolerances relaxed = tol;
    relaxed.gap = 10.0 * tol.gap;

    PairingReport rep;
    BlockOperator p = data.p;
    if (!p.is_projection(tol)) {
        p = nearest_projection(p, tol);
        rep.snapped = true;
    }
    const BlockOperator pu = data.psi(data.u);
    rep.commutator = quotient_norm(p * pu - pu * p, alg);
    rep.value = boundary_map(p * pu * p + one - p, alg, relaxed);

    const auto w = intermediate_operator(data, tol);
    rep.w_residual = std::max(w.residual_left, w.residual_right);
    rep.via_intermediate = boundary_map(w.w, alg, relaxed);

    if (quotient_norm(data.q * data.q - data.q, alg) <= tol.gap) rep.cos_residual = cos_identity_check(data.q, alg, tol);
    else rep.cos_residual = std::numeric_limits<double>::quiet_NaN();

    if (!(rep.value == rep.via_intermediate))
        throw ConsistencyError("pairing: boundary of p psi(u) p + 1 - p differs from boundary of W "
                               "(is [p, psi(u)] in J?)");
    return rep;
}

K0Class pairing_via_boundary(const PairingData& data, const Tolerances& tol) { return pairing_report(data, tol).value; }

}  // namespace kflow
