#include "kflow/corner_index.hpp"

#include "kflow/errors.hpp"
#include "kflow/proj_calc.hpp"

#include <limits>
#include <sstream>

namespace kflow {

FredholmReport is_corner_fredholm(const BlockOperator& s, const BlockOperator& p, const BlockOperator& q,
                                  const VnAlgebra& alg, const Tolerances& tol) {
    s.check_conforms(alg);
    p.check_conforms(alg);
    q.check_conforms(alg);
    if (!p.is_projection(tol) || !q.is_projection(tol))
        throw PreconditionError("is_corner_fredholm: p and q must be projections");
    const double eps = tol.proj_rel * (1.0 + s.norm());
    if ((s - q * s * p).norm() > eps) throw PreconditionError("is_corner_fredholm: S is not in qNp");

    FredholmReport rep;
    rep.fredholm = true;
    rep.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (alg[i].in_ideal) continue;
        const Mat pb = la::range_basis(p.block(i));
        const Mat qb = la::range_basis(q.block(i));
        if (pb.cols() != qb.cols()) {
            rep.fredholm = false;
            rep.min_gap = 0.0;
            if (rep.failing_block < 0) rep.failing_block = static_cast<long>(i);
            continue;
        }
        if (pb.cols() == 0) continue;
        const Mat corner = qb.adjoint() * s.block(i) * pb;
        const Vec sv = la::singular_values(corner);
        const double g = sv(sv.size() - 1);
        rep.min_gap = std::min(rep.min_gap, g);
        if (!(g > tol.gap)) {
            rep.fredholm = false;
            if (rep.failing_block < 0) rep.failing_block = static_cast<long>(i);
        }
    }
    return rep;
}

K0Class corner_index(const BlockOperator& s, const BlockOperator& p, const BlockOperator& q,
                     const VnAlgebra& alg, const Tolerances& tol) {
    const auto rep = is_corner_fredholm(s, p, q, alg, tol);
    if (!rep.fredholm) {
        std::ostringstream os;
        os << "corner_index: operator is not Fredholm (block " << rep.failing_block << ", gap " << rep.min_gap << ")";
        throw PreconditionError(os.str());
    }
    const BlockOperator ker = proj_intersection(null_projection(s, tol), p, tol);
    const BlockOperator coker = proj_intersection(null_projection(s.adjoint(), tol), q, tol);
    const double eps = tol.proj_rel * 2.0;
    if (!vanishes_off_ideal(ker, alg, eps) || !vanishes_off_ideal(coker, alg, eps))
        throw PreconditionError("class not in K0(J): kernel of a Fredholm corner escapes the ideal blocks");
    return k0_of_difference(ker, coker, alg, tol);
}

K0Class boundary_map(const BlockOperator& s, const VnAlgebra& alg, const Tolerances& tol) {
    s.check_conforms(alg);
    const BlockOperator one = BlockOperator::identity(alg);
    const BlockOperator sa = s.adjoint();
    const double r1 = quotient_norm(sa * s - one, alg);
    const double r2 = quotient_norm(s * sa - one, alg);
    if (r1 > tol.gap || r2 > tol.gap) {
        std::ostringstream os;
        os << "boundary_map: image in N/J is not unitary (residuals " << r1 << ", " << r2 << ")";
        throw PreconditionError(os.str());
    }
    const BlockOperator ker = null_projection(s, tol);
    const BlockOperator coker = null_projection(sa, tol);
    return k0_of_difference(ker, coker, alg, tol);
}

}  // namespace kflow
