#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace kflow {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;

namespace la {

struct HermitianEig {
    Vec values;   // ascending
    Mat vectors;  // columns
};

// Eigendecomposition of the Hermitian part (M + M*)/2.
HermitianEig eigh(const Mat& m);

double spectral_norm(const Mat& m);
Vec singular_values(const Mat& m);

// f applied to the Hermitian part of m through its eigendecomposition.
Mat apply(const Mat& m, const std::function<double(double)>& f);

// Complex-valued f applied to the Hermitian part of m.
Mat apply_complex(const Mat& m, const std::function<cplx(double)>& f);

// Orthogonal projection onto the span of the (orthonormal) columns of v.
Mat projector(const Mat& v);

// Orthonormal basis of the range of a (near-)projection: eigenvectors with
// eigenvalue > 1/2.
Mat range_basis(const Mat& p);

// Rebuild p from its eigenvalues rounded to {0, 1}.
Mat snap_projection(const Mat& p);

Mat adjoint(const Mat& m);

}  // namespace la
}  // namespace kflow
