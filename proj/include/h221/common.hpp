#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace h221 {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec = Eigen::VectorXcd;

struct PoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroTimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GaugeZero : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpectralPole : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BranchAmbiguity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PathDependence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularZ : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CoincidentSpectral : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MapPole : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct JacobianSingular : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstraintViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// hard singularity tolerance for poles and zero times
inline constexpr double singular_tol = 1e-13;

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

std::string format_cplx(cplx z);

}  // namespace h221
