#pragma once

#include <complex>
#include <vector>

namespace h221 {

// residual maxima per step size, ordered like `steps` (largest step first)
struct ConvergenceStudy {
    std::vector<double> steps;
    std::vector<double> max_residual;
    double order = 0;  // least-squares slope of log residual against log h
    double floor = 0;  // Richardson-extrapolated residual from the two smallest steps

    bool passes(double min_order, double max_floor) const { return order >= min_order && floor < max_floor; }
};

// `residuals[k]` holds the per-node residuals at steps[k]; nodes must line up across steps.
// The floor is max over nodes of |(q^2 R_small - R_large)/(q^2 - 1)| with q the step ratio,
// which removes the h^2 term and leaves what does not vanish with h.
ConvergenceStudy study(const std::vector<double>& steps, const std::vector<std::vector<double>>& residuals);

// signed variant: per-node residuals are complex so that the extrapolation cancels exactly
ConvergenceStudy study_signed(const std::vector<double>& steps,
                              const std::vector<std::vector<std::complex<double>>>& residuals);

double fitted_order(const std::vector<double>& steps, const std::vector<double>& values);

}  // namespace h221
