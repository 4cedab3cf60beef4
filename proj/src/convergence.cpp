#include "h221/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace h221 {

double fitted_order(const std::vector<double>& steps, const std::vector<double>& values) {
    if (steps.size() != values.size() || steps.size() < 2) throw std::invalid_argument("need at least two steps");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double x = std::log(steps[k]);
        const double y = std::log(std::max(values[k], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

template <class T>
ConvergenceStudy study_impl(const std::vector<double>& steps, const std::vector<std::vector<T>>& residuals) {
    if (steps.size() != residuals.size() || steps.size() < 2) throw std::invalid_argument("need at least two steps");
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (!(steps[k] < steps[k - 1])) throw std::invalid_argument("steps must decrease");
    const std::size_t nodes = residuals.front().size();
    for (const auto& r : residuals)
        if (r.size() != nodes) throw std::invalid_argument("node count differs between steps");

    ConvergenceStudy s;
    s.steps = steps;
    for (const auto& r : residuals) {
        double m = 0;
        for (const T& v : r) m = std::max(m, double(std::abs(v)));
        s.max_residual.push_back(m);
    }
    s.order = fitted_order(steps, s.max_residual);
    const std::size_t last = steps.size() - 1;
    const double q = steps[last - 1] / steps[last];
    for (std::size_t i = 0; i < nodes; ++i) {
        const T extrapolated = (q * q * residuals[last][i] - residuals[last - 1][i]) / (q * q - 1.0);
        s.floor = std::max(s.floor, double(std::abs(extrapolated)));
    }
    return s;
}

}  // namespace

ConvergenceStudy study(const std::vector<double>& steps, const std::vector<std::vector<double>>& residuals) {
    return study_impl(steps, residuals);
}

ConvergenceStudy study_signed(const std::vector<double>& steps,
                              const std::vector<std::vector<std::complex<double>>>& residuals) {
    return study_impl(steps, residuals);
}

}  // namespace h221
