#ifndef RSTAT_QUADRATURE_HPP
#define RSTAT_QUADRATURE_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rstat/errors.hpp"

namespace rstat::quad {

struct Options {
    double abs_tol = 1e-8;
    std::size_t max_intervals = 4096;
    const std::atomic<bool>* cancel = nullptr;
};

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over [a, b] to an
/// absolute tolerance. Throws QuadratureFailure when the interval budget is
/// exhausted, Cancelled when the token fires.
double integrate(const std::function<double(double)>& f, double a, double b, const Options& opt);

/// Vector-valued variant: f writes `dim` components into `out` for each
/// abscissa; all components are integrated over a shared adaptive partition
/// refined against the worst per-component error estimate.
std::vector<double> integrate_vec(const std::function<void(double, std::span<double>)>& f,
                                  std::size_t dim, double a, double b, const Options& opt);

}  // namespace rstat::quad

#endif
