#ifndef RSTAT_EXACT_EXPONENTIAL_HPP
#define RSTAT_EXACT_EXPONENTIAL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rstat/errors.hpp"

namespace rstat::exact {

/// Parent distribution on [0, inf) given by its cdf, pdf and quantile.
struct ParentModel {
    std::function<double(double)> cdf;
    std::function<double(double)> pdf;
    std::function<double(double)> quantile;
    std::string tag;
    /// True when the law of X - u given X > u does not depend on u
    /// (exponential). Lets the conditional top-block convolution be reused
    /// across conditioning points.
    bool memoryless_left_truncation = false;
};

/// theta is the scale: F(t) = 1 - exp(-t/theta).
ParentModel exponential_parent(double theta = 1.0);

/// Uniform on [a, b]; handy as a second exact reference in tests.
ParentModel uniform_parent(double a, double b);

/// Density or CDF values on the uniform grid t[i] = i * step.
struct DensityGrid {
    std::vector<double> t;
    std::vector<double> y;
    double step = 0.0;

    static DensityGrid from_function(const std::function<double(double)>& f, double t_max,
                                     std::size_t points);

    double t_max() const { return t.empty() ? 0.0 : t.back(); }
    /// Trapezoid integral of y over the grid.
    double integral() const;
    /// Cumulative trapezoid integral, clamped to [0, 1].
    DensityGrid cumulative() const;
    /// Linear interpolation with flat extension beyond the ends.
    double interpolate(double x) const;
};

/// CDF of the parent truncated to (u, inf):
/// 0 for t < u, (F(t)-F(u))/(1-F(u)) for t >= u.
double truncated_left_cdf(const ParentModel& model, double u, double t);

/// CDF of the parent truncated to [0, u]:
/// F(t)/F(u) for t <= u, 1 beyond (CDF convention).
double truncated_right_cdf(const ParentModel& model, double u, double t);

/// k-fold self-convolution of a density grid by iterated discrete
/// convolution with trapezoid weights; the output grid extends to k * t_max.
/// Each step renormalizes and throws GridTooCoarse when the pre-renormalize
/// drift exceeds 1e-4.
DensityGrid conv_power(const DensityGrid& grid_density, std::size_t k);

/// Density of the m-th order statistic from a sample of size n:
/// n!/((m-1)!(n-m)!) F^{m-1}(u) (1-F(u))^{n-m} f(u).
double order_stat_density(const ParentModel& model, std::size_t n, std::size_t m, double u);

/// Distinct positive rates with the partial-fraction weights
/// psi_i = 1 / prod_{j != i} (rate_j - rate_i).
struct HypoexpParams {
    std::vector<double> rates;
    std::vector<double> weights;

    /// Computes the weights; throws DuplicateRates when two rates coincide
    /// within relative 1e-12.
    static HypoexpParams from_rates(std::vector<double> rates);
};

/// Density of a sum of independent exponentials with the given distinct
/// rates: sum_i (prod_j rate_j) * psi_i * exp(-t * rate_i) for t > 0.
double hypoexp_density(const HypoexpParams& params, double t);
double hypoexp_density(const std::vector<double>& rates, double t);

double hypoexp_cdf(const HypoexpParams& params, double t);

/// Density of the weighted spacings block for the exponential parent:
/// sum of m+1 exponentials with rates (n-i+1)/(n-m), i = 1..m+1, evaluated
/// through its own partial-fraction form. Requires 1 <= m <= n-2.
double f_L(std::size_t n, std::size_t m, double x);

/// Density of T_{n-m} for the standard exponential parent: numerical
/// convolution of f_L with the Gamma(n-m-1, 1) density, adaptive quadrature
/// to absolute tolerance 1e-8. Requires 1 <= m <= n-2.
double f_T_exponential(std::size_t n, std::size_t m, double t);

/// P(S_{m-1}/T_{n-m} < kappa | X_(m) = u), computed on grids: the
/// conditional top-block density is the (n-m)-fold convolution of the
/// left-truncated parent density, the bottom-block CDF the (m-1)-fold
/// convolution of the right-truncated density followed by cumulative
/// integration. Requires m >= 2 and F(u) in (0,1).
double F_R_given_m(const ParentModel& model, std::size_t n, std::size_t m, double u,
                   double kappa);

/// P(S_{m-1}/T_{n-m} < kappa): outer adaptive quadrature of F_R_given_m
/// against the order-statistic density of X_(m), mapped through the parent
/// quantile transform; absolute tolerance 1e-4. m = 1 short-circuits to the
/// degenerate S_0 = 0 case.
double prob_R_less_kappa(const ParentModel& model, std::size_t n, std::size_t m, double kappa,
                         const std::atomic<bool>* cancel = nullptr);

/// Same integral evaluated for several kappa values over one shared adaptive
/// partition; the per-u conditional structure is built once per node.
std::vector<double> prob_R_less_kappa_batch(const ParentModel& model, std::size_t n,
                                            std::size_t m, std::span<const double> kappas,
                                            const std::atomic<bool>* cancel = nullptr);

/// Bracket for P(S_m/T_{n-m} <= kappa): the CDF of R = S_{m-1}/T_{n-m}
/// evaluated at kappa - 1/(n-m) (lower) and at kappa (upper), both clamped
/// to [0, 1]. Follows from S_{m-1} <= S_m and X_(m)/T_{n-m} <= 1/(n-m).
std::pair<double, double> sandwich_bounds(const ParentModel& model, std::size_t n, std::size_t m,
                                          double kappa,
                                          const std::atomic<bool>* cancel = nullptr);

}  // namespace rstat::exact

#endif
