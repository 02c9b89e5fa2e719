#include "rstat/exact_exponential.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "rstat/quadrature.hpp"

namespace rstat::exact {

namespace {

constexpr std::size_t kFinalGridPoints = 4096;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

ParentModel exponential_parent(double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    ParentModel model;
    model.cdf = [theta](double t) { return t <= 0.0 ? 0.0 : -std::expm1(-t / theta); };
    model.pdf = [theta](double t) { return t < 0.0 ? 0.0 : std::exp(-t / theta) / theta; };
    model.quantile = [theta](double p) { return -theta * std::log1p(-p); };
    model.tag = "exponential";
    model.memoryless_left_truncation = true;
    return model;
}

ParentModel uniform_parent(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("need b > a");
    ParentModel model;
    model.cdf = [a, b](double t) { return clamp01((t - a) / (b - a)); };
    model.pdf = [a, b](double t) { return (t >= a && t <= b) ? 1.0 / (b - a) : 0.0; };
    model.quantile = [a, b](double p) { return a + p * (b - a); };
    model.tag = "uniform";
    return model;
}

DensityGrid DensityGrid::from_function(const std::function<double(double)>& f, double t_max,
                                       std::size_t points) {
    if (points < 2 || !(t_max > 0.0)) throw std::invalid_argument("bad grid shape");
    DensityGrid g;
    g.step = t_max / static_cast<double>(points - 1);
    g.t.resize(points);
    g.y.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        g.t[i] = static_cast<double>(i) * g.step;
        g.y[i] = f(g.t[i]);
    }
    return g;
}

double DensityGrid::integral() const {
    if (y.size() < 2) return 0.0;
    double acc = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    return acc * step;
}

DensityGrid DensityGrid::cumulative() const {
    DensityGrid c;
    c.step = step;
    c.t = t;
    c.y.resize(y.size());
    double acc = 0.0;
    c.y[0] = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        acc += 0.5 * step * (y[i - 1] + y[i]);
        c.y[i] = clamp01(acc);
    }
    return c;
}

double DensityGrid::interpolate(double x) const {
    if (y.empty()) return 0.0;
    if (x <= t.front()) return y.front();
    if (x >= t.back()) return y.back();
    const std::size_t i = static_cast<std::size_t>(x / step);
    const std::size_t j = std::min(i + 1, y.size() - 1);
    const double frac = (x - t[i]) / step;
    return y[i] + frac * (y[j] - y[i]);
}

double truncated_left_cdf(const ParentModel& model, double u, double t) {
    const double fu = model.cdf(u);
    if (1.0 - fu <= 0.0) throw DegenerateTruncation("F(u) must be < 1");
    if (t < u) return 0.0;
    return clamp01((model.cdf(t) - fu) / (1.0 - fu));
}

double truncated_right_cdf(const ParentModel& model, double u, double t) {
    const double fu = model.cdf(u);
    if (fu <= 0.0) throw DegenerateTruncation("F(u) must be > 0");
    if (t > u) return 1.0;
    return clamp01(model.cdf(t) / fu);
}

DensityGrid conv_power(const DensityGrid& grid_density, std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (grid_density.y.size() < 2) throw std::invalid_argument("grid too small");
    const double mass = grid_density.integral();
    if (std::abs(mass - 1.0) > 5e-2) {
        throw std::invalid_argument("input density not normalized within tolerance");
    }
    if (k == 1) return grid_density;

    const double step = grid_density.step;
    std::vector<double> base = grid_density.y;
    for (double& v : base) v /= mass;

    std::vector<double> acc = base;
    for (std::size_t pass = 1; pass < k; ++pass) {
        const std::size_t na = acc.size(), nb = base.size();
        std::vector<double> out(na + nb - 1, 0.0);
        for (std::size_t i = 1; i < out.size(); ++i) {
            const std::size_t j0 = i >= nb ? i - nb + 1 : 0;
            const std::size_t j1 = std::min(i, na - 1);
            if (j1 <= j0) continue;  // zero-width overlap
            double s = 0.5 * (acc[j0] * base[i - j0] + acc[j1] * base[i - j1]);
            for (std::size_t j = j0 + 1; j < j1; ++j) s += acc[j] * base[i - j];
            out[i] = s * step;
        }
        double tot = 0.5 * (out.front() + out.back());
        for (std::size_t i = 1; i + 1 < out.size(); ++i) tot += out[i];
        tot *= step;
        if (std::abs(tot - 1.0) > 1e-4) {
            throw GridTooCoarse("convolution normalization drift " + std::to_string(tot - 1.0));
        }
        for (double& v : out) v /= tot;
        acc = std::move(out);
    }

    DensityGrid result;
    result.step = step;
    result.y = std::move(acc);
    result.t.resize(result.y.size());
    for (std::size_t i = 0; i < result.t.size(); ++i) result.t[i] = static_cast<double>(i) * step;
    return result;
}

double order_stat_density(const ParentModel& model, std::size_t n, std::size_t m, double u) {
    if (n < 1 || m < 1 || m > n) throw std::invalid_argument("need 1 <= m <= n");
    const double cdf = model.cdf(u);
    const double pdf = model.pdf(u);
    const auto a = static_cast<double>(m - 1);
    const auto b = static_cast<double>(n - m);
    if (cdf <= 0.0 && a > 0.0) return 0.0;
    if (cdf >= 1.0 && b > 0.0) return 0.0;
    const double log_coeff = std::lgamma(static_cast<double>(n) + 1.0) -
                             std::lgamma(static_cast<double>(m)) -
                             std::lgamma(static_cast<double>(n - m) + 1.0);
    const double log_pow = (a > 0.0 ? a * std::log(cdf) : 0.0) +
                           (b > 0.0 ? b * std::log1p(-cdf) : 0.0);
    return std::exp(log_coeff + log_pow) * pdf;
}

HypoexpParams HypoexpParams::from_rates(std::vector<double> rates) {
    if (rates.empty()) throw std::invalid_argument("need at least one rate");
    for (double r : rates) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("rates must be positive");
    }
    for (std::size_t i = 0; i < rates.size(); ++i) {
        for (std::size_t j = i + 1; j < rates.size(); ++j) {
            if (std::abs(rates[i] - rates[j]) <= 1e-12 * std::max(rates[i], rates[j])) {
                throw DuplicateRates("rates " + std::to_string(rates[i]) + " and " +
                                     std::to_string(rates[j]) + " coincide");
            }
        }
    }
    HypoexpParams params;
    params.weights.resize(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        double denom = 1.0;
        for (std::size_t j = 0; j < rates.size(); ++j) {
            if (j != i) denom *= rates[j] - rates[i];
        }
        params.weights[i] = 1.0 / denom;
    }
    params.rates = std::move(rates);
    return params;
}

double hypoexp_density(const HypoexpParams& params, double t) {
    if (t <= 0.0) return 0.0;
    double rate_product = 1.0;
    for (double r : params.rates) rate_product *= r;
    double value = 0.0, magnitude = 0.0;
    for (std::size_t i = 0; i < params.rates.size(); ++i) {
        const double term = rate_product * params.weights[i] * std::exp(-t * params.rates[i]);
        value += term;
        magnitude += std::abs(term);
    }
    // Cancellation of the alternating partial fractions can leave a tiny
    // negative residue where the true density vanishes.
    if (value < 0.0 && value > -1e-10 * magnitude) return 0.0;
    return value;
}

double hypoexp_density(const std::vector<double>& rates, double t) {
    return hypoexp_density(HypoexpParams::from_rates(rates), t);
}

double hypoexp_cdf(const HypoexpParams& params, double t) {
    if (t <= 0.0) return 0.0;
    double rate_product = 1.0;
    for (double r : params.rates) rate_product *= r;
    double value = 0.0;
    for (std::size_t i = 0; i < params.rates.size(); ++i) {
        value += rate_product * params.weights[i] * -std::expm1(-t * params.rates[i]) /
                 params.rates[i];
    }
    return clamp01(value);
}

double f_L(std::size_t n, std::size_t m, double x) {
    if (m < 1 || m + 2 > n) throw std::invalid_argument("need 1 <= m <= n-2");
    if (x <= 0.0) return 0.0;
    const double denom = static_cast<double>(n - m);
    // lambda_i = n - i + 1 for i = 1..m+1, i.e. n down to n-m.
    double coeff = 1.0 / denom;
    for (std::size_t i = 0; i <= m; ++i) coeff *= static_cast<double>(n - i);
    double value = 0.0, magnitude = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        const double lambda_i = static_cast<double>(n - i);
        double psi = 1.0;
        for (std::size_t j = 0; j <= m; ++j) {
            if (j != i) psi /= static_cast<double>(n - j) - lambda_i;
        }
        const double term = coeff * psi * std::exp(-lambda_i * x / denom);
        value += term;
        magnitude += std::abs(term);
    }
    if (value < 0.0 && value > -1e-10 * magnitude) return 0.0;
    return value;
}

double f_T_exponential(std::size_t n, std::size_t m, double t) {
    if (m < 1 || m + 2 > n) throw std::invalid_argument("need 1 <= m <= n-2");
    if (t <= 0.0) return 0.0;
    const std::size_t k = n - m - 1;  // Gamma(k, 1) remainder
    const double log_gamma_k = std::lgamma(static_cast<double>(k));
    const auto gamma_pdf = [&](double x) {
        if (x <= 0.0) return k == 1 ? std::exp(-x) : 0.0;
        return std::exp((static_cast<double>(k) - 1.0) * std::log(x) - x - log_gamma_k);
    };
    quad::Options opt;
    opt.abs_tol = 1e-8;
    opt.max_intervals = 20000;
    return quad::integrate([&](double x) { return f_L(n, m, t - x) * gamma_pdf(x); }, 0.0, t,
                           opt);
}

namespace {

// Conditional structure of (S_{m-1}, T_{n-m}) given X_(m) = u, on grids.
// The bottom block carries the CDF of the (m-1)-fold right-truncated
// convolution; the top block the density of the (n-m)-fold left-truncated
// convolution expressed through the excess above u, so its grid starts at
// top_shift = (n-m) * u.
struct ConditionalKernel {
    double ratio_bound = 0.0;
    double bottom_step = 0.0;
    std::vector<double> bottom_cdf;
    double top_step = 0.0;
    double top_shift = 0.0;
    const std::vector<double>* top_density = nullptr;
    std::vector<double> top_storage;

    double eval(double kappa) const {
        if (kappa <= 0.0) return 0.0;
        if (kappa >= ratio_bound) return 1.0;
        const std::vector<double>& top = *top_density;
        const double bottom_max = bottom_step * static_cast<double>(bottom_cdf.size() - 1);
        double acc = 0.0;
        for (std::size_t i = 0; i < top.size(); ++i) {
            const double x = kappa * (top_shift + static_cast<double>(i) * top_step);
            double h;
            if (x >= bottom_max) {
                h = 1.0;
            } else {
                const auto idx = static_cast<std::size_t>(x / bottom_step);
                const double frac = x / bottom_step - static_cast<double>(idx);
                h = bottom_cdf[idx] + frac * (bottom_cdf[idx + 1] - bottom_cdf[idx]);
            }
            const double w = (i == 0 || i + 1 == top.size()) ? 0.5 : 1.0;
            acc += w * top[i] * h;
        }
        return clamp01(acc * top_step);
    }
};

// Retries the self-convolution with doubled base resolution until the
// per-step normalization drift fits the 1e-4 gate; the default resolution
// targets ~kFinalGridPoints output points.
DensityGrid conv_power_adaptive(const std::function<double(double)>& pdf, double support,
                                std::size_t base_points, std::size_t k) {
    for (int attempt = 0;; ++attempt) {
        const DensityGrid base = DensityGrid::from_function(pdf, support, base_points);
        try {
            return conv_power(base, k);
        } catch (const GridTooCoarse&) {
            if (attempt >= 4) throw;
            base_points = 2 * base_points - 1;  // keeps the same abscissae nested
        }
    }
}

DensityGrid build_top_excess(const ParentModel& model, double u, std::size_t k_top) {
    const double fu = model.cdf(u);
    const double tail = 1.0 - fu;
    const auto excess_pdf = [&model, u, tail](double y) { return model.pdf(u + y) / tail; };

    double y_hi = model.quantile(fu + tail * (1.0 - 1e-6)) - u;
    if (!(y_hi > 0.0) || !std::isfinite(y_hi)) y_hi = model.quantile(1.0 - 1e-9) - u;
    if (!(y_hi > 0.0)) throw DegenerateTruncation("empty support above u");

    // Moment probe sizes the step so the k-fold support estimate lands on
    // ~kFinalGridPoints points (99.99%-quantile scale of the convolved sum).
    const DensityGrid probe = DensityGrid::from_function(excess_pdf, y_hi, 513);
    double mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < probe.y.size(); ++i) {
        const double w = (i == 0 || i + 1 == probe.y.size()) ? 0.5 : 1.0;
        mean += w * probe.t[i] * probe.y[i];
        second += w * probe.t[i] * probe.t[i] * probe.y[i];
    }
    mean *= probe.step;
    second *= probe.step;
    const double sd = std::sqrt(std::max(0.0, second - mean * mean));
    const double kd = static_cast<double>(k_top);
    const double span = std::min(kd * y_hi, std::max(y_hi, kd * mean + 12.0 * std::sqrt(kd) * sd + y_hi));

    const double step = span / static_cast<double>(kFinalGridPoints - 1);
    const auto points = std::max<std::size_t>(33, static_cast<std::size_t>(y_hi / step) + 2);
    return conv_power_adaptive(excess_pdf, static_cast<double>(points - 1) * step, points, k_top);
}

ConditionalKernel build_kernel(const ParentModel& model, std::size_t n, std::size_t m, double u,
                               std::optional<DensityGrid>* top_cache) {
    const std::size_t k_bot = m - 1;
    const std::size_t k_top = n - m;
    const double fu = model.cdf(u);
    if (!(fu > 0.0) || !(fu < 1.0)) throw DegenerateTruncation("F(u) must lie in (0,1)");

    ConditionalKernel kernel;
    kernel.ratio_bound = static_cast<double>(k_bot) / static_cast<double>(k_top);
    kernel.top_shift = static_cast<double>(k_top) * u;

    const auto bottom_points = std::max<std::size_t>(33, kFinalGridPoints / k_bot + 1);
    const DensityGrid bottom_sum = conv_power_adaptive(
        [&model, fu](double t) { return model.pdf(t) / fu; }, u, bottom_points, k_bot);
    kernel.bottom_step = bottom_sum.step;
    kernel.bottom_cdf = bottom_sum.cumulative().y;

    const bool cacheable = model.memoryless_left_truncation && top_cache != nullptr;
    if (cacheable && top_cache->has_value()) {
        kernel.top_step = (*top_cache)->step;
        kernel.top_density = &(*top_cache)->y;
    } else {
        DensityGrid top = build_top_excess(model, u, k_top);
        if (cacheable) {
            *top_cache = std::move(top);
            kernel.top_step = (*top_cache)->step;
            kernel.top_density = &(*top_cache)->y;
        } else {
            kernel.top_step = top.step;
            kernel.top_storage = std::move(top.y);
            kernel.top_density = &kernel.top_storage;
        }
    }
    return kernel;
}

}  // namespace

double F_R_given_m(const ParentModel& model, std::size_t n, std::size_t m, double u,
                   double kappa) {
    if (m < 2 || m > n - 1) throw std::invalid_argument("need 2 <= m <= n-1");
    if (kappa <= 0.0) return 0.0;
    if (kappa >= static_cast<double>(m - 1) / static_cast<double>(n - m)) return 1.0;
    return build_kernel(model, n, m, u, nullptr).eval(kappa);
}

std::vector<double> prob_R_less_kappa_batch(const ParentModel& model, std::size_t n,
                                            std::size_t m, std::span<const double> kappas,
                                            const std::atomic<bool>* cancel) {
    if (n < 2 || m < 1 || m > n - 1) throw std::invalid_argument("need 1 <= m <= n-1");
    std::vector<double> out(kappas.size(), 0.0);
    if (m == 1) {
        // S_0 = 0, so R is identically zero.
        for (std::size_t i = 0; i < kappas.size(); ++i) out[i] = kappas[i] > 0.0 ? 1.0 : 0.0;
        return out;
    }

    const double bound = static_cast<double>(m - 1) / static_cast<double>(n - m);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        if (kappas[i] <= 0.0) {
            out[i] = 0.0;
        } else if (kappas[i] >= bound) {
            out[i] = 1.0;
        } else {
            active.push_back(i);
        }
    }
    if (active.empty()) return out;

    const double log_beta = std::lgamma(static_cast<double>(m)) +
                            std::lgamma(static_cast<double>(n - m) + 1.0) -
                            std::lgamma(static_cast<double>(n) + 1.0);
    std::optional<DensityGrid> top_cache;

    // P(R < kappa) = int_0^1 F_{R|m}(kappa | u = Q(p)) Beta(m, n-m+1)(p) dp:
    // the order-statistic density of X_(m) pulled through the quantile
    // transform, which also absorbs the infinite upper limit.
    const auto integrand = [&](double p, std::span<double> buf) {
        p = std::clamp(p, 1e-15, 1.0 - 1e-15);
        const double weight = std::exp((static_cast<double>(m) - 1.0) * std::log(p) +
                                       static_cast<double>(n - m) * std::log1p(-p) - log_beta);
        const double u = model.quantile(p);
        if (!(weight > 0.0) || !std::isfinite(u) || !(u > 0.0)) {
            std::fill(buf.begin(), buf.end(), 0.0);
            return;
        }
        const ConditionalKernel kernel = build_kernel(model, n, m, u, &top_cache);
        for (std::size_t j = 0; j < active.size(); ++j) {
            buf[j] = weight * kernel.eval(kappas[active[j]]);
        }
    };

    quad::Options opt;
    opt.abs_tol = 1e-4;
    opt.max_intervals = 800;
    opt.cancel = cancel;
    const std::vector<double> values = quad::integrate_vec(integrand, active.size(), 0.0, 1.0, opt);
    for (std::size_t j = 0; j < active.size(); ++j) out[active[j]] = clamp01(values[j]);
    return out;
}

double prob_R_less_kappa(const ParentModel& model, std::size_t n, std::size_t m, double kappa,
                         const std::atomic<bool>* cancel) {
    const double k[1] = {kappa};
    return prob_R_less_kappa_batch(model, n, m, k, cancel)[0];
}

std::pair<double, double> sandwich_bounds(const ParentModel& model, std::size_t n, std::size_t m,
                                          double kappa, const std::atomic<bool>* cancel) {
    if (n < 2 || m < 2 || m > n - 1) throw std::invalid_argument("need 2 <= m <= n-1");
    // S_{m-1}/T <= S_m/T <= S_{m-1}/T + 1/(n-m) almost surely, so the CDF of
    // R = S_{m-1}/T evaluated at kappa - 1/(n-m) and at kappa brackets
    // P(S_m/T <= kappa).
    const double shifted = kappa - 1.0 / static_cast<double>(n - m);
    const double ks[2] = {shifted, kappa};
    const std::vector<double> probs = prob_R_less_kappa_batch(model, n, m, ks, cancel);
    return {clamp01(probs[0]), clamp01(probs[1])};
}

}  // namespace rstat::exact
