#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "rstat/exact_exponential.hpp"
#include "rstat/quadrature.hpp"
#include "rstat/samplers.hpp"
#include "test_support.hpp"

using namespace rstat;
using exact::DensityGrid;
using exact::HypoexpParams;

namespace {

// Footnote closed form for f_{T_{n-m}}: the convolution integral in terms of
// the lower incomplete gamma with integer order, independent of the
// quadrature route.
double f_T_closed_form(std::size_t n, std::size_t m, double t) {
    if (t <= 0.0) return 0.0;
    const std::size_t k = n - m - 1;
    const double denom = static_cast<double>(n - m);
    double coeff = 1.0 / denom;
    for (std::size_t i = 0; i <= m; ++i) coeff *= static_cast<double>(n - i);
    double factorial_km1 = 1.0;
    for (std::size_t j = 2; j < k; ++j) factorial_km1 *= static_cast<double>(j);

    double total = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        const double lambda_i = static_cast<double>(n - i);
        double psi = 1.0;
        for (std::size_t j = 0; j <= m; ++j) {
            if (j != i) psi /= static_cast<double>(n - j) - lambda_i;
        }
        const double a = 1.0 - lambda_i / denom;  // integral of e^{-a x} x^{k-1}
        double integral;
        if (std::abs(a) < 1e-13) {
            integral = std::pow(t, static_cast<double>(k)) / static_cast<double>(k);
        } else {
            integral = testo::lower_incomplete_gamma_int(k, a * t) / std::pow(a, static_cast<double>(k));
        }
        total += psi * std::exp(-lambda_i * t / denom) * integral;
    }
    return coeff / factorial_km1 * total;
}

}  // namespace

TEST_CASE("truncated_left_cdf: boundary, limit, memorylessness") {
    const auto model = exact::exponential_parent(1.0);
    CHECK(exact::truncated_left_cdf(model, 1.0, 1.0) == 0.0);
    CHECK(exact::truncated_left_cdf(model, 1.0, 60.0) == doctest::Approx(1.0));
    CHECK(exact::truncated_left_cdf(model, 1.0, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)));

    const auto uniform = exact::uniform_parent(0.0, 1.0);
    CHECK_THROWS_AS(exact::truncated_left_cdf(uniform, 1.0, 1.5), DegenerateTruncation);
}

TEST_CASE("truncated_right_cdf: boundary, lower support, direct formula") {
    const auto model = exact::exponential_parent(1.0);
    CHECK(exact::truncated_right_cdf(model, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(exact::truncated_right_cdf(model, 1.0, 0.0) == 0.0);
    CHECK(exact::truncated_right_cdf(model, 1.0, 0.5) ==
          doctest::Approx((1.0 - std::exp(-0.5)) / (1.0 - std::exp(-1.0))));
    CHECK(exact::truncated_right_cdf(model, 1.0, 2.0) == 1.0);
    CHECK_THROWS_AS(exact::truncated_right_cdf(model, 0.0, 0.0), DegenerateTruncation);
}

TEST_CASE("conv_power: identity at k=1") {
    const auto grid = DensityGrid::from_function([](double t) { return std::exp(-t); }, 20.0, 512);
    const auto same = exact::conv_power(grid, 1);
    CHECK(same.y == grid.y);
    CHECK(same.step == grid.step);
}

TEST_CASE("conv_power: uniform density squares to the triangle") {
    const auto grid = DensityGrid::from_function([](double) { return 1.0; }, 1.0, 1001);
    const auto tri = exact::conv_power(grid, 2);
    CHECK(tri.t_max() == doctest::Approx(2.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < tri.y.size(); ++i) {
        const double t = tri.t[i];
        const double expected = t <= 1.0 ? t : 2.0 - t;
        worst = std::max(worst, std::abs(tri.y[i] - expected));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("conv_power: exponential cubed matches Gamma(3,1) within 1e-4 at step 1e-3") {
    const double t_max = 12.0;
    const auto points = static_cast<std::size_t>(t_max / 1e-3) + 1;
    const auto grid =
        DensityGrid::from_function([](double t) { return std::exp(-t); }, t_max, points);
    const auto conv = exact::conv_power(grid, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < conv.y.size(); ++i) {
        worst = std::max(worst, std::abs(conv.y[i] - testo::gamma_pdf(3, conv.t[i])));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("conv_power rejects grids too coarse to hold normalization") {
    const auto coarse = DensityGrid::from_function([](double t) { return std::exp(-t); }, 30.0, 100);
    CHECK_THROWS_AS(exact::conv_power(coarse, 4), GridTooCoarse);
}

TEST_CASE("order_stat_density: single observation, Beta(2,1), normalization") {
    const auto exp1 = exact::exponential_parent(1.0);
    CHECK(exact::order_stat_density(exp1, 1, 1, 0.3) == doctest::Approx(exp1.pdf(0.3)));

    const auto uniform = exact::uniform_parent(0.0, 1.0);
    CHECK(exact::order_stat_density(uniform, 2, 2, 0.5) == doctest::Approx(1.0));

    quad::Options opt;
    opt.abs_tol = 1e-10;
    const double total = quad::integrate(
        [&](double u) { return exact::order_stat_density(exp1, 3, 2, u); }, 0.0, 60.0, opt);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("hypoexp_density closed forms") {
    CHECK(exact::hypoexp_density({1.0, 2.0}, std::log(2.0)) == doctest::Approx(0.5));
    CHECK(exact::hypoexp_density({1.0, 2.0}, 0.0) == 0.0);
    CHECK(exact::hypoexp_density({1.0, 2.0}, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));

    // rates (1,2,3): 3e^-t - 6e^-2t + 3e^-3t
    for (const double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double expected =
            3.0 * std::exp(-t) - 6.0 * std::exp(-2.0 * t) + 3.0 * std::exp(-3.0 * t);
        CHECK(exact::hypoexp_density({1.0, 2.0, 3.0}, t) == doctest::Approx(expected).epsilon(1e-12));
    }

    CHECK_THROWS_AS(exact::hypoexp_density({1.0, 1.0 + 1e-14}, 1.0), DuplicateRates);
}

TEST_CASE("hypoexp_density integrates to 1 and stays nonnegative for random rate sets") {
    testo::TestRng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t count = 2 + rng.next() % 5;
        std::vector<double> rates;
        while (rates.size() < count) {
            const double candidate = rng.uniform(0.2, 5.0);
            bool ok = true;
            for (const double r : rates) ok &= std::abs(candidate - r) > 0.05 * std::max(candidate, r);
            if (ok) rates.push_back(candidate);
        }
        const auto params = HypoexpParams::from_rates(rates);
        const double rate_min = *std::min_element(rates.begin(), rates.end());

        quad::Options opt;
        opt.abs_tol = 1e-10;
        opt.max_intervals = 20000;
        const double total = quad::integrate(
            [&](double t) { return exact::hypoexp_density(params, t); }, 0.0, 60.0 / rate_min, opt);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

        for (int i = 0; i <= 500; ++i) {
            const double t = 20.0 / rate_min * i / 500.0;
            CHECK(exact::hypoexp_density(params, t) >= 0.0);
        }
    }
}

TEST_CASE("hypoexp_cdf matches a seeded Monte Carlo of summed exponentials") {
    const std::vector<double> rates{0.7, 1.3, 2.9};
    const auto params = HypoexpParams::from_rates(rates);
    rng::RandomStream stream(31, 0);
    std::vector<double> draws(200'000);
    for (double& v : draws) {
        v = 0.0;
        for (const double r : rates) v += stream.exponential(1.0 / r);
    }
    const double d =
        testo::ks_distance(draws, [&](double t) { return exact::hypoexp_cdf(params, t); });
    CHECK(d < 0.005);
}

TEST_CASE("f_L agrees with hypoexp_density under the rate mapping") {
    for (const auto& [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{
             {4, 1}, {10, 3}, {10, 5}, {20, 7}}) {
        std::vector<double> rates;
        for (std::size_t i = 1; i <= m + 1; ++i) {
            rates.push_back(static_cast<double>(n - i + 1) / static_cast<double>(n - m));
        }
        const auto params = HypoexpParams::from_rates(rates);
        // Both routes share the partial-fraction cancellation, so the match
        // is relative to the term scale, not the (possibly tiny) value.
        double rate_product = 1.0;
        for (const double r : rates) rate_product *= r;
        double term_scale = 0.0;
        for (const double w : params.weights) term_scale = std::max(term_scale, rate_product * std::abs(w));
        for (const double x : {0.05, 0.3, 1.0, 2.5, 7.0}) {
            const double via_hypoexp = exact::hypoexp_density(params, x);
            const double direct = exact::f_L(n, m, x);
            CHECK(std::abs(direct - via_hypoexp) <= 1e-12 * (std::abs(via_hypoexp) + term_scale));
        }
    }
}

TEST_CASE("f_L closed form at n=4, m=1 and normalization") {
    for (const double x : {0.1, 0.7, 2.0, 4.0}) {
        const double expected = 4.0 * (std::exp(-x) - std::exp(-4.0 * x / 3.0));
        CHECK(exact::f_L(4, 1, x) == doctest::Approx(expected).epsilon(1e-12));
    }
    quad::Options opt;
    opt.abs_tol = 1e-10;
    opt.max_intervals = 20000;
    const double total =
        quad::integrate([](double x) { return exact::f_L(10, 4, x); }, 0.0, 120.0, opt);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("f_T_exponential: normalization, mean identity, closed-form oracle") {
    quad::Options opt;
    opt.abs_tol = 1e-9;
    opt.max_intervals = 40000;

    SUBCASE("normalization at (10,5)") {
        const double total = quad::integrate(
            [](double t) { return exact::f_T_exponential(10, 5, t); }, 0.0, 80.0, opt);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("mean matches the Renyi-representation sum at (10,3)") {
        const double implied = quad::integrate(
            [](double t) { return t * exact::f_T_exponential(10, 3, t); }, 0.0, 100.0, opt);
        CHECK(implied == doctest::Approx(testo::renyi_top_sum_mean(10, 3)).epsilon(1e-4));
    }

    SUBCASE("pointwise agreement with the incomplete-gamma footnote form") {
        for (const auto& [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{
                 {10, 3}, {10, 5}, {20, 7}, {6, 2}}) {
            for (const double t : {0.5, 2.0, 5.0, 9.0, 15.0}) {
                const double closed = f_T_closed_form(n, m, t);
                CHECK(exact::f_T_exponential(n, m, t) == doctest::Approx(closed).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("f_T_exponential CDF is close to a 1e6-draw Monte Carlo of T_5 at n=10") {
    // Empirical T_{n-m} for the standard exponential: sort and sum the top.
    const std::size_t n = 10, m = 5;
    rng::RandomStream stream(17, 0);
    std::vector<double> draws(1'000'000);
    std::vector<double> sample(n);
    for (double& v : draws) {
        for (double& x : sample) x = stream.exponential(1.0);
        std::sort(sample.begin(), sample.end());
        v = std::accumulate(sample.begin() + m, sample.end(), 0.0);
    }

    // Implied CDF on a fine grid via cumulative trapezoid of f_T.
    const double t_hi = 40.0;
    const std::size_t points = 4001;
    std::vector<double> cdf(points, 0.0);
    const double step = t_hi / static_cast<double>(points - 1);
    double prev = exact::f_T_exponential(n, m, 0.0);
    for (std::size_t i = 1; i < points; ++i) {
        const double cur = exact::f_T_exponential(n, m, static_cast<double>(i) * step);
        cdf[i] = cdf[i - 1] + 0.5 * step * (prev + cur);
        prev = cur;
    }
    const auto implied_cdf = [&](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= t_hi) return 1.0;
        const auto idx = static_cast<std::size_t>(t / step);
        const double frac = t / step - static_cast<double>(idx);
        return cdf[idx] + frac * (cdf[idx + 1] - cdf[idx]);
    };
    CHECK(testo::ks_distance(draws, implied_cdf) <= 0.005);
}

TEST_CASE("F_R_given_m: boundaries and the conditional Monte Carlo oracle") {
    const auto model = exact::exponential_parent(1.0);
    CHECK(exact::F_R_given_m(model, 6, 3, 0.7, 0.0) == 0.0);
    CHECK(exact::F_R_given_m(model, 6, 3, 0.7, 2.0 / 3.0) == 1.0);
    CHECK(exact::F_R_given_m(model, 6, 3, 0.7, 5.0) == 1.0);

    // Conditional oracle: m-1 right-truncated draws below u, n-m left-truncated
    // draws above u, both by inverse transform.
    const std::size_t reps = 100'000;
    const double u = 0.7, kappa = 0.2;
    const double fu = 1.0 - std::exp(-u);
    rng::RandomStream stream(92, 0);
    std::size_t hits = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        double bottom = 0.0, top = 0.0;
        for (int i = 0; i < 2; ++i) bottom += -std::log1p(-stream.uniform() * fu);
        for (int i = 0; i < 3; ++i) top += u + stream.exponential(1.0);
        hits += bottom / top < kappa;
    }
    const double mc = static_cast<double>(hits) / static_cast<double>(reps);
    const double se = testo::binomial_se(mc, reps);
    const double got = exact::F_R_given_m(model, 6, 3, u, kappa);
    CHECK(std::abs(got - mc) < 3.0 * se);
}

TEST_CASE("F_R_given_m generic-parent path agrees with a conditional oracle (uniform)") {
    const auto model = exact::uniform_parent(0.0, 1.0);
    const std::size_t reps = 100'000;
    const double u = 0.4, kappa = 0.3;
    rng::RandomStream stream(58, 0);
    std::size_t hits = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const double bottom = stream.uniform() * u + stream.uniform() * u;
        double top = 0.0;
        for (int i = 0; i < 3; ++i) top += u + stream.uniform() * (1.0 - u);
        hits += bottom / top < kappa;
    }
    const double mc = static_cast<double>(hits) / static_cast<double>(reps);
    const double got = exact::F_R_given_m(model, 6, 3, u, kappa);
    CHECK(std::abs(got - mc) < 3.0 * testo::binomial_se(mc, reps));
}

TEST_CASE("F_R_given_m is nondecreasing in kappa") {
    const auto model = exact::exponential_parent(1.0);
    double prev = 0.0;
    for (const double kappa : {0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7}) {
        const double cur = exact::F_R_given_m(model, 8, 4, 0.9, kappa);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("prob_R_less_kappa: boundaries, monotonicity, Monte Carlo oracle") {
    const auto model = exact::exponential_parent(1.0);
    CHECK(exact::prob_R_less_kappa(model, 10, 3, 0.0) == 0.0);
    CHECK(exact::prob_R_less_kappa(model, 10, 3, 2.0 / 7.0) == 1.0);
    CHECK(exact::prob_R_less_kappa(model, 10, 3, 1.0) == 1.0);

    // m = 1 short-circuit: S_0 = 0.
    CHECK(exact::prob_R_less_kappa(model, 10, 1, 0.5) == 1.0);
    CHECK(exact::prob_R_less_kappa(model, 10, 1, 0.0) == 0.0);

    const std::size_t reps = 100'000;
    rng::RandomStream stream(41, 0);
    std::vector<double> ratios(reps);
    std::vector<double> sample(10);
    for (double& r : ratios) {
        for (double& x : sample) x = stream.exponential(1.0);
        std::sort(sample.begin(), sample.end());
        const double s2 = sample[0] + sample[1];
        const double t7 = std::accumulate(sample.begin() + 3, sample.end(), 0.0);
        r = s2 / t7;
    }
    double prev = 0.0;
    for (const double kappa : {0.05, 0.1, 0.2}) {
        std::size_t hits = 0;
        for (const double r : ratios) hits += r < kappa;
        const double mc = static_cast<double>(hits) / static_cast<double>(reps);
        const double exact_value = exact::prob_R_less_kappa(model, 10, 3, kappa);
        CHECK(std::abs(exact_value - mc) < 3.0 * testo::binomial_se(mc, reps));
        CHECK(exact_value >= prev - 1e-12);
        prev = exact_value;
    }
}

TEST_CASE("sandwich_bounds: ordering, vanishing gap, Monte Carlo bracket") {
    const auto model = exact::exponential_parent(1.0);

    SUBCASE("lower <= upper and the gap shrinks with n at fixed m") {
        double prev_gap = 2.0;
        for (const std::size_t n : {10, 20, 40}) {
            const auto [lo, hi] = exact::sandwich_bounds(model, n, 3, 0.1);
            CHECK(lo <= hi);
            const double gap = hi - lo;
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
    }

    SUBCASE("1e5-rep Monte Carlo of S_m/T_{n-m} is bracketed (n=10, m=5)") {
        const std::size_t n = 10, m = 5, reps = 100'000;
        rng::RandomStream stream(73, 0);
        std::vector<double> ratios(reps);
        std::vector<double> sample(n);
        for (double& r : ratios) {
            for (double& x : sample) x = stream.exponential(1.0);
            std::sort(sample.begin(), sample.end());
            const double s = std::accumulate(sample.begin(), sample.begin() + m, 0.0);
            const double t = std::accumulate(sample.begin() + m, sample.end(), 0.0);
            r = s / t;
        }
        for (const double kappa : {0.1, 0.2}) {
            std::size_t hits = 0;
            for (const double r : ratios) hits += r <= kappa;
            const double mc = static_cast<double>(hits) / static_cast<double>(reps);
            const double se = testo::binomial_se(mc, reps);
            const auto [lo, hi] = exact::sandwich_bounds(model, n, m, kappa);
            CHECK(mc >= lo - 3.0 * se);
            CHECK(mc <= hi + 3.0 * se);
        }
    }
}

TEST_CASE("prob_R_less_kappa holds up at larger block sizes") {
    const auto model = exact::exponential_parent(1.0);
    const std::size_t reps = 100'000;
    for (const auto& [n, m, kappa] : std::vector<std::tuple<std::size_t, std::size_t, double>>{
             {20, 19, 3.0}, {30, 15, 0.3}}) {
        rng::RandomStream stream(31337 + n, 0);
        std::vector<double> sample(n);
        std::size_t hits = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            for (double& x : sample) x = stream.exponential(1.0);
            std::sort(sample.begin(), sample.end());
            const double s =
                std::accumulate(sample.begin(), sample.begin() + static_cast<long>(m - 1), 0.0);
            const double t = std::accumulate(sample.begin() + static_cast<long>(m), sample.end(), 0.0);
            hits += s / t < kappa;
        }
        const double mc = static_cast<double>(hits) / static_cast<double>(reps);
        const double got = exact::prob_R_less_kappa(model, n, m, kappa);
        CHECK(std::abs(got - mc) < 3.0 * testo::binomial_se(mc, reps) + 5e-4);
    }
}

TEST_CASE("prob_R_less_kappa honors the cancellation token") {
    const auto model = exact::exponential_parent(1.0);
    std::atomic<bool> cancel{true};
    CHECK_THROWS_AS(exact::prob_R_less_kappa(model, 12, 5, 0.1, &cancel), Cancelled);
}
