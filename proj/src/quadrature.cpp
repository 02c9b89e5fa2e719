#include "rstat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rstat::quad {

namespace {

// Gauss-Kronrod (G7, K15) nodes and weights on [-1, 1], positive half.
constexpr double kNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Interval {
    double a, b;
    std::vector<double> value;  // K15 per component
    std::vector<double> error;  // |K15 - G7| per component
    double worst;               // max component error
};

using VecFn = std::function<void(double, std::span<double>)>;

Interval evaluate(const VecFn& f, std::size_t dim, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    Interval out{a, b, std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), 0.0};
    std::vector<double> gauss(dim, 0.0);
    std::vector<double> buf(dim);

    for (int i = 0; i < 8; ++i) {
        const bool is_gauss = (i % 2 == 1) || i == 7;  // G7 nodes are every other Kronrod node
        const int gauss_idx = i / 2;
        const double offsets[2] = {center - half * kNodes[i], center + half * kNodes[i]};
        const int sides = (i == 7) ? 1 : 2;
        for (int s = 0; s < sides; ++s) {
            f(offsets[s], buf);
            for (std::size_t c = 0; c < dim; ++c) {
                out.value[c] += kKronrodW[i] * buf[c];
                if (is_gauss) gauss[c] += kGaussW[gauss_idx] * buf[c];
            }
        }
    }
    for (std::size_t c = 0; c < dim; ++c) {
        out.value[c] *= half;
        gauss[c] *= half;
        out.error[c] = std::abs(out.value[c] - gauss[c]);
        out.worst = std::max(out.worst, out.error[c]);
    }
    return out;
}

}  // namespace

std::vector<double> integrate_vec(const VecFn& f, std::size_t dim, double a, double b,
                                  const Options& opt) {
    if (opt.cancel && opt.cancel->load(std::memory_order_relaxed)) {
        throw Cancelled("quadrature cancelled");
    }
    auto cmp = [](const Interval& x, const Interval& y) { return x.worst < y.worst; };
    std::priority_queue<Interval, std::vector<Interval>, decltype(cmp)> queue(cmp);

    std::vector<double> total_err(dim, 0.0);
    auto push = [&](Interval iv) {
        for (std::size_t c = 0; c < dim; ++c) total_err[c] += iv.error[c];
        queue.push(std::move(iv));
    };
    push(evaluate(f, dim, a, b));

    std::size_t evaluations = 1;
    while (*std::max_element(total_err.begin(), total_err.end()) > opt.abs_tol) {
        if (opt.cancel && opt.cancel->load(std::memory_order_relaxed)) {
            throw Cancelled("quadrature cancelled");
        }
        if (evaluations >= opt.max_intervals) {
            throw QuadratureFailure("interval budget exhausted before reaching tolerance");
        }
        Interval worst = queue.top();
        queue.pop();
        for (std::size_t c = 0; c < dim; ++c) total_err[c] -= worst.error[c];
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureFailure("interval collapsed below machine resolution");
        }
        push(evaluate(f, dim, worst.a, mid));
        push(evaluate(f, dim, mid, worst.b));
        evaluations += 2;
    }

    std::vector<double> result(dim, 0.0);
    while (!queue.empty()) {
        for (std::size_t c = 0; c < dim; ++c) result[c] += queue.top().value[c];
        queue.pop();
    }
    return result;
}

double integrate(const std::function<double(double)>& f, double a, double b, const Options& opt) {
    const auto wrapped = [&f](double x, std::span<double> out) { out[0] = f(x); };
    return integrate_vec(wrapped, 1, a, b, opt)[0];
}

}  // namespace rstat::quad
