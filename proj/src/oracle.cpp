#include "levin/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace levin {

namespace {

// Kronrod abscissae and weights on [-1, 1]; odd-indexed abscissae are the Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
};

struct ByError {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error != y.error) {
            return x.error < y.error;
        }
        return x.lo > y.lo;
    }
};

double checked(const std::function<double(double)>& g, double x) {
    const double v = g(x);
    if (!std::isfinite(v)) {
        throw std::domain_error("oracle integrand is not finite at x = " + std::to_string(x));
    }
    return v;
}

Panel gk15(const std::function<double(double)>& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double fv1[7];
    double fv2[7];
    const double fc = checked(g, center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = checked(g, center - dx);
        fv2[j] = checked(g, center + dx);
        const double sum = fv1[j] + fv2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1) {
            resg += kWg[j / 2] * sum;
        }
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
    }
    const double scale = std::abs(half);
    resk *= half;
    resg *= half;
    resabs *= scale;
    resasc *= scale;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > tiny / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }
    return Panel{lo, hi, resk, err};
}

// Neumaier compensated sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + carry; }
};

}  // namespace

void OracleSettings::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw std::invalid_argument("oracle tolerances must be positive");
    }
    if (max_subintervals < 1) {
        throw std::invalid_argument("oracle max_subintervals must be >= 1");
    }
}

OracleResult gauss_kronrod(const std::function<double(double)>& g, double a, double b,
                           const OracleSettings& settings, int initial_panels) {
    settings.validate();
    if (!(a < b)) {
        throw std::domain_error("oracle limits must satisfy a < b");
    }
    const int n0 = std::clamp(initial_panels, 1, settings.max_subintervals);
    std::priority_queue<Panel, std::vector<Panel>, ByError> panels;
    double total = 0.0;
    double total_err = 0.0;
    for (int i = 0; i < n0; ++i) {
        const double lo = a + (b - a) * i / n0;
        const double hi = i + 1 == n0 ? b : a + (b - a) * (i + 1) / n0;
        const Panel p = gk15(g, lo, hi);
        total += p.value;
        total_err += p.error;
        panels.push(p);
    }
    int count = n0;
    auto target = [&] { return std::max(settings.abs_tol, settings.rel_tol * std::abs(total)); };
    while (total_err > target() && count < settings.max_subintervals) {
        const Panel worst = panels.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            break;
        }
        panels.pop();
        const Panel left = gk15(g, worst.lo, mid);
        const Panel right = gk15(g, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++count;
    }

    // re-sum from scratch to remove drift of the running totals
    CompensatedSum value;
    CompensatedSum error;
    std::vector<Panel> all;
    all.reserve(panels.size());
    while (!panels.empty()) {
        all.push_back(panels.top());
        panels.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.lo < y.lo; });
    for (const Panel& p : all) {
        value.add(p.value);
        error.add(p.error);
    }
    OracleResult r;
    r.value = value.value();
    r.error = error.value();
    r.subintervals = count;
    r.converged = r.error <= std::max(settings.abs_tol, settings.rel_tol * std::abs(r.value));
    return r;
}

OracleResult quad_reference(const IntegralSpec& spec, const std::function<double(double)>& f,
                            const OracleSettings& settings) {
    validate(spec.kind, spec.params);
    if (!(spec.a > 0.0) || !(spec.a < spec.b)) {
        throw std::domain_error("oracle limits must satisfy 0 < a < b");
    }
    double phase = 0.0;
    for (double k : spec.params.freqs) {
        phase += k * (spec.b - spec.a);
    }
    const double periods = std::ceil(phase / (2.0 * std::numbers::pi));
    const int cap = std::max(1, settings.max_subintervals / 2);
    const int n0 = periods >= cap ? cap : std::max(1, static_cast<int>(periods));
    auto g = [&](double x) { return f(x) * w_leading(spec.kind, spec.params, x); };
    return gauss_kronrod(g, spec.a, spec.b, settings, n0);
}

OracleResult quad_reference(const IntegralSpec& spec, const Interpolant& interp, std::size_t column,
                            const OracleSettings& settings) {
    if (column >= interp.n_integrands()) {
        throw std::out_of_range("integrand column " + std::to_string(column) + " does not exist");
    }
    return quad_reference(spec, [&](double x) { return interp(x, column); }, settings);
}

}  // namespace levin
