#include "levin/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

#include "levin/collocation.hpp"
#include "levin/quadrature.hpp"

namespace levin {

namespace {

double max_freq(const OscillatorParams& params) {
    return params.freqs.empty() ? 0.0 : *std::max_element(params.freqs.begin(), params.freqs.end());
}

void quadrature_rule(const IntegralSpec& spec, double lo, double hi, int n, std::vector<double>& nodes,
                     std::vector<double>& weights) {
    const QuadratureRule& gl = gauss_legendre(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    nodes.resize(n);
    weights.resize(n);
    for (int j = 0; j < n; ++j) {
        const double x = mid + half * gl.nodes[j];
        nodes[j] = x;
        weights[j] = gl.weights[j] * half * w_leading(spec.kind, spec.params, x);
    }
}

void levin_rule(const IntegralSpec& spec, double lo, double hi, int n, std::vector<double>& nodes,
                std::vector<double>& weights, std::uint64_t& factorizations) {
    ++factorizations;
    const SubintervalSystem sys = assemble(spec.kind, spec.params, lo, hi, n, SingularPolicy::PseudoInverse);
    const Eigen::VectorXd z = node_weights(sys);
    nodes = sys.grid().nodes();
    weights.assign(z.data(), z.data() + z.size());
}

double apply_rule(const std::vector<double>& nodes, const std::vector<double>& weights, const Interpolant& interp,
                  std::size_t column) {
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        sum += weights[j] * interp(nodes[j], column);
    }
    return sum;
}

double apply_rule(const std::vector<Interpolant::Sample>& samples, const std::vector<double>& weights,
                  const Interpolant& interp, std::size_t column) {
    double sum = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        sum += weights[j] * interp(samples[j], column);
    }
    return sum;
}

std::vector<Interpolant::Sample> samples_of(const std::vector<double>& nodes, const Interpolant& interp) {
    std::vector<Interpolant::Sample> out;
    out.reserve(nodes.size());
    for (double x : nodes) {
        out.push_back(interp.sample(x));
    }
    return out;
}

bool bisectable(const LeafRule& leaf) {
    const double mid = 0.5 * (leaf.lo + leaf.hi);
    return mid > leaf.lo && mid < leaf.hi &&
           (leaf.hi - leaf.lo) > 16.0 * std::numeric_limits<double>::epsilon() * leaf.hi;
}

}  // namespace

std::vector<double> initial_edges(const IntegralSpec& spec) {
    std::vector<double> edges{spec.a, spec.b};
    for (std::size_t i = 0; i < spec.params.orders.size(); ++i) {
        const double k = spec.params.freqs[i];
        if (spec.params.orders[i] > 0 && k > 0.0) {
            const double turn = spec.params.orders[i] / k;
            if (turn > spec.a && turn < spec.b) {
                edges.push_back(turn);
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

namespace {

void check_limits(const IntegralSpec& spec, const Interpolant& interp) {
    if (!(spec.a > 0.0)) {
        throw std::domain_error("lower limit must be positive, got a = " + std::to_string(spec.a));
    }
    if (!(spec.a < spec.b)) {
        throw std::domain_error("limits must satisfy a < b, got a = " + std::to_string(spec.a) +
                                ", b = " + std::to_string(spec.b));
    }
    if (spec.a < interp.x_min() || spec.b > interp.x_max()) {
        throw std::out_of_range("limits [" + std::to_string(spec.a) + ", " + std::to_string(spec.b) +
                                "] leave the tabulated range [" + std::to_string(interp.x_min()) + ", " +
                                std::to_string(interp.x_max()) + "]");
    }
}

struct LeafValues {
    std::vector<double> fine;
    std::vector<double> coarse;
};

LeafValues evaluate_leaves(const std::vector<std::shared_ptr<const LeafRule>>& leaves, const Interpolant& interp,
                           std::size_t column) {
    LeafValues v;
    v.fine.reserve(leaves.size());
    v.coarse.reserve(leaves.size());
    for (const auto& leaf : leaves) {
        v.fine.push_back(apply_rule(leaf->fine_samples, leaf->fine_weights, interp, column));
        v.coarse.push_back(apply_rule(leaf->coarse_samples, leaf->coarse_weights, interp, column));
    }
    return v;
}

double ordered_sum(const std::vector<double>& values) {
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    return s;
}

ColumnTree build_column(BisectionTree& tree, const Interpolant& interp, std::size_t column,
                        const LevinSettings& settings, std::uint64_t& factorizations) {
    const IntegralSpec& spec = tree.spec();
    ColumnTree col;
    const std::vector<double> edges = initial_edges(spec);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        col.leaves.push_back(tree.rule(edges[i], edges[i + 1], settings, interp, factorizations));
    }
    LeafValues vals = evaluate_leaves(col.leaves, interp, column);
    for (;;) {
        const ErrorEstimate est = estimate_error(vals.fine, vals.coarse);
        col.error_history.push_back(est.aggregate);
        if (est.aggregate <= settings.rel_acc) {
            col.converged = true;
            break;
        }
        if (col.bisections >= settings.max_bisections) {
            break;
        }
        std::vector<double> candidates = est.per_leaf;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!bisectable(*col.leaves[i])) {
                candidates[i] = -1.0;
            }
        }
        const std::size_t worst = pick_worst_leaf(candidates);
        if (candidates[worst] < 0.0) {
            break;
        }
        const LeafRule& parent = *col.leaves[worst];
        const double lo = parent.lo;
        const double hi = parent.hi;
        const double mid = 0.5 * (lo + hi);
        auto left = tree.rule(lo, mid, settings, interp, factorizations);
        auto right = tree.rule(mid, hi, settings, interp, factorizations);
        const auto pos = static_cast<std::ptrdiff_t>(worst);
        col.leaves[worst] = left;
        col.leaves.insert(col.leaves.begin() + pos + 1, right);
        vals.fine[worst] = apply_rule(left->fine_samples, left->fine_weights, interp, column);
        vals.coarse[worst] = apply_rule(left->coarse_samples, left->coarse_weights, interp, column);
        vals.fine.insert(vals.fine.begin() + pos + 1,
                         apply_rule(right->fine_samples, right->fine_weights, interp, column));
        vals.coarse.insert(vals.coarse.begin() + pos + 1,
                           apply_rule(right->coarse_samples, right->coarse_weights, interp, column));
        ++col.bisections;
    }
    return col;
}

}  // namespace

void LevinSettings::validate() const {
    if (n_sub < 4 || n_sub % 2 != 0) {
        throw std::invalid_argument("n_sub must be an even integer >= 4, got " + std::to_string(n_sub));
    }
    if (max_bisections < 0) {
        throw std::invalid_argument("max_bisections must be >= 0, got " + std::to_string(max_bisections));
    }
    if (!(rel_acc > 0.0) || !std::isfinite(rel_acc)) {
        throw std::invalid_argument("rel_acc must be positive, got " + std::to_string(rel_acc));
    }
    if (!(low_freq_threshold > 0.0) || !std::isfinite(low_freq_threshold)) {
        throw std::invalid_argument("low_freq_threshold must be positive, got " + std::to_string(low_freq_threshold));
    }
}

int LevinSettings::coarse_points() const {
    const int half = n_sub / 2;
    return half % 2 == 0 ? half : half + 1;
}

LeafRule make_leaf_rule(const IntegralSpec& spec, double lo, double hi, const LevinSettings& settings,
                        std::uint64_t& factorizations) {
    LeafRule rule;
    rule.lo = lo;
    rule.hi = hi;
    const int n_fine = settings.n_sub;
    const int n_coarse = settings.coarse_points();
    if (max_freq(spec.params) * (hi - lo) > settings.low_freq_threshold) {
        try {
            levin_rule(spec, lo, hi, n_fine, rule.fine_nodes, rule.fine_weights, factorizations);
            levin_rule(spec, lo, hi, n_coarse, rule.coarse_nodes, rule.coarse_weights, factorizations);
            rule.method = LeafMethod::Levin;
            return rule;
        } catch (const DegenerateSystemError&) {
        }
    }
    rule.method = LeafMethod::Quadrature;
    quadrature_rule(spec, lo, hi, n_fine, rule.fine_nodes, rule.fine_weights);
    quadrature_rule(spec, lo, hi, n_coarse, rule.coarse_nodes, rule.coarse_weights);
    return rule;
}

BisectionTree::BisectionTree(IntegralSpec spec, const LevinSettings& settings, std::uint64_t grid_token)
    : spec_(std::move(spec)),
      n_sub_(settings.n_sub),
      low_freq_threshold_(settings.low_freq_threshold),
      grid_token_(grid_token) {}

bool BisectionTree::compatible(const IntegralSpec& spec, const LevinSettings& settings,
                               std::uint64_t grid_token) const {
    return spec == spec_ && settings.n_sub == n_sub_ && settings.low_freq_threshold == low_freq_threshold_ &&
           grid_token == grid_token_;
}

const ColumnTree* BisectionTree::column(std::size_t index) const {
    const auto it = columns_.find(index);
    return it == columns_.end() ? nullptr : &it->second;
}

void BisectionTree::set_column(std::size_t index, ColumnTree tree) { columns_[index] = std::move(tree); }

std::shared_ptr<const LeafRule> BisectionTree::rule(double lo, double hi, const LevinSettings& settings,
                                                    const Interpolant& interp, std::uint64_t& factorizations) {
    const auto key = std::make_pair(lo, hi);
    auto it = memo_.find(key);
    if (it == memo_.end()) {
        LeafRule rule = make_leaf_rule(spec_, lo, hi, settings, factorizations);
        rule.fine_samples = samples_of(rule.fine_nodes, interp);
        rule.coarse_samples = samples_of(rule.coarse_nodes, interp);
        it = memo_.emplace(key, std::make_shared<const LeafRule>(std::move(rule))).first;
    }
    return it->second;
}

ErrorEstimate estimate_error(std::span<const double> fine, std::span<const double> coarse) {
    if (fine.size() != coarse.size()) {
        throw std::invalid_argument("estimate_error: fine and coarse lists differ in length");
    }
    ErrorEstimate est;
    double total = 0.0;
    for (double v : fine) {
        total += v;
    }
    const double denom = std::abs(total) + kRelativeErrorFloor;
    est.per_leaf.resize(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
        est.per_leaf[i] = std::abs(fine[i] - coarse[i]) / denom;
        est.aggregate += est.per_leaf[i];
    }
    return est;
}

std::size_t pick_worst_leaf(std::span<const double> estimates) {
    if (estimates.empty()) {
        throw std::invalid_argument("pick_worst_leaf: no leaves");
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < estimates.size(); ++i) {
        if (estimates[i] > estimates[worst]) {
            worst = i;
        }
    }
    return worst;
}

std::vector<double> low_freq_fallback(const IntegralSpec& spec, const Interpolant& interp, double lo, double hi,
                                      int n) {
    std::vector<double> nodes;
    std::vector<double> weights;
    quadrature_rule(spec, lo, hi, n, nodes, weights);
    std::vector<double> out(interp.n_integrands());
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = apply_rule(nodes, weights, interp, c);
    }
    return out;
}

bool tiles_interval(const ColumnTree& column, double a, double b) {
    if (column.leaves.empty() || column.leaves.front()->lo != a || column.leaves.back()->hi != b) {
        return false;
    }
    for (std::size_t i = 0; i < column.leaves.size(); ++i) {
        if (!(column.leaves[i]->lo < column.leaves[i]->hi)) {
            return false;
        }
        if (i > 0 && column.leaves[i]->lo != column.leaves[i - 1]->hi) {
            return false;
        }
    }
    return true;
}

AdaptiveResult integrate_adaptive(const IntegralSpec& spec, const Interpolant& interp, const LevinSettings& settings,
                                  const BisectionTree* cache, std::span<const std::size_t> columns) {
    settings.validate();
    validate(spec.kind, spec.params);
    check_limits(spec, interp);
    if (cache != nullptr && !cache->compatible(spec, settings, interp.grid_token())) {
        throw std::invalid_argument("cached bisection tree was built for a different integral or grid");
    }

    std::vector<std::size_t> wanted(columns.begin(), columns.end());
    if (wanted.empty()) {
        for (std::size_t c = 0; c < interp.n_integrands(); ++c) {
            wanted.push_back(c);
        }
    }
    for (std::size_t c : wanted) {
        if (c >= interp.n_integrands()) {
            throw std::out_of_range("integrand column " + std::to_string(c) + " does not exist");
        }
    }

    AdaptiveResult result{{}, {}, cache != nullptr ? *cache : BisectionTree(spec, settings, interp.grid_token())};
    result.values.reserve(wanted.size());
    result.converged.reserve(wanted.size());
    for (std::size_t c : wanted) {
        const ColumnTree* existing = result.tree.column(c);
        double value = 0.0;
        bool converged = false;
        if (existing != nullptr) {
            const LeafValues vals = evaluate_leaves(existing->leaves, interp, c);
            value = ordered_sum(vals.fine);
            converged = estimate_error(vals.fine, vals.coarse).aggregate <= settings.rel_acc;
            ++result.warm_columns;
        } else {
            ColumnTree col = build_column(result.tree, interp, c, settings, result.factorizations);
            value = ordered_sum(evaluate_leaves(col.leaves, interp, c).fine);
            converged = col.converged;
            result.tree.set_column(c, std::move(col));
            ++result.cold_columns;
        }
        if (settings.verbose && !converged) {
            std::cerr << "levin: integral over [" << spec.a << ", " << spec.b << "] column " << c
                      << " did not reach rel_acc " << settings.rel_acc << "\n";
        }
        result.values.push_back(value);
        result.converged.push_back(converged);
    }
    return result;
}

}  // namespace levin
