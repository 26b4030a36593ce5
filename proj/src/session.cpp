#include "levin/session.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>

#include <omp.h>

namespace levin {

namespace {

std::string entry_text(std::size_t m) { return "batch entry " + std::to_string(m); }

}  // namespace

IntegralType integral_type_from_code(int code) {
    if (code < 0 || code > 5) {
        throw std::invalid_argument("integral type must be in 0..5, got " + std::to_string(code));
    }
    return static_cast<IntegralType>(code);
}

OscillatorKind oscillator_kind(IntegralType type) {
    const int code = static_cast<int>(type);
    return OscillatorKind{code % 2 == 0 ? BesselFamily::Spherical : BesselFamily::Cylindrical, code / 2 + 1};
}

const char* integral_type_name(IntegralType type) {
    switch (type) {
        case IntegralType::SingleSpherical: return "single spherical";
        case IntegralType::SingleCylindrical: return "single cylindrical";
        case IntegralType::DoubleSpherical: return "double spherical";
        case IntegralType::DoubleCylindrical: return "double cylindrical";
        case IntegralType::TripleSpherical: return "triple spherical";
        case IntegralType::TripleCylindrical: return "triple cylindrical";
    }
    return "unknown";
}

std::vector<std::size_t> BatchResult::nonconverged_rows() const {
    std::vector<std::size_t> rows;
    for (Eigen::Index r = 0; r < converged.rows(); ++r) {
        if (!converged.row(r).all()) {
            rows.push_back(static_cast<std::size_t>(r));
        }
    }
    return rows;
}

Session::Session(IntegralType type, IntegrandTable table, LevinSettings settings)
    : type_(type),
      table_(std::move(table)),
      interp_(std::make_unique<Interpolant>(table_)),
      settings_(settings) {
    settings_.validate();
}

void Session::set_levin(const LevinSettings& settings) {
    settings.validate();
    std::unique_lock lock(session_mutex_);
    settings_ = settings;
    std::unique_lock cache_lock(cache_mutex_);
    cache_.clear();
}

void Session::set_levin(int n_sub, int max_bisections, double rel_acc, bool /*boost_bessel*/, bool verbose) {
    LevinSettings s = settings_;
    s.n_sub = n_sub;
    s.max_bisections = max_bisections;
    s.rel_acc = rel_acc;
    s.verbose = verbose;
    set_levin(s);
}

void Session::set_threads(int threads) {
    if (threads < 1) {
        throw std::invalid_argument("thread count must be >= 1, got " + std::to_string(threads));
    }
    threads_ = threads;
}

void Session::update_integrand(Eigen::MatrixXd values) {
    std::unique_lock lock(session_mutex_);
    IntegrandTable updated = update_values(table_, std::move(values));
    auto interp = std::make_unique<Interpolant>(updated);
    table_ = std::move(updated);
    interp_ = std::move(interp);
}

void Session::update_integrand(const IntegrandTable& table) {
    if (table.x() != table_.x() || table.log_x() != table_.log_x() || table.log_y() != table_.log_y()) {
        throw std::invalid_argument("updated integrand must keep the grid and the log_x/log_y flags");
    }
    update_integrand(table.values());
}

std::size_t Session::cache_size() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
}

void Session::clear_cache() {
    std::unique_lock lock(cache_mutex_);
    cache_.clear();
}

void Session::validate_request(const BatchRequest& req) const {
    const int count = oscillator_kind(type_).count;
    const std::size_t m_total = req.size();
    if (m_total == 0) {
        throw std::invalid_argument("empty batch");
    }
    if (req.b.size() != m_total) {
        throw std::invalid_argument("b has length " + std::to_string(req.b.size()) + ", a has length " +
                                    std::to_string(m_total));
    }
    if (req.k.size() != static_cast<std::size_t>(count) || req.ell.size() != static_cast<std::size_t>(count)) {
        throw std::invalid_argument(std::string(integral_type_name(type_)) + " integrals need " +
                                    std::to_string(count) + " k arrays and " + std::to_string(count) +
                                    " ell arrays");
    }
    for (int i = 0; i < count; ++i) {
        if (req.k[i].size() != m_total) {
            throw std::invalid_argument("k" + std::to_string(i + 1) + " has length " + std::to_string(req.k[i].size()) +
                                        ", expected " + std::to_string(m_total));
        }
        if (req.ell[i].size() != m_total) {
            throw std::invalid_argument("ell" + std::to_string(i + 1) + " has length " +
                                        std::to_string(req.ell[i].size()) + ", expected " + std::to_string(m_total));
        }
    }
    if (req.diagonal && m_total != n_integrands()) {
        throw std::invalid_argument("diagonal mode needs as many tuples as integrands: " + std::to_string(m_total) +
                                    " tuples, " + std::to_string(n_integrands()) + " integrands");
    }
    const double lo = interp_->x_min();
    const double hi = interp_->x_max();
    for (std::size_t m = 0; m < m_total; ++m) {
        const double a = req.a[m];
        const double b = req.b[m];
        if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0.0)) {
            throw std::invalid_argument(entry_text(m) + ": a must be finite and positive, got " + std::to_string(a));
        }
        if (!(a < b)) {
            throw std::invalid_argument(entry_text(m) + ": a (" + std::to_string(a) + ") must be below b (" +
                                        std::to_string(b) + ")");
        }
        if (a < lo || b > hi) {
            throw std::invalid_argument(entry_text(m) + ": [" + std::to_string(a) + ", " + std::to_string(b) +
                                        "] leaves the tabulated range [" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "]");
        }
        for (int i = 0; i < count; ++i) {
            const double k = req.k[i][m];
            if (!std::isfinite(k) || !(k > 0.0)) {
                throw std::invalid_argument(entry_text(m) + ": k" + std::to_string(i + 1) +
                                            " must be finite and positive, got " + std::to_string(k));
            }
            if (req.ell[i][m] < 0) {
                throw std::invalid_argument(entry_text(m) + ": ell" + std::to_string(i + 1) +
                                            " must be >= 0, got " + std::to_string(req.ell[i][m]));
            }
        }
    }
}

Session::TupleKey Session::key_of(const BatchRequest& req, std::size_t m) const {
    TupleKey key;
    key.a = req.a[m];
    key.b = req.b[m];
    for (std::size_t i = 0; i < req.k.size(); ++i) {
        key.k[i] = req.k[i][m];
        key.ell[i] = req.ell[i][m];
    }
    return key;
}

IntegralSpec Session::spec_of(const TupleKey& key) const {
    IntegralSpec spec;
    spec.kind = oscillator_kind(type_);
    for (int i = 0; i < spec.kind.count; ++i) {
        spec.params.orders.push_back(key.ell[i]);
        spec.params.freqs.push_back(key.k[i]);
    }
    spec.a = key.a;
    spec.b = key.b;
    return spec;
}

BatchResult Session::integrate_batch(const BatchRequest& request) {
    std::shared_lock session_lock(session_mutex_);
    validate_request(request);
    const std::size_t m_total = request.size();
    const std::size_t n_int = n_integrands();

    struct Job {
        TupleKey key;
        std::vector<std::size_t> columns;
        std::vector<double> values;
        std::vector<bool> converged;
        std::uint64_t factorizations = 0;
        std::size_t cold = 0;
        std::size_t warm = 0;
        std::exception_ptr error;
    };
    std::vector<Job> jobs;
    std::map<TupleKey, std::size_t> job_of_key;
    std::vector<std::size_t> job_of_row(m_total);
    for (std::size_t m = 0; m < m_total; ++m) {
        const TupleKey key = key_of(request, m);
        auto [it, inserted] = job_of_key.emplace(key, jobs.size());
        if (inserted) {
            jobs.push_back(Job{key, {}, {}, {}, 0, 0, 0, nullptr});
            if (!request.diagonal) {
                for (std::size_t c = 0; c < n_int; ++c) {
                    jobs.back().columns.push_back(c);
                }
            }
        }
        job_of_row[m] = it->second;
        if (request.diagonal) {
            auto& cols = jobs[it->second].columns;
            if (std::find(cols.begin(), cols.end(), m) == cols.end()) {
                cols.push_back(m);
            }
        }
    }

    const auto n_jobs = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads_)
    for (std::ptrdiff_t j = 0; j < n_jobs; ++j) {
        Job& job = jobs[static_cast<std::size_t>(j)];
        try {
            std::shared_ptr<const BisectionTree> cached;
            {
                std::shared_lock lock(cache_mutex_);
                const auto it = cache_.find(job.key);
                if (it != cache_.end()) {
                    cached = it->second;
                }
            }
            AdaptiveResult r = integrate_adaptive(spec_of(job.key), *interp_, settings_, cached.get(), job.columns);
            job.values = std::move(r.values);
            job.converged = std::move(r.converged);
            job.factorizations = r.factorizations;
            job.cold = r.cold_columns;
            job.warm = r.warm_columns;
            if (r.cold_columns > 0) {
                auto tree = std::make_shared<const BisectionTree>(std::move(r.tree));
                std::unique_lock lock(cache_mutex_);
                cache_[job.key] = std::move(tree);
            }
        } catch (...) {
            job.error = std::current_exception();
        }
    }
    for (const Job& job : jobs) {
        if (job.error) {
            std::rethrow_exception(job.error);
        }
    }

    BatchResult result;
    result.diagonal = request.diagonal;
    const auto rows = static_cast<Eigen::Index>(m_total);
    const auto cols = static_cast<Eigen::Index>(request.diagonal ? 1 : n_int);
    result.values.resize(rows, cols);
    result.converged.resize(rows, cols);
    for (std::size_t m = 0; m < m_total; ++m) {
        const Job& job = jobs[job_of_row[m]];
        const auto r = static_cast<Eigen::Index>(m);
        if (request.diagonal) {
            const auto pos = static_cast<std::size_t>(
                std::find(job.columns.begin(), job.columns.end(), m) - job.columns.begin());
            result.values(r, 0) = job.values[pos];
            result.converged(r, 0) = job.converged[pos];
        } else {
            for (std::size_t c = 0; c < n_int; ++c) {
                result.values(r, static_cast<Eigen::Index>(c)) = job.values[c];
                result.converged(r, static_cast<Eigen::Index>(c)) = job.converged[c];
            }
        }
    }

    BatchStats stats;
    stats.unique_tuples = jobs.size();
    for (const Job& job : jobs) {
        stats.factorizations += job.factorizations;
        stats.cold_columns += job.cold;
        stats.warm_columns += job.warm;
    }
    std::unique_lock lock(cache_mutex_);
    stats_ = stats;
    return result;
}

}  // namespace levin
