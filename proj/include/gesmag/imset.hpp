#pragma once

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>

#include "gesmag/errors.hpp"
#include "gesmag/heads.hpp"
#include "gesmag/markov.hpp"

namespace gesmag {

/// Sparse integer-valued function on subsets of the vertex set. Zero entries are never stored.
class Imset {
public:
    Imset() = default;

    void add(VertexSet s, int coef) {
        if (coef == 0) return;
        auto [it, fresh] = terms_.try_emplace(s, coef);
        if (!fresh) {
            it->second += coef;
            if (it->second == 0) terms_.erase(it);
        }
    }
    Imset& operator+=(const Imset& o) {
        for (auto [s, c] : o.terms_) add(s, c);
        return *this;
    }
    int operator[](VertexSet s) const {
        auto it = terms_.find(s);
        return it == terms_.end() ? 0 : it->second;
    }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::map<VertexSet, int>& terms() const { return terms_; }
    bool operator==(const Imset&) const = default;

private:
    std::map<VertexSet, int> terms_;
};

/// δ_{ABC} − δ_{AC} − δ_{BC} + δ_C, or zero when A or B is empty.
inline Imset semi_elementary_imset(const CIStatement& t) {
    Imset u;
    if (t.is_null()) return u;
    u.add(t.a | t.b | t.c, 1);
    u.add(t.a | t.c, -1);
    u.add(t.b | t.c, -1);
    u.add(t.c, 1);
    return u;
}

inline Imset imset_from_ci_list(const std::vector<CIStatement>& cis) {
    Imset u;
    for (const auto& ci : cis) u += semi_elementary_imset(ci);
    return u;
}

enum class Estimator { Plugin, Debiased };

inline const char* estimator_name(Estimator e) { return e == Estimator::Plugin ? "plugin" : "debiased"; }

/// Sample covariance with denominator N - 1. Rows are observations.
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
    const Eigen::Index n = data.rows();
    if (n < 2) throw InsufficientSample("need at least two rows to estimate a covariance");
    Eigen::MatrixXd centred = data.rowwise() - data.colwise().mean();
    return (centred.transpose() * centred) / static_cast<double>(n - 1);
}

/// Restriction of a square matrix to the rows and columns in s, in ascending vertex order.
inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, VertexSet s) {
    std::vector<VertexId> idx = s.to_vector();
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) out(r, c) = m(idx[r], idx[c]);
    }
    return out;
}

/// log det of a symmetric matrix through its Cholesky factor. A pivot that is non-positive, or
/// zero up to rounding relative to its diagonal entry, is reported as degenerate data.
inline double log_det_spd(const Eigen::MatrixXd& m, double rel_tol = 1e-12) {
    if (m.rows() == 0) return 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw DegenerateData("covariance is not positive definite");
    double out = 0.0;
    const Eigen::MatrixXd& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double pivot = l(i, i);
        if (!std::isfinite(pivot) || !(pivot * pivot > rel_tol * m(i, i))) {
            throw DegenerateData("non-positive pivot in covariance factorization");
        }
        out += 2.0 * std::log(pivot);
    }
    return out;
}

/// Entropy of a p-variate Gaussian with covariance determinant exp(log_det), in nats.
inline double gaussian_entropy(int p, double log_det) {
    return 0.5 * (p * std::log(2.0 * std::numbers::pi * std::numbers::e) + log_det);
}

/// Expected value of log det Σ̂ − log det Σ for a p-dimensional sample covariance on N rows.
/// (N−1)Σ̂ is Wishart with N−1 degrees of freedom, whose log-determinant has a digamma-sum mean.
inline double log_det_bias(int p, long n) {
    double b = p * std::log(2.0 / static_cast<double>(n - 1));
    for (int j = 1; j <= p; ++j) b += boost::math::digamma(static_cast<double>(n - j) / 2.0);
    return b;
}

/// Memoized Gaussian entropy estimates for subsets of the data columns.
/// Safe for concurrent use: readers share a lock, and the first committed value for a subset wins.
class EntropyCache {
public:
    EntropyCache(const Eigen::MatrixXd& data, Estimator est = Estimator::Plugin)
        : cov_(sample_covariance(data)), n_rows_(data.rows()), est_(est) {}

    /// Entropies of a known covariance, treated as if estimated from n_rows samples (only the
    /// score's N factors use n_rows). The estimator is fixed to plug-in, so values are exact.
    static EntropyCache from_covariance(const Eigen::MatrixXd& cov, long n_rows) {
        return EntropyCache(cov, n_rows, Estimator::Plugin);
    }

    double entropy(VertexSet s) const {
        if (s.empty()) return 0.0;
        {
            std::shared_lock lock(mutex_);
            auto it = values_.find(s);
            if (it != values_.end()) {
                hits_.fetch_add(1, std::memory_order_relaxed);
                return it->second;
            }
        }
        double v = compute(s);
        std::unique_lock lock(mutex_);
        auto [it, fresh] = values_.try_emplace(s, v);
        if (fresh) misses_.fetch_add(1, std::memory_order_relaxed);
        return it->second;
    }

    /// Î(A;B|C) = Ĥ(AC) + Ĥ(BC) − Ĥ(ABC) − Ĥ(C).
    double mutual_information(const CIStatement& t) const {
        if (t.is_null()) return 0.0;
        return entropy(t.a | t.c) + entropy(t.b | t.c) - entropy(t.a | t.b | t.c) - entropy(t.c);
    }

    int n_vars() const { return static_cast<int>(cov_.rows()); }
    long n_rows() const { return n_rows_; }
    Estimator estimator() const { return est_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    /// Number of distinct subsets whose entropy has been computed.
    long misses() const { return misses_.load(); }
    long hits() const { return hits_.load(); }
    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return values_.size();
    }

private:
    EntropyCache(const Eigen::MatrixXd& cov, long n_rows, Estimator est) : cov_(cov), n_rows_(n_rows), est_(est) {}

    double compute(VertexSet s) const {
        const int p = s.size();
        if (s.max() >= n_vars()) throw DomainError("entropy requested for a vertex outside the data");
        if (n_rows_ <= p + 1) {
            throw InsufficientSample("need more than " + std::to_string(p + 1) + " rows for a " + std::to_string(p) +
                                     "-variable entropy");
        }
        double ld = log_det_spd(submatrix(cov_, s));
        if (est_ == Estimator::Debiased) ld -= log_det_bias(p, n_rows_);
        return gaussian_entropy(p, ld);
    }

    Eigen::MatrixXd cov_;
    long n_rows_;
    Estimator est_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<VertexSet, double> values_;
    mutable std::atomic<long> misses_{0};
    mutable std::atomic<long> hits_{0};
};

/// Σ_A u(A)·Ĥ(A), touching only the subsets with nonzero coefficient.
inline double inner_product(const Imset& u, const EntropyCache& cache) {
    double s = 0.0;
    for (auto [set, coef] : u.terms()) s += coef * cache.entropy(set);
    return s;
}

enum class DimensionKind { Gaussian, ParametrizingSetSize };

inline const char* dimension_name(DimensionKind d) { return d == DimensionKind::Gaussian ? "gaussian" : "pset"; }

inline long model_dimension(const MixedGraph& g, DimensionKind kind) {
    if (kind == DimensionKind::Gaussian) return g.n() + static_cast<long>(g.edges().size());
    return static_cast<long>(parametrizing_set(g).size());
}

struct ScoreReport {
    double total = 0.0;
    double saturated = 0.0;  // 2N·Ĥ(V)
    double penalty = 0.0;    // 2N·Σ Î over the CI list
    long dimension = 0;
    long n_rows = 0;
    std::vector<CIStatement> cis;
    std::vector<double> mutual_informations;

    double complexity() const { return static_cast<double>(dimension) * std::log(static_cast<double>(n_rows)); }
};

struct ScoreOptions {
    PropertyKind property = PropertyKind::Refined;
    DimensionKind dimension = DimensionKind::Gaussian;
};

/// Penalized score of a MAG; lower is better. Every listed independence the data contradicts
/// adds 2N times its estimated conditional mutual information.
inline ScoreReport score_mag(const MixedGraph& g, const VertexOrder& order, const EntropyCache& cache,
                             const ScoreOptions& opt = {}) {
    if (g.n() != cache.n_vars()) throw DomainError("graph and data disagree on the number of variables");
    ScoreReport r;
    r.n_rows = cache.n_rows();
    const double two_n = 2.0 * static_cast<double>(r.n_rows);
    r.saturated = two_n * cache.entropy(g.vertices());
    r.cis = markov_property(g, order, opt.property);
    double sum = 0.0;
    for (const auto& ci : r.cis) {
        double mi = cache.mutual_information(ci);
        r.mutual_informations.push_back(mi);
        sum += mi;
    }
    r.penalty = two_n * sum;
    r.dimension = model_dimension(g, opt.dimension);
    r.total = r.saturated + r.penalty + r.complexity();
    return r;
}

inline ScoreReport score_mag(const MixedGraph& g, const EntropyCache& cache, const ScoreOptions& opt = {}) {
    return score_mag(g, VertexOrder::of(g), cache, opt);
}

}  // namespace gesmag
