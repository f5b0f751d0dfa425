#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gesmag/errors.hpp"
#include "gesmag/graph.hpp"
#include "gesmag/imset.hpp"
#include "gesmag/pag.hpp"

namespace gesmag {

// ---------------------------------------------------------------------------------------------
// Edge-mark metrics

/// Matching endpoint marks on shared adjacencies over twice the number of adjacencies present in
/// either graph. Two empty graphs agree perfectly.
inline double edge_mark_accuracy(const MixedGraph& est, const MixedGraph& truth) {
    if (est.n() != truth.n()) throw DomainError("graphs have different vertex counts");
    long uni = 0, match = 0;
    for (VertexId a = 0; a < est.n(); ++a) {
        for (VertexId b = a + 1; b < est.n(); ++b) {
            bool ea = est.adjacent(a, b), ta = truth.adjacent(a, b);
            if (!ea && !ta) continue;
            ++uni;
            if (ea && ta) match += (est.mark(a, b) == truth.mark(a, b)) + (est.mark(b, a) == truth.mark(b, a));
        }
    }
    return uni == 0 ? 1.0 : static_cast<double>(match) / (2.0 * static_cast<double>(uni));
}

enum class EdgeType { Adjacency, Directed, Bidirected, PartiallyDirected, Nondirected };

inline constexpr std::array<EdgeType, 5> kEdgeTypes{EdgeType::Adjacency, EdgeType::Directed, EdgeType::Bidirected,
                                                    EdgeType::PartiallyDirected, EdgeType::Nondirected};

inline const char* edge_type_name(EdgeType t) {
    switch (t) {
        case EdgeType::Adjacency: return "adjacency";
        case EdgeType::Directed: return "->";
        case EdgeType::Bidirected: return "<->";
        case EdgeType::PartiallyDirected: return "o->";
        case EdgeType::Nondirected: return "o-o";
    }
    return "?";
}

/// Whether the ordered pair (a, b) carries an edge of type t, read from a towards b. The
/// asymmetric types count a -> b and b -> a as different items.
inline bool has_edge_type(const MixedGraph& g, VertexId a, VertexId b, EdgeType t) {
    if (!g.adjacent(a, b)) return false;
    Mark at_a = g.mark(b, a), at_b = g.mark(a, b);
    switch (t) {
        case EdgeType::Adjacency: return true;
        case EdgeType::Directed: return at_a == Mark::Tail && at_b == Mark::Arrow;
        case EdgeType::Bidirected: return at_a == Mark::Arrow && at_b == Mark::Arrow;
        case EdgeType::PartiallyDirected: return at_a == Mark::Circle && at_b == Mark::Arrow;
        case EdgeType::Nondirected: return at_a == Mark::Circle && at_b == Mark::Circle;
    }
    return false;
}

inline bool is_symmetric_type(EdgeType t) {
    return t == EdgeType::Adjacency || t == EdgeType::Bidirected || t == EdgeType::Nondirected;
}

struct Confusion {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    /// Undefined (empty) when the truth has no such edges.
    std::optional<double> tpr() const {
        if (tp + fn == 0) return std::nullopt;
        return static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    /// Undefined when every possible item of this type is present in the truth.
    std::optional<double> fpr() const {
        if (fp + tn == 0) return std::nullopt;
        return static_cast<double>(fp) / static_cast<double>(fp + tn);
    }
};

struct EdgeTypeRates {
    std::array<Confusion, 5> by_type;
    const Confusion& operator[](EdgeType t) const { return by_type[static_cast<std::size_t>(t)]; }
};

inline EdgeTypeRates edge_type_rates(const MixedGraph& est, const MixedGraph& truth) {
    if (est.n() != truth.n()) throw DomainError("graphs have different vertex counts");
    EdgeTypeRates r;
    for (EdgeType t : kEdgeTypes) {
        Confusion& c = r.by_type[static_cast<std::size_t>(t)];
        for (VertexId a = 0; a < est.n(); ++a) {
            for (VertexId b = 0; b < est.n(); ++b) {
                if (a == b || (is_symmetric_type(t) && b < a)) continue;
                bool e = has_edge_type(est, a, b, t), tr = has_edge_type(truth, a, b, t);
                if (e && tr) ++c.tp;
                else if (e) ++c.fp;
                else if (tr) ++c.fn;
                else ++c.tn;
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// Gaussian fitting

/// Σ = (I − B)^{-T} Ω (I − B)^{-1} with B(a, b) the coefficient of a -> b.
struct GaussianFit {
    Eigen::MatrixXd b;
    Eigen::MatrixXd omega;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    bool monotone = true;
    std::vector<double> trace;  // log-likelihood after every sweep

    Eigen::MatrixXd covariance() const {
        const auto n = b.rows();
        Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(n, n) - b).inverse();
        return inv.transpose() * omega * inv;
    }
};

/// Sample covariance with denominator N, the maximum-likelihood normalisation.
inline Eigen::MatrixXd mle_covariance(const Eigen::MatrixXd& data) {
    const double n = static_cast<double>(data.rows());
    return sample_covariance(data) * ((n - 1.0) / n);
}

/// Gaussian log-likelihood of N rows with MLE covariance s under model covariance sigma.
inline double gaussian_loglik(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s, long n_rows) {
    const double p = static_cast<double>(sigma.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw DegenerateData("model covariance is not positive definite");
    double tr = llt.solve(s).trace();
    return -0.5 * static_cast<double>(n_rows) * (p * std::log(2.0 * std::numbers::pi) + log_det_spd(sigma) + tr);
}

struct RicfOptions {
    double tol = 1e-8;
    int max_iter = 500;
    double monotone_slack = 1e-7;  // relative drop tolerated before a sweep counts as a decrease
};

/// Residual iterative conditional fitting. Each step regresses one vertex on its parents and on the
/// pseudo-variables of its siblings (their residuals whitened by the current Ω of the others), which
/// is the exact conditional maximisation for that vertex's parameters.
inline GaussianFit ricf_fit(const MixedGraph& g, const Eigen::MatrixXd& s, long n_rows, const RicfOptions& opt = {}) {
    require_no_circles(g);
    const int n = g.n();
    if (s.rows() != n || s.cols() != n) throw DomainError("covariance does not match the graph");
    if (!is_acyclic(g)) throw DomainError("fitting needs an acyclic graph");
    GaussianFit fit;
    fit.b = Eigen::MatrixXd::Zero(n, n);
    fit.omega = s.diagonal().asDiagonal();
    fit.loglik = gaussian_loglik(fit.covariance(), s, n_rows);
    fit.trace.push_back(fit.loglik);

    std::vector<std::vector<VertexId>> pa(n), sp(n), others(n);
    for (VertexId v = 0; v < n; ++v) {
        pa[v] = g.parents(v).to_vector();
        sp[v] = g.siblings(v).to_vector();
        others[v] = VertexSet::range(n).without(v).to_vector();
    }
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    for (fit.iterations = 1; fit.iterations <= opt.max_iter; ++fit.iterations) {
        double change = 0.0;
        for (VertexId i = 0; i < n; ++i) {
            const auto np = static_cast<Eigen::Index>(pa[i].size());
            const auto ns = static_cast<Eigen::Index>(sp[i].size());
            if (np + ns == 0) {
                change = std::max(change, std::abs(fit.omega(i, i) - s(i, i)));
                fit.omega(i, i) = s(i, i);
                continue;
            }
            // Rows of M map X to the regressors: parents directly, siblings through Ω_{-i,-i}^{-1} ε_{-i}.
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np + ns, n);
            for (Eigen::Index q = 0; q < np; ++q) m(q, pa[i][q]) = 1.0;
            Eigen::MatrixXd om_inv;
            if (ns > 0) {
                const auto& o = others[i];
                const auto k = static_cast<Eigen::Index>(o.size());
                Eigen::MatrixXd om(k, k), resid(k, n);
                for (Eigen::Index r = 0; r < k; ++r) {
                    for (Eigen::Index c = 0; c < k; ++c) om(r, c) = fit.omega(o[r], o[c]);
                    // ε_v = X_v − Σ_u B(u, v) X_u
                    resid.row(r) = eye.row(o[r]) - fit.b.col(o[r]).transpose();
                }
                om_inv = om.inverse();
                Eigen::MatrixXd z = om_inv * resid;
                for (Eigen::Index q = 0; q < ns; ++q) {
                    auto pos = std::find(o.begin(), o.end(), sp[i][q]) - o.begin();
                    m.row(np + q) = z.row(pos);
                }
            }
            Eigen::MatrixXd msm = m * s * m.transpose();
            Eigen::VectorXd msi = m * s.col(i);
            Eigen::VectorXd coef = msm.ldlt().solve(msi);
            double resid_var = s(i, i) - coef.dot(msi);
            for (Eigen::Index q = 0; q < np; ++q) {
                change = std::max(change, std::abs(fit.b(pa[i][q], i) - coef(q)));
                fit.b(pa[i][q], i) = coef(q);
            }
            double extra = 0.0;
            if (ns > 0) {
                const auto& o = others[i];
                Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(o.size()));
                for (Eigen::Index q = 0; q < ns; ++q) {
                    VertexId v = sp[i][q];
                    change = std::max(change, std::abs(fit.omega(i, v) - coef(np + q)));
                    fit.omega(i, v) = fit.omega(v, i) = coef(np + q);
                    w(std::find(o.begin(), o.end(), v) - o.begin()) = coef(np + q);
                }
                extra = w.dot(om_inv * w);
            }
            double new_ii = resid_var + extra;
            change = std::max(change, std::abs(fit.omega(i, i) - new_ii));
            fit.omega(i, i) = new_ii;
        }
        double ll = gaussian_loglik(fit.covariance(), s, n_rows);
        if (ll < fit.loglik - opt.monotone_slack * (1.0 + std::abs(fit.loglik))) fit.monotone = false;
        fit.loglik = ll;
        fit.trace.push_back(ll);
        if (change < opt.tol) {
            fit.converged = true;
            break;
        }
    }
    if (fit.iterations > opt.max_iter) fit.iterations = opt.max_iter;
    return fit;
}

inline GaussianFit ricf_fit(const MixedGraph& g, const Eigen::MatrixXd& data, const RicfOptions& opt = {}) {
    return ricf_fit(g, mle_covariance(data), data.rows(), opt);
}

/// Sum over vertices of the Gaussian regression log-likelihood of each vertex on its parents;
/// the closed-form maximum for a DAG.
inline double dag_regression_loglik(const MixedGraph& g, const Eigen::MatrixXd& s, long n_rows) {
    double ll = 0.0;
    for (VertexId v = 0; v < g.n(); ++v) {
        VertexSet pa = g.parents(v);
        double var = s(v, v);
        if (!pa.empty()) {
            Eigen::MatrixXd spp = submatrix(s, pa);
            std::vector<VertexId> idx = pa.to_vector();
            Eigen::VectorXd spv(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t q = 0; q < idx.size(); ++q) spv(static_cast<Eigen::Index>(q)) = s(idx[q], v);
            var -= spv.dot(spp.ldlt().solve(spv));
        }
        ll += -0.5 * static_cast<double>(n_rows) * (std::log(2.0 * std::numbers::pi * var) + 1.0);
    }
    return ll;
}

/// −2·loglik + d·log N, with a representative MAG for partial graphs.
inline double bic(const MixedGraph& g, const Eigen::MatrixXd& data, DimensionKind dim = DimensionKind::Gaussian) {
    MixedGraph m = g.has_circles() ? pag_to_mag(g) : g;
    GaussianFit fit = ricf_fit(m, data);
    return -2.0 * fit.loglik + static_cast<double>(model_dimension(m, dim)) * std::log(static_cast<double>(data.rows()));
}

/// sign(Δ)·log(|Δ| + 1) with Δ = BIC(est) − BIC(truth): positive when the estimate is worse.
inline double log_bic_diff(double bic_est, double bic_truth) {
    double d = bic_est - bic_truth;
    return std::copysign(std::log1p(std::abs(d)), d);
}

inline double bic_diff(const MixedGraph& est, const MixedGraph& truth, const Eigen::MatrixXd& data,
                       DimensionKind dim = DimensionKind::Gaussian) {
    MixedGraph t = truth;
    if (!t.has_circles() && !is_mag(t)) t = project_to_mag(t);
    return log_bic_diff(bic(est, data, dim), bic(t, data, dim));
}

struct MetricReport {
    double accuracy = 0.0;
    EdgeTypeRates rates;
    std::optional<double> log_bic_diff;
    double seconds = 0.0;
};

/// est and truth are compared as PAGs; truth may be an ADMG, MAG or PAG.
inline MetricReport evaluate(const MixedGraph& est, const MixedGraph& truth, const Eigen::MatrixXd* data = nullptr,
                             DimensionKind dim = DimensionKind::Gaussian) {
    auto as_pag = [](const MixedGraph& g) {
        if (g.has_circles()) return g;
        return mag_to_pag(is_mag(g) ? g : project_to_mag(g), true);
    };
    MixedGraph e = as_pag(est), t = as_pag(truth);
    MetricReport r;
    r.accuracy = edge_mark_accuracy(e, t);
    r.rates = edge_type_rates(e, t);
    if (data) r.log_bic_diff = bic_diff(est, truth, *data, dim);
    return r;
}

}  // namespace gesmag
