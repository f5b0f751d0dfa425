#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "gesmag/errors.hpp"
#include "gesmag/graph.hpp"
#include "gesmag/heads.hpp"

namespace gesmag {

/// Boost's distributions are specified to the bit, so a seed reproduces the same draws on any platform.
using Rng = boost::random::mt19937_64;

/// SplitMix64 finalizer, used to derive independent per-replication seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { Graph = 1, Coefficients = 2, Data = 3 };

inline Rng stream_rng(std::uint64_t seed, std::uint64_t replication, Stream s) {
    return Rng(mix_seed(mix_seed(mix_seed(seed) ^ replication) ^ static_cast<std::uint64_t>(s)));
}

struct SimConfig {
    int n = 5;
    double avg_degree = 3.0;
    double p_directed = 0.6;
    double coef_lo = 0.1;
    double coef_hi = 1.0;
    long n_rows = 5000;
    std::uint64_t seed = 1;
};

inline int target_edge_count(int n, double avg_degree) {
    return static_cast<int>(std::lround(n * avg_degree / 2.0));
}

/// Edge set of the target size drawn uniformly over pairs, oriented along a uniformly random
/// vertex order; each edge is directed with probability p_directed, bidirected otherwise.
inline MixedGraph random_admg(const SimConfig& cfg, Rng& rng) {
    if (cfg.n < 1 || cfg.n > kMaxVertices) throw DomainError("vertex count out of range");
    if (cfg.p_directed < 0.0 || cfg.p_directed > 1.0) throw DomainError("p_directed must lie in [0, 1]");
    const int m = target_edge_count(cfg.n, cfg.avg_degree);
    const int pairs = cfg.n * (cfg.n - 1) / 2;
    if (m < 0 || m > pairs) throw DomainError("requested average degree needs more edges than vertex pairs");

    auto shuffle = [&](auto& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(v[i - 1], v[pick(rng)]);
        }
    };
    std::vector<VertexId> order(static_cast<std::size_t>(cfg.n));
    std::iota(order.begin(), order.end(), 0);
    shuffle(order);
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < cfg.n; ++i) {
        for (int j = i + 1; j < cfg.n; ++j) slots.emplace_back(i, j);
    }
    shuffle(slots);

    boost::random::uniform_01<double> u01;
    MixedGraph g(cfg.n, GraphKind::Admg);
    for (int e = 0; e < m; ++e) {
        auto [i, j] = slots[static_cast<std::size_t>(e)];
        VertexId a = order[static_cast<std::size_t>(i)], b = order[static_cast<std::size_t>(j)];
        if (u01(rng) < cfg.p_directed) g.add_directed(a, b);
        else g.add_bidirected(a, b);
    }
    return g;
}

/// X = X·B + ε with ε ~ N(0, Ω); B(a, b) is the coefficient of a -> b.
struct LinearGaussianSem {
    MixedGraph graph;
    Eigen::MatrixXd b;
    Eigen::MatrixXd omega;

    int n() const { return graph.n(); }
    Eigen::MatrixXd covariance() const {
        Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n(), n()) - b;
        Eigen::MatrixXd inv = ib.inverse();
        return inv.transpose() * omega * inv;
    }
};

inline double signed_uniform(Rng& rng, double lo, double hi) {
    boost::random::uniform_01<double> u01;
    double mag = lo + (hi - lo) * u01(rng);
    return u01(rng) < 0.5 ? -mag : mag;
}

/// Coefficients on ±[lo, hi] for every edge. Ω is made diagonally dominant; should a factorization
/// still fail, the diagonal is inflated and retried a few times before giving up.
inline LinearGaussianSem random_sem(const MixedGraph& g, double lo, double hi, Rng& rng, int max_retries = 5) {
    require_no_circles(g);
    if (!is_acyclic(g)) throw DomainError("SEM needs an acyclic graph");
    if (!(lo > 0.0) || hi < lo) throw DomainError("coefficient range must satisfy 0 < lo <= hi");
    const int n = g.n();
    LinearGaussianSem sem{g, Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (const Edge& e : g.edges()) {
        double c = signed_uniform(rng, lo, hi);
        if (g.mark(e.a, e.b) == Mark::Arrow && g.mark(e.b, e.a) == Mark::Arrow) {
            sem.omega(e.a, e.b) = sem.omega(e.b, e.a) = c;
        } else if (g.mark(e.a, e.b) == Mark::Arrow) {
            sem.b(e.a, e.b) = c;
        } else {
            sem.b(e.b, e.a) = c;
        }
    }
    for (int a = 0; a < n; ++a) sem.omega(a, a) = 1.0 + sem.omega.row(a).cwiseAbs().sum();
    for (int attempt = 0;; ++attempt) {
        if (Eigen::LLT<Eigen::MatrixXd>(sem.omega).info() == Eigen::Success) return sem;
        if (attempt == max_retries) throw DegenerateData("could not make the error covariance positive definite");
        sem.omega.diagonal() *= 2.0;
    }
}

/// N rows drawn from N(0, (I−B)^{-T} Ω (I−B)^{-1}).
inline Eigen::MatrixXd sample_data(const LinearGaussianSem& sem, long n_rows, Rng& rng) {
    const int n = sem.n();
    Eigen::LLT<Eigen::MatrixXd> llt(sem.omega);
    if (llt.info() != Eigen::Success) throw DegenerateData("error covariance is not positive definite");
    Eigen::MatrixXd z(n_rows, n);
    boost::random::normal_distribution<double> normal;
    for (long r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n; ++c) z(r, c) = normal(rng);
    }
    Eigen::MatrixXd eps = z * llt.matrixU();
    Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) - sem.b;
    return ib.transpose().partialPivLu().solve(eps.transpose()).transpose();
}

/// One simulated replication: the generating ADMG, its MAG, the SEM and a dataset.
struct Replication {
    MixedGraph admg;
    MixedGraph mag;
    LinearGaussianSem sem;
    Eigen::MatrixXd data;
};

inline Replication simulate_replication(const SimConfig& cfg, std::uint64_t k) {
    Rng grng = stream_rng(cfg.seed, k, Stream::Graph);
    Rng crng = stream_rng(cfg.seed, k, Stream::Coefficients);
    Rng drng = stream_rng(cfg.seed, k, Stream::Data);
    MixedGraph admg = random_admg(cfg, grng);
    LinearGaussianSem sem = random_sem(admg, cfg.coef_lo, cfg.coef_hi, crng);
    Eigen::MatrixXd data = sample_data(sem, cfg.n_rows, drng);
    return {admg, project_to_mag(admg), std::move(sem), std::move(data)};
}

/// Distribution of the maximal head size over `reps` projected random graphs.
inline std::map<int, int> head_size_histogram(const SimConfig& cfg, int reps) {
    std::map<int, int> hist;
    for (int k = 0; k < reps; ++k) {
        Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(k), Stream::Graph);
        ++hist[max_head_size(project_to_mag(random_admg(cfg, rng)))];
    }
    return hist;
}

}  // namespace gesmag
