#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gesmag/imset.hpp"
#include "gesmag/markov.hpp"
#include "gesmag/moves.hpp"
#include "gesmag/pag.hpp"
#include "gesmag/simulate.hpp"

namespace gesmag {

enum class Phase { Add, Delete, Turn };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Add: return "add";
        case Phase::Delete: return "delete";
        case Phase::Turn: return "turn";
    }
    return "?";
}

struct SearchConfig {
    std::optional<int> max_head_size;
    int turn_budget = 0;  // 0 disables the turning phase
    ScoreOptions score;
    std::optional<MixedGraph> skeleton;  // add moves only between vertices adjacent here
    std::optional<MixedGraph> start;     // arrow-complete PAG to start from instead of the empty graph
    MoveConfig moves;
    int max_sweeps = 10000;
    int max_cycles = 100;
    int jobs = 1;
};

enum class EventKind { Accept, HeadSizeReject, BranchCap, PathCap, IterationCap };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Accept: return "accept";
        case EventKind::HeadSizeReject: return "head-size-reject";
        case EventKind::BranchCap: return "branch-cap";
        case EventKind::PathCap: return "path-cap";
        case EventKind::IterationCap: return "iteration-cap";
    }
    return "?";
}

struct SearchEvent {
    Phase phase;
    int sweep;
    EventKind kind;
    VertexId i = -1;
    VertexId j = -1;
    double score = 0.0;
    long count = 0;
};

struct PhaseCounters {
    long sweeps = 0;
    long accepted = 0;
    long proposals = 0;
};

struct SearchCounters {
    std::map<Phase, PhaseCounters> phases;
    long cycles = 0;
    long score_calls = 0;      // score_mag invocations
    long distinct_mecs = 0;    // distinct candidate classes seen
    long head_rejections = 0;
    long branch_cap_events = 0;
    bool iteration_cap_hit = false;
    MoveStats moves;
};

struct SearchResult {
    MixedGraph pag;         // tails oriented
    MixedGraph arrow_pag;   // arrow complete
    MixedGraph mag;         // representative that was scored
    ScoreReport score;
    std::vector<double> trajectory;  // accepted scores, starting with the empty graph
    std::vector<SearchEvent> events;
    SearchCounters counters;
    double seconds = 0.0;
};

/// Search state plus the phase machinery. gesmag_search drives it to completion; step() runs a
/// single sweep for callers that schedule phases themselves.
class Searcher {
public:
    Searcher(const EntropyCache& cache, const SearchConfig& cfg) : cache_(cache), cfg_(cfg) {}

    /// Validates the inputs and scores the starting class.
    void init() {
        const int n = cache_.n_vars();
        if (cache_.n_rows() <= n + 2) throw InsufficientSample("search needs more than n + 2 rows");
        if (cfg_.max_head_size && *cfg_.max_head_size < 1) throw DomainError("max head size must be at least 1");
        if (cfg_.turn_budget < 0) throw DomainError("turn budget must be non-negative");
        if (cfg_.skeleton && cfg_.skeleton->n() != n) throw DomainError("skeleton restriction has the wrong vertex count");
        cache_.entropy(VertexSet::range(n));  // surfaces degenerate data before any move

        if (cfg_.start) {
            if (cfg_.start->n() != n) throw DomainError("start graph has the wrong vertex count");
            auto rep = validated_representative(*cfg_.start);
            if (!rep) throw InvalidMec("start graph is not a valid arrow-complete PAG");
            pag_ = *cfg_.start;
            mag_ = *rep;
        } else {
            pag_ = MixedGraph(n, GraphKind::Pag);
            mag_ = MixedGraph(n, GraphKind::Mag);
        }
        report_ = score_mag(mag_, cache_, cfg_.score);
        ++res_.counters.score_calls;
        memo_[pag_.raw_marks()] = report_.total;
        res_.trajectory.push_back(report_.total);
        t0_ = std::chrono::steady_clock::now();
    }

    SearchResult run() {
        init();
        bool changed = true;
        while (changed && res_.counters.cycles < cfg_.max_cycles) {
            ++res_.counters.cycles;
            changed = false;
            changed |= run_phase(Phase::Add);
            changed |= run_phase(Phase::Delete);
            if (cfg_.turn_budget > 0) changed |= run_phase(Phase::Turn);
        }
        if (changed) cap_breach(Phase::Turn);
        return finish();
    }

    /// One sweep of a single phase; true when a better class was accepted.
    bool step(Phase ph) {
        ++sweeps_;
        return sweep(ph);
    }

    SearchResult finish() {
        res_.arrow_pag = pag_;
        res_.mag = mag_;
        res_.pag = mag_to_pag(mag_, true);
        res_.score = report_;
        res_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        return std::move(res_);
    }

    const MixedGraph& pag() const { return pag_; }
    const ScoreReport& report() const { return report_; }

private:
    bool run_phase(Phase ph) {
        bool any = false;
        while (true) {
            if (sweeps_ >= cfg_.max_sweeps) {
                cap_breach(ph);
                return any;
            }
            ++sweeps_;
            if (!sweep(ph)) return any;
            any = true;
        }
    }

    void cap_breach(Phase ph) {
        if (res_.counters.iteration_cap_hit) return;
        res_.counters.iteration_cap_hit = true;
        res_.events.push_back({ph, sweeps_, EventKind::IterationCap, -1, -1, report_.total, 0});
    }

    std::vector<MoveProposal> proposals(Phase ph, MoveStats& stats) {
        std::vector<MoveProposal> out;
        auto take = [&](std::vector<MoveProposal>&& ps) {
            for (auto& p : ps) out.push_back(std::move(p));
        };
        const int n = pag_.n();
        if (ph == Phase::Turn) {
            take(turning_moves(pag_, cfg_.turn_budget, cfg_.moves, &stats));
            return out;
        }
        for (VertexId i = 0; i < n; ++i) {
            for (VertexId j = i + 1; j < n; ++j) {
                if (ph == Phase::Add) {
                    if (pag_.adjacent(i, j)) continue;
                    if (cfg_.skeleton && !cfg_.skeleton->adjacent(i, j)) continue;
                    take(add_adjacency(pag_, mag_, i, j, cfg_.moves, &stats));
                } else {
                    if (!pag_.adjacent(i, j)) continue;
                    take(delete_adjacency(pag_, mag_, i, j, cfg_.moves, &stats));
                }
            }
        }
        return out;
    }

    /// Scores every distinct proposal once, possibly across threads; returns whether one was accepted.
    bool sweep(Phase ph) {
        MoveStats stats;
        std::vector<MoveProposal> props = proposals(ph, stats);
        auto& pc = res_.counters.phases[ph];
        ++pc.sweeps;
        pc.proposals += static_cast<long>(props.size());
        res_.counters.moves += stats;
        if (stats.truncated > 0) {
            ++res_.counters.branch_cap_events;
            res_.events.push_back({ph, sweeps_, EventKind::BranchCap, -1, -1, report_.total, static_cast<long>(stats.truncated)});
        }
        if (stats.path_cap_hit) res_.events.push_back({ph, sweeps_, EventKind::PathCap, -1, -1, report_.total, 0});

        // Unique classes in proposal order; classes seen in earlier sweeps reuse their score.
        std::vector<std::size_t> fresh;
        std::map<std::vector<Mark>, std::size_t> first;
        std::vector<std::optional<double>> scores(props.size());
        for (std::size_t k = 0; k < props.size(); ++k) {
            auto key = props[k].pag.raw_marks();
            if (!first.emplace(key, k).second) continue;
            auto it = memo_.find(key);
            if (it != memo_.end()) {
                scores[k] = it->second;
            } else {
                fresh.push_back(k);
            }
        }
        std::vector<std::optional<ScoreReport>> reports(props.size());
        auto work = [&](std::size_t from, std::size_t step) {
            for (std::size_t q = from; q < fresh.size(); q += step) {
                std::size_t k = fresh[q];
                const MixedGraph& g = props[k].mag;
                if (cfg_.max_head_size && !max_head_size_within(g, *cfg_.max_head_size)) continue;
                reports[k] = score_mag(g, cache_, cfg_.score);
            }
        };
        const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg_.jobs));
        if (jobs == 1 || fresh.size() < 2) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
            for (auto& th : pool) th.join();
        }
        for (std::size_t k : fresh) {
            auto key = props[k].pag.raw_marks();
            ++res_.counters.distinct_mecs;
            if (reports[k]) {
                ++res_.counters.score_calls;
                scores[k] = reports[k]->total;
                memo_[key] = reports[k]->total;
            } else {
                ++res_.counters.head_rejections;
                memo_[key] = std::numeric_limits<double>::infinity();
                res_.events.push_back({ph, sweeps_, EventKind::HeadSizeReject, props[k].i, props[k].j, 0.0, 0});
            }
        }

        std::optional<std::size_t> best;
        double best_score = report_.total;
        for (std::size_t k = 0; k < props.size(); ++k) {
            if (scores[k] && *scores[k] < best_score) {
                best_score = *scores[k];
                best = k;
            }
        }
        if (!best) return false;
        MoveProposal& win = props[*best];
        pag_ = win.pag;
        mag_ = win.mag;
        report_ = reports[*best] ? *reports[*best] : score_mag(mag_, cache_, cfg_.score);
        ++pc.accepted;
        res_.trajectory.push_back(report_.total);
        res_.events.push_back({ph, sweeps_, EventKind::Accept, win.i, win.j, report_.total, 0});
        return true;
    }

    const EntropyCache& cache_;
    const SearchConfig& cfg_;
    MixedGraph pag_{0};
    MixedGraph mag_{0};
    ScoreReport report_;
    std::map<std::vector<Mark>, double> memo_;
    int sweeps_ = 0;
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
    SearchResult res_{MixedGraph(0), MixedGraph(0), MixedGraph(0), {}, {}, {}, {}, 0.0};
};

/// Greedy search over equivalence classes: add, delete and (optionally) turning phases, each run
/// to a local optimum taking the best strictly improving class per sweep, repeated until a full
/// cycle changes nothing. Lower scores are better.
inline SearchResult gesmag_search(const EntropyCache& cache, const SearchConfig& cfg = {}) {
    return Searcher(cache, cfg).run();
}

struct ProbeRow {
    int n = 0;
    int reps = 0;
    double seconds = 0.0;         // mean per replication
    double add_delete_moves = 0;  // mean proposals generated in add and delete phases
    double score_calls = 0;
};

/// Runs the search on simulated data of growing size with the caps in cfg held fixed.
inline std::vector<ProbeRow> complexity_probe(const SearchConfig& cfg, SimConfig sim, const std::vector<int>& sizes, int reps) {
    std::vector<ProbeRow> rows;
    const double degree = sim.avg_degree;
    for (int n : sizes) {
        sim.n = n;
        sim.avg_degree = std::min(degree, static_cast<double>(n - 1));  // small n cannot reach the requested degree
        ProbeRow row{n, reps, 0.0, 0.0, 0.0};
        for (int k = 0; k < reps; ++k) {
            Replication r = simulate_replication(sim, static_cast<std::uint64_t>(k));
            EntropyCache cache(r.data);
            SearchResult res = gesmag_search(cache, cfg);
            row.seconds += res.seconds;
            row.add_delete_moves += static_cast<double>(res.counters.phases[Phase::Add].proposals +
                                                        res.counters.phases[Phase::Delete].proposals);
            row.score_calls += static_cast<double>(res.counters.score_calls);
        }
        row.seconds /= reps;
        row.add_delete_moves /= reps;
        row.score_calls /= reps;
        rows.push_back(row);
    }
    return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t m = x.size();
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < m; ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < m; ++k) {
        sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
        sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
    }
    return sxy / sxx;
}

}  // namespace gesmag
