#pragma once

// Simulated annealing over QUBO models, an exhaustive oracle for small
// models, and selection policies over the resulting sample sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "ofisp/core.hpp"
#include "ofisp/qubo.hpp"

namespace ofisp {

/// Annealing parameters. Temperatures at or below zero are derived from the
/// model: t_init becomes the largest single-flip |delta| seen from a random
/// probe state and t_final becomes t_init / 1000. Cooling is geometric.
struct AnnealSchedule {
    int reads = 1000;
    int sweeps = 1000;
    double t_init = 0.0;
    double t_final = 0.0;
    std::uint64_t seed = 1;
};

struct Sample {
    Bits bits;
    double energy = 0.0;
    int count = 1;
};

/// Annealer output, sorted by ascending energy with deterministic
/// tie-breaking; identical states merge into one sample with a count.
struct SampleSet {
    std::vector<Sample> samples;

    bool empty() const { return samples.empty(); }
    const Sample& best() const {
        if (samples.empty()) throw std::logic_error("empty sample set");
        return samples.front();
    }
};

namespace detail {

// Neighbor lists with coupling strengths, for incremental flip deltas.
inline std::vector<std::vector<std::pair<int, double>>> adjacency(const QuboModel& m) {
    std::vector<std::vector<std::pair<int, double>>> adj(m.n_vars());
    for (const auto& [key, c] : m.quadratic) {
        if (c == 0.0) continue;
        adj[key.first].emplace_back(key.second, c);
        adj[key.second].emplace_back(key.first, c);
    }
    return adj;
}

// Energy change from flipping variable v in the given state.
inline double flip_delta(const QuboModel& m,
                         const std::vector<std::vector<std::pair<int, double>>>& adj,
                         const Bits& bits, int v) {
    double field = m.linear[v];
    for (const auto& [u, c] : adj[v])
        if (bits[u]) field += c;
    return bits[v] ? -field : field;
}

}  // namespace detail

/// Geometric interpolation from t_init down to t_final, one value per
/// sweep; non-increasing throughout.
inline std::vector<double> cooling_schedule(double t_init, double t_final, int sweeps) {
    std::vector<double> temperature(sweeps);
    const double ratio = t_final / t_init;
    for (int s = 0; s < sweeps; ++s) {
        const double frac = sweeps > 1 ? static_cast<double>(s) / (sweeps - 1) : 0.0;
        temperature[s] = t_init * std::pow(ratio, frac);
    }
    return temperature;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Compares bit patterns as unsigned integers (bit i has weight 2^i).
inline bool bits_less(const Bits& a, const Bits& b) {
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

}  // namespace detail

/// Runs `reads` independent Metropolis chains. Each chain starts from random
/// bits and performs `sweeps` passes; a pass proposes every variable once in
/// a freshly shuffled order and accepts a flip of delta d with probability
/// min(1, exp(-d / t)). Deltas come from the sparse adjacency of the flipped
/// variable only. Fully deterministic for a given seed.
inline SampleSet simulated_anneal(const QuboModel& model, const AnnealSchedule& sched) {
    if (model.n_vars() < 1) throw std::invalid_argument("cannot anneal an empty model");
    if (sched.reads < 1 || sched.sweeps < 1)
        throw std::invalid_argument("reads and sweeps must be at least 1");

    const int n = model.n_vars();
    const auto adj = detail::adjacency(model);

    double t_init = sched.t_init;
    if (t_init <= 0.0) {
        std::mt19937_64 rng(detail::mix_seed(sched.seed, 0xffffffffULL));
        Bits probe(n);
        for (int v = 0; v < n; ++v) probe[v] = static_cast<std::uint8_t>(rng() & 1u);
        for (int v = 0; v < n; ++v)
            t_init = std::max(t_init, std::abs(detail::flip_delta(model, adj, probe, v)));
        if (t_init <= 0.0) t_init = 1.0;
    }
    double t_final = sched.t_final;
    if (t_final <= 0.0) t_final = 1e-3 * t_init;
    if (!(t_init >= t_final) || !(t_final > 0.0))
        throw std::invalid_argument("schedule requires t_init >= t_final > 0");

    const std::vector<double> temperature = cooling_schedule(t_init, t_final, sched.sweeps);

    std::map<Bits, std::pair<double, int>> merged;  // bits -> (energy, count)
    std::vector<int> order(n);
    Bits bits(n);

    for (int read = 0; read < sched.reads; ++read) {
        std::mt19937_64 rng(detail::mix_seed(sched.seed, static_cast<std::uint64_t>(read)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        for (int v = 0; v < n; ++v) bits[v] = static_cast<std::uint8_t>(rng() & 1u);
        for (int v = 0; v < n; ++v) order[v] = v;

        for (int s = 0; s < sched.sweeps; ++s) {
            const double inv_t = 1.0 / temperature[s];
            std::shuffle(order.begin(), order.end(), rng);
            for (int v : order) {
                const double d = detail::flip_delta(model, adj, bits, v);
                if (d <= 0.0) {
                    bits[v] ^= 1u;
                    continue;
                }
                const double scaled = d * inv_t;
                const double u = unit(rng);
                // exp underflows past ~745; no representable u accepts there
                if (scaled < 745.0 && u < std::exp(-scaled)) bits[v] ^= 1u;
            }
        }
        auto [it, inserted] = merged.try_emplace(bits, 0.0, 0);
        if (inserted) it->second.first = energy(model, bits);  // exact, not accumulated
        it->second.second += 1;
    }

    SampleSet out;
    out.samples.reserve(merged.size());
    for (auto& [state, rec] : merged)
        out.samples.push_back(Sample{state, rec.first, rec.second});
    std::sort(out.samples.begin(), out.samples.end(), [](const Sample& a, const Sample& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return detail::bits_less(a.bits, b.bits);
    });
    return out;
}

/// Global minimum by exhaustive enumeration, guarded to 24 variables.
/// Ties resolve to the lowest bit pattern read as an unsigned integer.
inline std::pair<Bits, double> brute_force(const QuboModel& model) {
    const int n = model.n_vars();
    if (n > 24) throw std::invalid_argument("model too large for exhaustive search");
    if (n == 0) return {Bits{}, model.offset};

    const auto adj = detail::adjacency(model);
    Bits bits(n, 0);
    double running = energy(model, bits);
    Bits best_bits = bits;
    double best = running;

    // Gray-code walk: one flip per step, exact re-evaluation near the minimum.
    const std::uint64_t states = 1ULL << n;
    for (std::uint64_t u = 1; u < states; ++u) {
        const int v = __builtin_ctzll(u);
        running += detail::flip_delta(model, adj, bits, v);
        bits[v] ^= 1u;
        if (running <= best + 1e-9) {
            const double exact = energy(model, bits);
            if (exact < best || (exact == best && detail::bits_less(bits, best_bits))) {
                best = exact;
                best_bits = bits;
            }
        }
    }
    return {best_bits, best};
}

enum class SelectPolicy {
    MaxWeightFeasible,  // highest total weight among hard-feasible samples
    MinSoft,            // fewest soft violations, weight as tie-break
};

struct SelectedSolution {
    Selection selection;
    ViolationReport report;
    DecodedSample decoded;
    double energy = 0.0;
};

namespace detail {

// Hard feasibility of a decoded sample: occupancy within M everywhere, no
// job on several machines, no job on a machine outside its eligibility set.
inline bool hard_feasible(const Instance& inst, const DecodedSample& dec,
                          const ViolationReport& rep) {
    if (rep.hard_violations > 0) return false;
    if (dec.multi_assignment) return false;
    for (const auto& [job, machine] : dec.machine_pairs) {
        auto it = inst.eligibility.find(inst.jobs[job].id);
        if (it == inst.eligibility.end()) continue;
        bool ok = false;
        for (int r : it->second)
            if (r == machine) ok = true;
        if (!ok) return false;
    }
    return true;
}

}  // namespace detail

/// Applies a selection policy over the hard-feasible samples of a set.
/// Returns nothing when every sample is hard-infeasible. Deterministic:
/// samples are visited in sample-set order and replaced only on strict
/// improvement.
inline std::optional<SelectedSolution> select_solution(const SampleSet& samples,
                                                       const QuboModel& model,
                                                       const Instance& inst,
                                                       SelectPolicy policy) {
    std::optional<SelectedSolution> best;
    for (const Sample& s : samples.samples) {
        DecodedSample dec = decode(model, s.bits);
        ViolationReport rep = evaluate(inst, dec.selection);
        if (!detail::hard_feasible(inst, dec, rep)) continue;

        bool better = false;
        if (!best) {
            better = true;
        } else if (policy == SelectPolicy::MaxWeightFeasible) {
            better = rep.total_weight > best->report.total_weight;
        } else {
            better = rep.soft_violations < best->report.soft_violations ||
                     (rep.soft_violations == best->report.soft_violations &&
                      rep.total_weight > best->report.total_weight);
        }
        if (better) best = SelectedSolution{dec.selection, rep, dec, s.energy};
    }
    return best;
}

}  // namespace ofisp
