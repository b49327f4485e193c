#pragma once

// Compilation of scheduling instances to quadratic pseudo-Boolean models.
//
// The min-idle encoding turns the occupancy constraints into penalty terms:
// for every time slot k the hard bound (at most M running jobs) becomes an
// equality with a binary-expanded slack, and the idle-time goal (exactly M
// running jobs) becomes a soft quadratic penalty. Models are strict
// minimizations; job weights enter negated.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ofisp/core.hpp"

namespace ofisp {

using Bits = std::vector<std::uint8_t>;   // 0/1 per variable
using Spins = std::vector<std::int8_t>;   // -1/+1 per variable

/// Penalty weights for the constraint terms. p1 guards the hard occupancy
/// bound, p2 the soft idle-time equality, p_pair mutual exclusions, and
/// p_elig ineligible machine assignments. Requires p1 > p2 >= 0.
struct PenaltyConfig {
    double p1 = 0.0;
    double p2 = 0.0;
    double p_pair = 0.0;
    double p_elig = 0.0;

    void check() const {
        if (!(p1 > p2)) throw std::invalid_argument("penalty config requires p1 > p2");
        if (p2 < 0.0) throw std::invalid_argument("penalty config requires p2 >= 0");
        if (p_pair <= 0.0 || p_elig <= 0.0)
            throw std::invalid_argument("pair and eligibility penalties must be positive");
    }
};

/// Default penalties sized from the instance: one hard violation always
/// costs more than the entire achievable weight, and the summed soft
/// penalties of any feasible state stay below a single hard penalty.
inline PenaltyConfig default_penalties(const Instance& inst) {
    if (inst.jobs.empty()) throw std::invalid_argument("cannot derive penalties for an empty instance");
    if (inst.horizon < 1) throw std::invalid_argument("instance horizon must be positive");
    const double w_max = inst.total_weight();
    const double slots = static_cast<double>(inst.horizon);
    const double m = static_cast<double>(inst.machines);
    PenaltyConfig pen;
    pen.p1 = 2.0 * (w_max + 1.0);
    pen.p2 = (w_max + 1.0) / (slots * m * m);
    pen.p_pair = pen.p1;
    pen.p_elig = pen.p1;
    return pen;
}

/// Positive coefficients c_1..c_L whose subset sums realize exactly
/// {0, ..., bound}: powers of two with the last coefficient clamped.
inline std::vector<int> slack_binary_expansion(int bound) {
    if (bound < 0) throw std::invalid_argument("slack bound must be nonnegative");
    std::vector<int> coeffs;
    if (bound == 0) return coeffs;
    int covered = 0;  // subset sums so far realize {0..covered}
    while (covered < bound) {
        int next = std::min(covered + 1, bound - covered);
        coeffs.push_back(next);
        covered += next;
    }
    return coeffs;
}

/// Slack bits attached to one time slot.
struct SlackBlock {
    int slot = 0;
    int bound = 0;              // slack realizes {0..bound}
    int first_var = 0;          // variable index of the first bit
    std::vector<int> coeffs;    // one positive coefficient per bit
};

/// Maps model variables back to their roles: the first n_jobs *
/// machines_per_job variables are decision bits (job-major, machine-minor),
/// the rest slack bits in slot-major, bit-minor order.
struct VariableRegistry {
    int n_jobs = 0;
    int machines_per_job = 1;  // 1 for identical machines, M for the x_ij encoding
    std::vector<SlackBlock> slack_blocks;

    int n_decision() const { return n_jobs * machines_per_job; }

    int n_slack() const {
        int n = 0;
        for (const auto& b : slack_blocks) n += static_cast<int>(b.coeffs.size());
        return n;
    }

    int n_total() const { return n_decision() + n_slack(); }

    int decision_var(int job, int machine = 0) const {
        return job * machines_per_job + machine;
    }
};

/// Sparse quadratic pseudo-Boolean model: offset + sum of linear terms +
/// sum of quadratic terms over distinct variable pairs. Squares fold into
/// linear coefficients at build time (x^2 = x).
struct QuboModel {
    std::vector<double> linear;
    std::map<std::pair<int, int>, double> quadratic;  // keys (i, j) with i < j
    double offset = 0.0;
    VariableRegistry registry;

    int n_vars() const { return static_cast<int>(linear.size()); }

    void resize(int n) { linear.assign(n, 0.0); }

    void add_linear(int v, double c) {
        if (v < 0 || v >= n_vars()) throw std::out_of_range("unknown variable");
        linear[v] += c;
    }

    void add_quadratic(int u, int v, double c) {
        if (u < 0 || u >= n_vars() || v < 0 || v >= n_vars())
            throw std::out_of_range("unknown variable");
        if (u == v) {
            linear[u] += c;
            return;
        }
        quadratic[{std::min(u, v), std::max(u, v)}] += c;
    }

    int n_terms() const {
        int n = 0;
        for (double c : linear)
            if (c != 0.0) ++n;
        for (const auto& [k, c] : quadratic)
            if (c != 0.0) ++n;
        return n;
    }
};

inline double energy(const QuboModel& m, const Bits& bits) {
    if (static_cast<int>(bits.size()) != m.n_vars())
        throw std::invalid_argument("bit vector length does not match model");
    double e = m.offset;
    for (int v = 0; v < m.n_vars(); ++v)
        if (bits[v]) e += m.linear[v];
    for (const auto& [key, c] : m.quadratic)
        if (bits[key.first] && bits[key.second]) e += c;
    return e;
}

/// Spin formulation with fields h and couplings J, related to the QUBO by
/// x_i <-> (1 - s_i) / 2. Energies agree exactly on corresponding states.
struct IsingModel {
    std::map<int, double> h;
    std::map<std::pair<int, int>, double> coupling;
    double offset = 0.0;
};

inline IsingModel to_ising(const QuboModel& m) {
    IsingModel ising;
    ising.offset = m.offset;
    for (int v = 0; v < m.n_vars(); ++v) {
        const double a = m.linear[v];
        if (a == 0.0) continue;
        ising.h[v] -= a / 2.0;
        ising.offset += a / 2.0;
    }
    for (const auto& [key, q] : m.quadratic) {
        if (q == 0.0) continue;
        ising.coupling[key] += q / 4.0;
        ising.h[key.first] -= q / 4.0;
        ising.h[key.second] -= q / 4.0;
        ising.offset += q / 4.0;
    }
    return ising;
}

inline double ising_energy(const IsingModel& m, const Spins& spins) {
    const int n = static_cast<int>(spins.size());
    double e = m.offset;
    for (const auto& [v, hv] : m.h) {
        if (v < 0 || v >= n)
            throw std::invalid_argument("spin vector does not cover the model");
        e += hv * spins[v];
    }
    for (const auto& [key, j] : m.coupling) {
        if (key.first < 0 || key.second < 0 || key.first >= n || key.second >= n)
            throw std::invalid_argument("spin vector does not cover the model");
        e += j * spins[key.first] * spins[key.second];
    }
    return e;
}

namespace detail {

// Jobs covering each slot, by job index.
inline std::vector<std::vector<int>> cover_sets(const Instance& inst) {
    std::vector<std::vector<int>> covers(inst.horizon);
    for (int i = 0; i < inst.job_count(); ++i) {
        const Job& j = inst.jobs[i];
        for (int k = std::max(0, j.start); k < std::min(inst.horizon, j.end); ++k)
            covers[k].push_back(i);
    }
    return covers;
}

// Adds factor * (sum of coeff*var - target)^2, expanded with x^2 = x.
inline void add_squared_penalty(QuboModel& m,
                                const std::vector<std::pair<int, double>>& members,
                                double target, double factor) {
    for (size_t a = 0; a < members.size(); ++a) {
        const auto& [va, ca] = members[a];
        m.add_linear(va, factor * (ca * ca - 2.0 * target * ca));
        for (size_t b = a + 1; b < members.size(); ++b) {
            const auto& [vb, cb] = members[b];
            m.add_quadratic(va, vb, 2.0 * factor * ca * cb);
        }
    }
    m.offset += factor * target * target;
}

// Lays out slack blocks for every slot and returns the total variable count.
inline int build_slack(VariableRegistry& reg, const Instance& inst,
                       const std::vector<std::vector<int>>& covers) {
    int next_var = reg.n_decision();
    for (int k = 0; k < inst.horizon; ++k) {
        const int bound = std::min(inst.machines, static_cast<int>(covers[k].size()));
        auto coeffs = slack_binary_expansion(bound);
        if (coeffs.empty()) continue;
        SlackBlock block;
        block.slot = k;
        block.bound = bound;
        block.first_var = next_var;
        block.coeffs = std::move(coeffs);
        next_var += static_cast<int>(block.coeffs.size());
        reg.slack_blocks.push_back(std::move(block));
    }
    return next_var;
}

}  // namespace detail

/// Min-idle encoding for identical machines. Per slot k with cover count
/// c_k and slack bound B_k = min(M, c_k):
///   hard:  p1 * (occupancy_k + slack_k - B_k)^2   -- slack realizes {0..B_k}
///   soft:  p2 * (occupancy_k - M)^2
/// plus -w_i per chosen job and p_pair * x_i * x_j per exclusion pair.
/// Slots no selection can overfill carry a loosened hard bound, so the
/// optimal slack always cancels the hard term of any feasible state.
inline QuboModel encode_min_idle(const Instance& inst, const PenaltyConfig& pen) {
    pen.check();
    if (inst.has_eligibility())
        throw std::invalid_argument("instance has eligibility restrictions; use encode_unidentical");
    if (inst.horizon < 1) throw std::invalid_argument("instance horizon must be positive");

    const auto covers = detail::cover_sets(inst);

    QuboModel m;
    m.registry.n_jobs = inst.job_count();
    m.registry.machines_per_job = 1;
    m.resize(detail::build_slack(m.registry, inst, covers));

    for (int i = 0; i < inst.job_count(); ++i)
        m.add_linear(i, -inst.jobs[i].weight);

    size_t block_at = 0;
    for (int k = 0; k < inst.horizon; ++k) {
        std::vector<std::pair<int, double>> hard;
        for (int i : covers[k]) hard.emplace_back(i, 1.0);

        std::vector<std::pair<int, double>> soft = hard;

        if (block_at < m.registry.slack_blocks.size() &&
            m.registry.slack_blocks[block_at].slot == k) {
            const SlackBlock& block = m.registry.slack_blocks[block_at];
            for (size_t b = 0; b < block.coeffs.size(); ++b)
                hard.emplace_back(block.first_var + static_cast<int>(b),
                                  static_cast<double>(block.coeffs[b]));
            detail::add_squared_penalty(m, hard, block.bound, pen.p1);
            ++block_at;
        }
        // empty slots leave only the constant p2 * M^2
        detail::add_squared_penalty(m, soft, inst.machines, pen.p2);
    }

    for (const auto& [a, b] : inst.exclusions) {
        auto i = inst.job_index(a);
        auto j = inst.job_index(b);
        if (!i || !j) throw std::invalid_argument("exclusion references unknown job");
        if (*i == *j) throw std::invalid_argument("exclusion pairs a job with itself");
        m.add_quadratic(*i, *j, pen.p_pair);
    }
    return m;
}

/// Encoding for machines with per-job eligibility sets. Decision variable
/// x_ij means "job i runs on machine j"; each job additionally pays p1 for
/// every pair of machines it claims and p_elig for every ineligible one.
inline QuboModel encode_unidentical(const Instance& inst, const PenaltyConfig& pen) {
    pen.check();
    if (!inst.has_eligibility())
        throw std::invalid_argument("instance has no eligibility map; use encode_min_idle");
    if (inst.horizon < 1) throw std::invalid_argument("instance horizon must be positive");

    const int n_machines = inst.machines;
    const auto covers = detail::cover_sets(inst);

    QuboModel m;
    m.registry.n_jobs = inst.job_count();
    m.registry.machines_per_job = n_machines;
    m.resize(detail::build_slack(m.registry, inst, covers));

    for (int i = 0; i < inst.job_count(); ++i) {
        for (int j = 0; j < n_machines; ++j)
            m.add_linear(m.registry.decision_var(i, j), -inst.jobs[i].weight);
        // at most one machine per job
        for (int j = 0; j < n_machines; ++j)
            for (int j2 = j + 1; j2 < n_machines; ++j2)
                m.add_quadratic(m.registry.decision_var(i, j),
                                m.registry.decision_var(i, j2), pen.p1);
    }

    size_t block_at = 0;
    for (int k = 0; k < inst.horizon; ++k) {
        std::vector<std::pair<int, double>> hard;
        for (int i : covers[k])
            for (int j = 0; j < n_machines; ++j)
                hard.emplace_back(m.registry.decision_var(i, j), 1.0);

        std::vector<std::pair<int, double>> soft = hard;

        if (block_at < m.registry.slack_blocks.size() &&
            m.registry.slack_blocks[block_at].slot == k) {
            const SlackBlock& block = m.registry.slack_blocks[block_at];
            for (size_t b = 0; b < block.coeffs.size(); ++b)
                hard.emplace_back(block.first_var + static_cast<int>(b),
                                  static_cast<double>(block.coeffs[b]));
            detail::add_squared_penalty(m, hard, block.bound, pen.p1);
            ++block_at;
        }
        detail::add_squared_penalty(m, soft, inst.machines, pen.p2);
    }

    for (int i = 0; i < inst.job_count(); ++i) {
        auto it = inst.eligibility.find(inst.jobs[i].id);
        if (it == inst.eligibility.end()) continue;  // unrestricted
        for (int j = 0; j < n_machines; ++j) {
            const int machine_index = j + 1;
            bool eligible = false;
            for (int r : it->second)
                if (r == machine_index) eligible = true;
            if (!eligible) m.add_linear(m.registry.decision_var(i, j), pen.p_elig);
        }
    }

    for (const auto& [a, b] : inst.exclusions) {
        auto i = inst.job_index(a);
        auto j = inst.job_index(b);
        if (!i || !j) throw std::invalid_argument("exclusion references unknown job");
        for (int ja = 0; ja < n_machines; ++ja)
            for (int jb = 0; jb < n_machines; ++jb)
                m.add_quadratic(m.registry.decision_var(*i, ja),
                                m.registry.decision_var(*j, jb), pen.p_pair);
    }
    return m;
}

/// Returns a copy of the model with p added to the coupling of the two
/// jobs' decision variables; raises energy only when both are chosen.
inline QuboModel add_mutual_exclusion(QuboModel m, int job_i, int job_j, double p) {
    if (job_i == job_j) throw std::invalid_argument("mutual exclusion needs two distinct jobs");
    const int u = m.registry.decision_var(job_i);
    const int v = m.registry.decision_var(job_j);
    if (job_i < 0 || job_j < 0 || u >= m.registry.n_decision() || v >= m.registry.n_decision())
        throw std::out_of_range("unknown decision variable");
    m.add_quadratic(u, v, p);
    return m;
}

/// Decoded decision bits: the chosen jobs, and for the x_ij encoding the
/// active (job, machine) pairs. A job claiming several machines is an
/// infeasible state and sets `multi_assignment`.
struct DecodedSample {
    Selection selection;
    std::vector<std::pair<int, int>> machine_pairs;  // (job index, 1-based machine)
    bool multi_assignment = false;
};

inline DecodedSample decode(const QuboModel& m, const Bits& bits) {
    if (static_cast<int>(bits.size()) != m.n_vars())
        throw std::invalid_argument("bit vector length does not match model");
    const VariableRegistry& reg = m.registry;
    DecodedSample out;
    out.selection = Selection(reg.n_jobs);
    if (reg.machines_per_job == 1) {
        for (int i = 0; i < reg.n_jobs; ++i) out.selection.chosen[i] = bits[i] != 0;
        return out;
    }
    for (int i = 0; i < reg.n_jobs; ++i) {
        int active = 0;
        for (int j = 0; j < reg.machines_per_job; ++j) {
            if (!bits[reg.decision_var(i, j)]) continue;
            ++active;
            out.selection.chosen[i] = true;
            out.machine_pairs.emplace_back(i, j + 1);
        }
        if (active > 1) out.multi_assignment = true;
    }
    return out;
}

/// Coordinate-list text export: `p qubo <n_vars> <n_terms>` header, the
/// offset as a comment, then one `i i value` line per linear term and
/// `i j value` per quadratic term. Deterministic ordering; round-trips
/// byte-identically through import_qubo.
inline std::string export_qubo(const QuboModel& m) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "p qubo %d %d\n", m.n_vars(), m.n_terms());
    out += buf;
    std::snprintf(buf, sizeof buf, "c offset %.17g\n", m.offset);
    out += buf;
    for (int v = 0; v < m.n_vars(); ++v) {
        if (m.linear[v] == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", v, v, m.linear[v]);
        out += buf;
    }
    for (const auto& [key, c] : m.quadratic) {
        if (c == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", key.first, key.second, c);
        out += buf;
    }
    return out;
}

inline QuboModel import_qubo(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    QuboModel m;
    bool header_seen = false;
    int expected_terms = 0;
    int terms_read = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == 'c') {
            std::string c, tag;
            ls >> c >> tag;
            if (tag == "offset") ls >> m.offset;
            continue;
        }
        if (line[0] == 'p') {
            std::string p, kind;
            int n_vars = 0;
            if (!(ls >> p >> kind >> n_vars >> expected_terms) || kind != "qubo")
                throw std::invalid_argument("malformed qubo header: " + line);
            m.resize(n_vars);
            header_seen = true;
            continue;
        }
        if (!header_seen) throw std::invalid_argument("qubo term before header");
        int i = 0, j = 0;
        double value = 0.0;
        if (!(ls >> i >> j >> value)) throw std::invalid_argument("malformed qubo term: " + line);
        if (i == j)
            m.add_linear(i, value);
        else
            m.add_quadratic(i, j, value);
        ++terms_read;
    }
    if (!header_seen) throw std::invalid_argument("missing qubo header");
    if (terms_read != expected_terms)
        throw std::invalid_argument("qubo term count does not match header");
    return m;
}

}  // namespace ofisp
