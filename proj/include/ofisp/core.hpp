#pragma once

// Domain model for fixed-interval scheduling with minimal idle time:
// jobs with fixed half-open intervals, machine/horizon bounds, job
// selections, and occupancy-based feasibility evaluation.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ofisp {

/// A job occupies the half-open time interval [start, end) on one machine.
/// Time is discrete; slot k means the unit interval [k, k+1).
struct Job {
    std::string id;
    int start = 0;
    int end = 0;
    double weight = 0.0;

    bool covers(int slot) const { return start <= slot && slot < end; }
    int length() const { return end - start; }
};

/// A scheduling instance: N jobs, M identical machines, K time slots.
/// `eligibility`, when non-empty, restricts jobs to subsets of machines
/// (1-based machine indices); jobs absent from the map run anywhere.
struct Instance {
    std::vector<Job> jobs;
    int machines = 1;
    int horizon = 0;
    std::vector<std::pair<std::string, std::string>> exclusions;
    std::map<std::string, std::vector<int>> eligibility;

    int job_count() const { return static_cast<int>(jobs.size()); }

    std::optional<int> job_index(const std::string& id) const {
        for (int i = 0; i < job_count(); ++i)
            if (jobs[i].id == id) return i;
        return std::nullopt;
    }

    bool has_eligibility() const { return !eligibility.empty(); }

    double total_weight() const {
        double w = 0.0;
        for (const auto& j : jobs) w += j.weight;
        return w;
    }
};

/// A subset of an instance's jobs, bit-indexed by job position.
struct Selection {
    std::vector<bool> chosen;

    Selection() = default;
    explicit Selection(int n_jobs) : chosen(n_jobs, false) {}

    static Selection of_indices(int n_jobs, const std::vector<int>& idx) {
        Selection s(n_jobs);
        for (int i : idx) {
            if (i < 0 || i >= n_jobs) throw std::out_of_range("selection index out of range");
            s.chosen[i] = true;
        }
        return s;
    }

    static Selection of_ids(const Instance& inst, const std::vector<std::string>& ids) {
        Selection s(inst.job_count());
        for (const auto& id : ids) {
            auto i = inst.job_index(id);
            if (!i) throw std::invalid_argument("unknown job id: " + id);
            s.chosen[*i] = true;
        }
        return s;
    }

    int size() const { return static_cast<int>(chosen.size()); }

    int count() const { return static_cast<int>(std::count(chosen.begin(), chosen.end(), true)); }

    std::vector<int> indices() const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (chosen[i]) out.push_back(i);
        return out;
    }

    bool operator==(const Selection& other) const = default;
};

/// Occupancy profile of a selection plus violation counts.
/// A slot is hard-violating when more than M jobs run there and
/// soft-violating when the count differs from M at all, so every
/// hard violation is also a soft one.
struct ViolationReport {
    std::vector<int> occupancy;  // one entry per slot 0..K-1
    int hard_violations = 0;
    int soft_violations = 0;
    double total_weight = 0.0;
};

/// Checks every instance invariant and returns one message per breach.
/// Defects are data, not failures; an empty result means the instance is ok.
inline std::vector<std::string> validate_instance(const Instance& inst) {
    std::vector<std::string> defects;
    if (inst.machines < 1) defects.push_back("machine count must be positive");
    if (inst.horizon < 1) defects.push_back("horizon must be positive");

    std::set<std::string> seen;
    for (const auto& j : inst.jobs) {
        if (!seen.insert(j.id).second) defects.push_back("duplicate job id: " + j.id);
        if (j.start >= j.end) defects.push_back("job " + j.id + ": empty interval");
        if (j.weight < 0.0) defects.push_back("job " + j.id + ": negative weight");
        if (j.start < 0 || j.end > inst.horizon)
            defects.push_back("job " + j.id + ": interval outside horizon");
    }

    for (const auto& [a, b] : inst.exclusions) {
        if (!inst.job_index(a)) defects.push_back("exclusion references unknown job: " + a);
        if (!inst.job_index(b)) defects.push_back("exclusion references unknown job: " + b);
        if (a == b) defects.push_back("exclusion pairs job " + a + " with itself");
    }

    for (const auto& [id, machines] : inst.eligibility) {
        if (!inst.job_index(id)) defects.push_back("eligibility references unknown job: " + id);
        if (machines.empty()) defects.push_back("eligibility set for job " + id + " is empty");
        for (int m : machines)
            if (m < 1 || m > inst.machines)
                defects.push_back("eligibility for job " + id + " references machine out of range");
    }
    return defects;
}

/// Number of chosen jobs covering slot k. Valid for 0 <= k <= horizon;
/// slot `horizon` exists only as a boundary and is never covered.
inline int occupancy(const Instance& inst, const Selection& sel, int k) {
    if (k < 0 || k > inst.horizon) throw std::out_of_range("time slot out of range");
    if (sel.size() != inst.job_count())
        throw std::invalid_argument("selection size does not match instance");
    int count = 0;
    for (int i = 0; i < inst.job_count(); ++i)
        if (sel.chosen[i] && inst.jobs[i].covers(k)) ++count;
    return count;
}

/// Full occupancy scan of a selection, linear in N + K.
inline ViolationReport evaluate(const Instance& inst, const Selection& sel) {
    if (sel.size() != inst.job_count())
        throw std::invalid_argument("selection size does not match instance");
    ViolationReport rep;
    rep.occupancy.assign(inst.horizon, 0);

    // difference array over slot starts, then prefix-sum
    std::vector<int> diff(inst.horizon + 1, 0);
    for (int i = 0; i < inst.job_count(); ++i) {
        if (!sel.chosen[i]) continue;
        const Job& j = inst.jobs[i];
        rep.total_weight += j.weight;
        diff[std::max(0, j.start)] += 1;
        diff[std::min(inst.horizon, j.end)] -= 1;
    }
    int running = 0;
    for (int k = 0; k < inst.horizon; ++k) {
        running += diff[k];
        rep.occupancy[k] = running;
        if (running > inst.machines) ++rep.hard_violations;
        if (running != inst.machines) ++rep.soft_violations;
    }
    return rep;
}

/// The jobs picked out by a selection, in instance order.
inline std::vector<Job> selected_jobs(const Instance& inst, const Selection& sel) {
    std::vector<Job> out;
    for (int i = 0; i < inst.job_count(); ++i)
        if (sel.chosen[i]) out.push_back(inst.jobs[i]);
    return out;
}

}  // namespace ofisp
