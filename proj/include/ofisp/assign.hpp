#pragma once

// Greedy interval partitioning: turns a set of selected jobs into a
// job -> machine map using the fewest machines possible.

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ofisp/core.hpp"

namespace ofisp {

/// Job-to-machine map with 1-based machine indices. No two jobs on the
/// same machine overlap; machines_used equals the deepest point overlap
/// of the input jobs.
struct Assignment {
    std::map<std::string, int> machine_of;
    int machines_used = 0;
};

/// Maximum number of jobs covering any single time slot.
inline int depth(const std::vector<Job>& jobs) {
    std::vector<std::pair<int, int>> events;  // (time, +1/-1), ends sort first
    events.reserve(jobs.size() * 2);
    for (const Job& j : jobs) {
        events.emplace_back(j.start, +1);
        events.emplace_back(j.end, -1);
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    int running = 0, deepest = 0;
    for (const auto& [time, delta] : events) {
        running += delta;
        deepest = std::max(deepest, running);
    }
    return deepest;
}

namespace detail {

// Min-segment-tree over machine end times; answers "lowest machine index
// whose current end time is <= t" in O(log n).
class MachinePool {
public:
    explicit MachinePool(int capacity) : size_(1) {
        while (size_ < std::max(capacity, 1)) size_ *= 2;
        end_.assign(2 * size_, std::numeric_limits<int>::min());
    }

    int first_free_at(int t) const {
        if (end_[1] > t) return -1;
        int node = 1;
        while (node < size_) {
            node *= 2;
            if (end_[node] > t) ++node;  // left subtree busy, go right
        }
        return node - size_;
    }

    void occupy(int machine, int until) {
        int node = machine + size_;
        end_[node] = until;
        for (node /= 2; node >= 1; node /= 2)
            end_[node] = std::min(end_[2 * node], end_[2 * node + 1]);
    }

private:
    int size_;
    std::vector<int> end_;
};

}  // namespace detail

/// Sorts the jobs by start time (ties by end, then id) and places each on
/// the lowest-index machine that is already free, opening a new machine
/// when none is. Uses exactly depth(jobs) machines.
inline Assignment greedy_assign(std::vector<Job> jobs) {
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.end != b.end) return a.end < b.end;
        return a.id < b.id;
    });

    Assignment out;
    detail::MachinePool pool(static_cast<int>(jobs.size()));
    for (const Job& j : jobs) {
        int machine = pool.first_free_at(j.start);
        if (machine < 0 || machine >= out.machines_used) {
            machine = out.machines_used;
            ++out.machines_used;
        }
        pool.occupy(machine, j.end);
        out.machine_of[j.id] = machine + 1;
    }
    return out;
}

}  // namespace ofisp
