#pragma once

// Melodic phrase segmentation and weighting. Boundary strengths follow the
// local boundary detection model: degree of change across pitch-interval,
// inter-onset-interval and rest-interval sequences, combined 1:2:1. Phrase
// boundaries come from a bisection search over the peak threshold, and each
// phrase is weighted by the sum of its pitch and IOI entropies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofisp/assign.hpp"
#include "ofisp/core.hpp"
#include "ofisp/midi.hpp"

namespace ofisp {

using BoundaryProfile = std::vector<double>;

/// A measure-aligned melodic segment of one track. Measures are inclusive
/// on both sides; notes are the original (uncollapsed) events whose onsets
/// fall inside the measure range.
struct Phrase {
    int track = 0;
    int start_measure = 0;
    int end_measure = 0;
    std::vector<NoteEvent> notes;
    double pitch_entropy = 0.0;
    double ioi_entropy = 0.0;
    double weight = 0.0;

    int measure_span() const { return end_measure - start_measure + 1; }
};

/// Collapses simultaneous onsets to the highest pitch, yielding a
/// monophonic sequence sorted by onset.
inline std::vector<NoteEvent> collapse_chords(std::vector<NoteEvent> notes) {
    std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        if (a.onset != b.onset) return a.onset < b.onset;
        return a.pitch > b.pitch;
    });
    std::vector<NoteEvent> mono;
    for (const NoteEvent& n : notes)
        if (mono.empty() || mono.back().onset != n.onset) mono.push_back(n);
    return mono;
}

namespace lbdm_detail {

// Degree of change between two nonnegative interval values.
inline double change(double a, double b) {
    const double sum = a + b;
    return sum != 0.0 ? std::abs(a - b) / sum : 0.0;
}

// Strength profile of one parametric sequence, normalized to [0, 1].
inline std::vector<double> strengths(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        if (i > 0) degree += change(xs[i - 1], xs[i]);
        if (i + 1 < n) degree += change(xs[i], xs[i + 1]);
        s[i] = xs[i] * degree;
    }
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, v);
    if (peak > 0.0)
        for (double& v : s) v /= peak;
    return s;
}

}  // namespace lbdm_detail

/// Boundary strength per consecutive-note interval of a monophonic
/// sequence; empty for fewer than two notes.
inline BoundaryProfile boundary_profile(const std::vector<NoteEvent>& mono) {
    if (mono.size() < 2) return {};
    const std::size_t n = mono.size() - 1;
    std::vector<double> pitch(n), ioi(n), rest(n);
    for (std::size_t i = 0; i < n; ++i) {
        pitch[i] = std::abs(static_cast<double>(mono[i + 1].pitch - mono[i].pitch));
        ioi[i] = static_cast<double>(mono[i + 1].onset - mono[i].onset);
        rest[i] = std::max<double>(
            0.0, static_cast<double>(mono[i + 1].onset - (mono[i].onset + mono[i].duration)));
    }
    const auto ps = lbdm_detail::strengths(pitch);
    const auto is = lbdm_detail::strengths(ioi);
    const auto rs = lbdm_detail::strengths(rest);
    BoundaryProfile bs(n);
    for (std::size_t i = 0; i < n; ++i) bs[i] = 0.25 * ps[i] + 0.50 * is[i] + 0.25 * rs[i];
    return bs;
}

/// Indices where the profile exceeds the threshold at a local maximum;
/// only the first index of a plateau qualifies.
inline std::vector<int> find_peaks(const BoundaryProfile& bs, double threshold) {
    std::vector<int> peaks;
    const int n = static_cast<int>(bs.size());
    for (int i = 0; i < n; ++i) {
        if (!(bs[i] > threshold)) continue;
        if (i > 0 && !(bs[i - 1] < bs[i])) continue;
        if (i + 1 < n && bs[i] < bs[i + 1]) continue;
        peaks.push_back(i);
    }
    return peaks;
}

/// Inclusive measure ranges tiling [span_start, span_end], cut after the
/// measure holding the note that opens each peak interval. Cuts falling in
/// the same measure merge; a cut at the span end is dropped.
inline std::vector<std::pair<int, int>> phrase_ranges(const std::vector<int>& peaks,
                                                      const std::vector<int>& cut_measure,
                                                      int span_start, int span_end) {
    std::vector<int> cuts;
    for (int p : peaks) {
        const int m = cut_measure.at(p);
        if (m >= span_start && m < span_end) cuts.push_back(m);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<std::pair<int, int>> ranges;
    int start = span_start;
    for (int c : cuts) {
        ranges.emplace_back(start, c);
        start = c + 1;
    }
    ranges.emplace_back(start, span_end);
    return ranges;
}

/// Threshold-search outcome: the accepted ranges, the (possibly grown)
/// phrase length cap, and the threshold that produced them.
struct Segmentation {
    std::vector<std::pair<int, int>> ranges;
    int k_max = 0;
    double threshold = 0.0;
};

/// Bisection search for a peak threshold whose phrases all span at most
/// k_max measures. Lowering the threshold adds boundaries; when even the
/// lowest produces an over-long phrase and no threshold was recorded,
/// k_max grows by one and the search restarts. Always terminates: once
/// k_max reaches the span, the peak-free single phrase is acceptable.
inline Segmentation segment_profile(const BoundaryProfile& bs,
                                    const std::vector<int>& cut_measure, int span_start,
                                    int span_end, int k_max, double epsilon = 0.0) {
    if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");

    double lo_limit = 0.0, hi_limit = 0.0;
    if (!bs.empty()) {
        lo_limit = *std::min_element(bs.begin(), bs.end());
        hi_limit = *std::max_element(bs.begin(), bs.end());
    }
    if (epsilon <= 0.0) {
        epsilon = 1e-6 * (hi_limit - lo_limit);
        if (epsilon <= 0.0) epsilon = 1e-12;
    }

    int k = k_max;
    double lo = lo_limit, hi = hi_limit;
    double t = (lo + hi) / 2.0;
    std::optional<double> found_t;

    while (true) {
        const auto peaks = find_peaks(bs, t);
        auto ranges = phrase_ranges(peaks, cut_measure, span_start, span_end);
        bool too_long = false;
        for (const auto& [s, e] : ranges)
            if (e - s + 1 > k) too_long = true;

        if (too_long) {
            hi = t;
            t = (lo + hi) / 2.0;
            if (t - lo < epsilon) {
                if (found_t) {
                    auto chosen = phrase_ranges(find_peaks(bs, *found_t), cut_measure,
                                                span_start, span_end);
                    return {std::move(chosen), k, *found_t};
                }
                k += 1;  // grows at most to the span; then the single phrase fits
                lo = lo_limit;
                hi = hi_limit;
                t = (lo + hi) / 2.0;
            }
        } else {
            found_t = t;
            lo = t;
            t = (lo + hi) / 2.0;
            if (hi - t < epsilon) return {std::move(ranges), k, *found_t};
        }
    }
}

namespace music_detail {

// Measure of each interval's opening note, for the collapsed sequence.
inline std::vector<int> cut_measures(const Score& score, const std::vector<NoteEvent>& mono) {
    std::vector<int> cuts;
    if (mono.size() < 2) return cuts;
    cuts.reserve(mono.size() - 1);
    for (std::size_t i = 0; i + 1 < mono.size(); ++i)
        cuts.push_back(score.measure_of(mono[i].onset));
    return cuts;
}

inline std::vector<Phrase> materialize(const Score& score, int track,
                                       const std::vector<std::pair<int, int>>& ranges) {
    std::vector<Phrase> phrases;
    for (const auto& [start, end] : ranges) {
        Phrase p;
        p.track = track;
        p.start_measure = start;
        p.end_measure = end;
        for (const NoteEvent& n : score.tracks[track]) {
            const int m = score.measure_of(n.onset);
            if (m >= start && m <= end) p.notes.push_back(n);
        }
        if (!p.notes.empty()) phrases.push_back(std::move(p));  // silence-only ranges drop out
    }
    return phrases;
}

}  // namespace music_detail

/// Phrases of one track cut at the given peaks. With no peaks the whole
/// sounding span becomes a single phrase.
inline std::vector<Phrase> find_phrases(const std::vector<int>& peaks, const Score& score,
                                        int track) {
    const auto mono = collapse_chords(score.tracks.at(track));
    if (mono.empty()) return {};
    const int span_start = score.measure_of(mono.front().onset);
    const int span_end = score.measure_of(mono.back().onset);
    const auto ranges =
        phrase_ranges(peaks, music_detail::cut_measures(score, mono), span_start, span_end);
    return music_detail::materialize(score, track, ranges);
}

/// Segments one track into phrases of at most k_max measures (k_max grows
/// when the profile admits no finer split). Unweighted; see weight_phrases.
inline std::vector<Phrase> identify_phrases(const Score& score, int track, int k_max = 4,
                                            double epsilon = 0.0) {
    const auto mono = collapse_chords(score.tracks.at(track));
    if (mono.empty()) return {};
    const int span_start = score.measure_of(mono.front().onset);
    const int span_end = score.measure_of(mono.back().onset);

    const auto bs = boundary_profile(mono);
    if (bs.empty())  // single note: nothing to split
        return music_detail::materialize(score, track, {{span_start, span_end}});

    const auto seg = segment_profile(bs, music_detail::cut_measures(score, mono), span_start,
                                     span_end, k_max, epsilon);
    return music_detail::materialize(score, track, seg.ranges);
}

namespace music_detail {

// H = log2(N) - (sum n_i*log2(n_i)) / N over symbol counts; exact zero for
// a single symbol and exactly log2(k) for k equiprobable symbols.
template <typename Key>
double entropy_of_counts(const std::map<Key, int>& counts) {
    double total = 0.0, weighted = 0.0;
    for (const auto& [key, n] : counts) {
        total += n;
        weighted += n * std::log2(static_cast<double>(n));
    }
    if (total == 0.0) return 0.0;
    return std::log2(total) - weighted / total;
}

}  // namespace music_detail

/// Shannon entropy of the pitch distribution (chords collapsed to their
/// highest note). A phrase must contain at least one note.
inline double pitch_entropy(const std::vector<NoteEvent>& notes) {
    if (notes.empty()) throw std::invalid_argument("entropy of an empty phrase");
    std::map<int, int> counts;
    for (const NoteEvent& n : collapse_chords(notes)) counts[n.pitch] += 1;
    return music_detail::entropy_of_counts(counts);
}

/// Shannon entropy of the inter-onset-interval distribution. The last note
/// opens no interval, so a single-note phrase scores 0.
inline double ioi_entropy(const std::vector<NoteEvent>& notes) {
    if (notes.empty()) throw std::invalid_argument("entropy of an empty phrase");
    const auto mono = collapse_chords(notes);
    std::map<std::int64_t, int> counts;
    for (std::size_t i = 0; i + 1 < mono.size(); ++i)
        counts[mono[i + 1].onset - mono[i].onset] += 1;
    return music_detail::entropy_of_counts(counts);
}

inline void weight_phrases(std::vector<Phrase>& phrases) {
    for (Phrase& p : phrases) {
        p.pitch_entropy = pitch_entropy(p.notes);
        p.ioi_entropy = ioi_entropy(p.notes);
        p.weight = p.pitch_entropy + p.ioi_entropy;
    }
}

/// Stable job id for a phrase inside an instance.
inline std::string phrase_job_id(const Phrase& p) {
    return "t" + std::to_string(p.track) + ".m" + std::to_string(p.start_measure) + "-" +
           std::to_string(p.end_measure);
}

/// One job per weighted phrase: the interval is the measure range (half-open
/// in slots), the weight its entropy sum, the horizon the measure count.
inline Instance build_instance(const Score& score, const std::vector<Phrase>& phrases,
                               int machines) {
    if (machines < 1) throw std::invalid_argument("machine count must be positive");
    Instance inst;
    inst.machines = machines;
    inst.horizon = score.measure_count();
    for (const Phrase& p : phrases)
        inst.jobs.push_back(
            Job{phrase_job_id(p), p.start_measure, p.end_measure + 1, p.weight});
    return inst;
}

/// Renders the reduction: one output track per machine (plus the conductor
/// carrying time signatures), holding the original notes of the phrases
/// assigned there. Phrases on one machine must not overlap in measures.
inline std::vector<std::uint8_t> render_reduction(const Score& score,
                                                  const std::vector<Phrase>& selected,
                                                  const Assignment& assignment, int machines) {
    if (assignment.machines_used > machines)
        throw std::invalid_argument("assignment uses more machines than available");

    std::vector<std::vector<const Phrase*>> by_machine(machines);
    for (const Phrase& p : selected) {
        auto it = assignment.machine_of.find(phrase_job_id(p));
        if (it == assignment.machine_of.end())
            throw std::invalid_argument("selected phrase missing from assignment: " +
                                        phrase_job_id(p));
        if (it->second < 1 || it->second > machines)
            throw std::invalid_argument("assignment references machine out of range");
        by_machine[it->second - 1].push_back(&p);
    }

    std::vector<std::vector<NoteEvent>> tracks(machines);
    for (int m = 0; m < machines; ++m) {
        auto& phrases = by_machine[m];
        std::sort(phrases.begin(), phrases.end(),
                  [](const Phrase* a, const Phrase* b) { return a->start_measure < b->start_measure; });
        for (std::size_t i = 0; i + 1 < phrases.size(); ++i)
            if (phrases[i + 1]->start_measure <= phrases[i]->end_measure)
                throw std::invalid_argument("overlapping phrases assigned to machine " +
                                            std::to_string(m + 1));
        for (const Phrase* p : phrases)
            tracks[m].insert(tracks[m].end(), p->notes.begin(), p->notes.end());
    }
    return write_midi(score.ticks_per_quarter, score.time_signatures, tracks);
}

}  // namespace ofisp
