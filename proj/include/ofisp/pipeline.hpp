#pragma once

// End-to-end orchestration shared by the command-line tool and the
// integration tests: encode -> anneal (or enumerate) -> select under both
// policies -> assign machines -> structured report. Every figure in a
// report is recomputed from the decoded states it describes.

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofisp/assign.hpp"
#include "ofisp/core.hpp"
#include "ofisp/instance_io.hpp"
#include "ofisp/music.hpp"
#include "ofisp/qubo.hpp"
#include "ofisp/solver.hpp"

namespace ofisp {

struct SolveSettings {
    std::optional<double> p1, p2, p_pair, p_elig;  // override derived defaults
    AnnealSchedule schedule;
    bool use_oracle = false;
    std::optional<SelectPolicy> policy;  // headline: lowest-energy feasible when unset
};

struct SolutionView {
    Selection selection;
    ViolationReport report;
    Assignment assignment;
    double energy = 0.0;
};

struct RunReport {
    int n_jobs = 0, machines = 0, horizon = 0;
    int decision_vars = 0, slack_vars = 0, total_vars = 0;
    PenaltyConfig penalties;
    AnnealSchedule schedule;
    bool oracle = false;
    std::string headline_policy;  // "energy", "max-weight" or "min-soft"
    std::optional<SolutionView> best;        // headline solution
    std::optional<SolutionView> max_weight;  // policy solutions, always reported
    std::optional<SolutionView> min_soft;
    double encode_ms = 0.0, solve_ms = 0.0, total_ms = 0.0;

    bool feasible() const { return best.has_value(); }
};

namespace pipeline_detail {

inline double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

inline SolutionView make_view(const Instance& inst, const SelectedSolution& sol) {
    SolutionView view;
    view.selection = sol.selection;
    view.report = sol.report;
    view.energy = sol.energy;
    if (!sol.decoded.machine_pairs.empty()) {
        // the x_ij encoding already fixes machines; keep its choice
        std::set<int> in_use;
        for (const auto& [job, machine] : sol.decoded.machine_pairs) {
            view.assignment.machine_of[inst.jobs[job].id] = machine;
            in_use.insert(machine);
        }
        view.assignment.machines_used = static_cast<int>(in_use.size());
    } else {
        view.assignment = greedy_assign(selected_jobs(inst, sol.selection));
    }
    return view;
}

// Lowest-energy hard-feasible sample: the model's own verdict.
inline std::optional<SelectedSolution> best_energy_feasible(const SampleSet& samples,
                                                            const QuboModel& model,
                                                            const Instance& inst) {
    for (const Sample& s : samples.samples) {
        DecodedSample dec = decode(model, s.bits);
        ViolationReport rep = evaluate(inst, dec.selection);
        if (detail::hard_feasible(inst, dec, rep))
            return SelectedSolution{dec.selection, rep, dec, s.energy};
    }
    return std::nullopt;
}

inline nlohmann::json view_to_json(const Instance& inst, const SolutionView& view) {
    return {{"selection", selection_to_json(inst, view.selection)},
            {"weight", view.report.total_weight},
            {"hard_violations", view.report.hard_violations},
            {"soft_violations", view.report.soft_violations},
            {"energy", view.energy},
            {"machines_used", view.assignment.machines_used},
            {"assignment", assignment_to_json(view.assignment)}};
}

}  // namespace pipeline_detail

inline PenaltyConfig resolve_penalties(const Instance& inst, const SolveSettings& settings) {
    PenaltyConfig pen = default_penalties(inst);
    if (settings.p1) pen.p1 = *settings.p1;
    if (settings.p2) pen.p2 = *settings.p2;
    if (settings.p_pair) pen.p_pair = *settings.p_pair;
    if (settings.p_elig) pen.p_elig = *settings.p_elig;
    pen.check();
    return pen;
}

inline RunReport run_solve(const Instance& inst, const SolveSettings& settings) {
    const auto t0 = std::chrono::steady_clock::now();

    auto defects = validate_instance(inst);
    if (!defects.empty()) {
        std::string msg = "invalid instance:";
        for (const auto& d : defects) msg += "\n  - " + d;
        throw InputError(msg);
    }
    if (inst.jobs.empty()) throw InputError("instance has no jobs");

    PenaltyConfig pen;
    try {
        pen = resolve_penalties(inst, settings);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    RunReport rep;
    rep.n_jobs = inst.job_count();
    rep.machines = inst.machines;
    rep.horizon = inst.horizon;
    rep.penalties = pen;
    rep.schedule = settings.schedule;
    rep.oracle = settings.use_oracle;

    const auto t_encode = std::chrono::steady_clock::now();
    const QuboModel model =
        inst.has_eligibility() ? encode_unidentical(inst, pen) : encode_min_idle(inst, pen);
    rep.encode_ms = pipeline_detail::ms_since(t_encode);
    rep.decision_vars = model.registry.n_decision();
    rep.slack_vars = model.registry.n_slack();
    rep.total_vars = model.registry.n_total();

    const auto t_solve = std::chrono::steady_clock::now();
    SampleSet samples;
    if (settings.use_oracle) {
        if (model.n_vars() > 24)
            throw InputError("model too large for the exhaustive oracle (" +
                             std::to_string(model.n_vars()) + " variables)");
        auto [bits, e] = brute_force(model);
        samples.samples.push_back(Sample{std::move(bits), e, 1});
    } else {
        samples = simulated_anneal(model, settings.schedule);
    }
    rep.solve_ms = pipeline_detail::ms_since(t_solve);

    auto energy_best = pipeline_detail::best_energy_feasible(samples, model, inst);
    auto by_weight = select_solution(samples, model, inst, SelectPolicy::MaxWeightFeasible);
    auto by_soft = select_solution(samples, model, inst, SelectPolicy::MinSoft);
    if (by_weight) rep.max_weight = pipeline_detail::make_view(inst, *by_weight);
    if (by_soft) rep.min_soft = pipeline_detail::make_view(inst, *by_soft);

    if (!settings.policy) {
        rep.headline_policy = "energy";
        if (energy_best) rep.best = pipeline_detail::make_view(inst, *energy_best);
    } else if (*settings.policy == SelectPolicy::MaxWeightFeasible) {
        rep.headline_policy = "max-weight";
        rep.best = rep.max_weight;
    } else {
        rep.headline_policy = "min-soft";
        rep.best = rep.min_soft;
    }

    rep.total_ms = pipeline_detail::ms_since(t0);
    return rep;
}

inline nlohmann::json report_to_json(const Instance& inst, const RunReport& rep) {
    nlohmann::json doc;
    doc["instance"] = {{"jobs", rep.n_jobs}, {"machines", rep.machines}, {"horizon", rep.horizon}};
    doc["model"] = {{"decision_variables", rep.decision_vars},
                    {"slack_variables", rep.slack_vars},
                    {"total_variables", rep.total_vars}};
    doc["penalties"] = {{"p1", rep.penalties.p1},
                        {"p2", rep.penalties.p2},
                        {"p_pair", rep.penalties.p_pair},
                        {"p_elig", rep.penalties.p_elig}};
    doc["solver"] = {{"oracle", rep.oracle},
                     {"reads", rep.schedule.reads},
                     {"sweeps", rep.schedule.sweeps},
                     {"t_init", rep.schedule.t_init},
                     {"t_final", rep.schedule.t_final},
                     {"seed", rep.schedule.seed}};
    doc["policy"] = rep.headline_policy;
    doc["feasible"] = rep.feasible();
    doc["solutions"] = nlohmann::json::object();
    if (rep.best) doc["solutions"]["best"] = pipeline_detail::view_to_json(inst, *rep.best);
    if (rep.max_weight)
        doc["solutions"]["max_weight"] = pipeline_detail::view_to_json(inst, *rep.max_weight);
    if (rep.min_soft)
        doc["solutions"]["min_soft"] = pipeline_detail::view_to_json(inst, *rep.min_soft);
    doc["timings_ms"] = {{"encode", rep.encode_ms},
                         {"solve", rep.solve_ms},
                         {"total", rep.total_ms}};
    return doc;
}

struct ReduceSettings {
    int machines = 2;
    int k_max = 4;
    SolveSettings solve;
};

struct ReduceResult {
    Instance instance;
    std::vector<Phrase> phrases;    // all identified, weighted
    std::vector<Phrase> selected;   // phrases of the headline solution
    RunReport report;
    std::vector<std::uint8_t> midi;
};

/// Full reduction pipeline: segment every track, weight the phrases, build
/// and solve the scheduling instance, then render the chosen phrases onto
/// `machines` output tracks.
inline ReduceResult run_reduce(const Score& score, const ReduceSettings& settings) {
    if (settings.machines < 1) throw InputError("machine count must be positive");

    ReduceResult out;
    for (int track = 0; track < static_cast<int>(score.tracks.size()); ++track) {
        auto phrases = identify_phrases(score, track, settings.k_max);
        weight_phrases(phrases);
        out.phrases.insert(out.phrases.end(), phrases.begin(), phrases.end());
    }
    if (out.phrases.empty()) throw InputError("no phrases identified; nothing to reduce");

    out.instance = build_instance(score, out.phrases, settings.machines);
    out.report = run_solve(out.instance, settings.solve);

    if (out.report.best) {
        const SolutionView& best = *out.report.best;
        for (int i : best.selection.indices()) out.selected.push_back(out.phrases[i]);
        out.midi = render_reduction(score, out.selected, best.assignment, settings.machines);
    }
    return out;
}

}  // namespace ofisp
