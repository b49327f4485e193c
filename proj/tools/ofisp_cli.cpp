// Command-line front end: phrase extraction, QUBO encoding, annealing,
// reduction and solution checking. Exit codes: 0 success or feasible,
// 1 infeasible result, 2 input error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ofisp/instance_io.hpp"
#include "ofisp/midi.hpp"
#include "ofisp/music.hpp"
#include "ofisp/pipeline.hpp"
#include "ofisp/qubo.hpp"
#include "ofisp/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInputError = 2;

struct PenaltyFlags {
    std::optional<double> p1, p2, p_pair, p_elig;

    void attach(CLI::App& cmd) {
        cmd.add_option("--p1", p1, "Hard constraint penalty (default derived from weights)");
        cmd.add_option("--p2", p2, "Soft idle-time penalty (0 disables; default derived)");
        cmd.add_option("--p-pair", p_pair, "Mutual exclusion penalty");
        cmd.add_option("--p-elig", p_elig, "Ineligible machine penalty");
    }

    void apply(ofisp::SolveSettings& settings) const {
        settings.p1 = p1;
        settings.p2 = p2;
        settings.p_pair = p_pair;
        settings.p_elig = p_elig;
    }
};

struct ScheduleFlags {
    ofisp::AnnealSchedule schedule;
    std::string policy;
    bool oracle = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--reads", schedule.reads, "Independent annealing chains")
            ->check(CLI::PositiveNumber);
        cmd.add_option("--sweeps", schedule.sweeps, "Full variable passes per chain")
            ->check(CLI::PositiveNumber);
        cmd.add_option("--t-init", schedule.t_init, "Initial temperature (0 = auto)");
        cmd.add_option("--t-final", schedule.t_final, "Final temperature (0 = auto)");
        cmd.add_option("--seed", schedule.seed, "Random seed for all randomness");
        cmd.add_option("--policy", policy, "Headline solution policy")
            ->check(CLI::IsMember({"max-weight", "min-soft"}));
        cmd.add_flag("--oracle", oracle, "Exhaustive enumeration instead of annealing");
    }

    void apply(ofisp::SolveSettings& settings) const {
        settings.schedule = schedule;
        settings.use_oracle = oracle;
        if (policy == "max-weight") settings.policy = ofisp::SelectPolicy::MaxWeightFeasible;
        if (policy == "min-soft") settings.policy = ofisp::SelectPolicy::MinSoft;
    }
};

void emit(const nlohmann::json& doc, const std::string& out_path) {
    if (out_path.empty())
        std::cout << doc.dump(2) << "\n";
    else
        ofisp::write_text_file(out_path, doc.dump(2) + "\n");
}

int cmd_phrases(const std::string& midi_path, int k_max, const std::string& out_path) {
    const ofisp::Score score = ofisp::parse_midi_file(midi_path);
    for (const auto& w : score.warnings) std::cerr << "warning: " << w << "\n";

    std::vector<ofisp::Phrase> phrases;
    for (int t = 0; t < static_cast<int>(score.tracks.size()); ++t) {
        auto per_track = ofisp::identify_phrases(score, t, k_max);
        ofisp::weight_phrases(per_track);
        phrases.insert(phrases.end(), per_track.begin(), per_track.end());
    }
    emit(ofisp::phrase_table_to_json(score, phrases), out_path);
    return kExitOk;
}

int cmd_encode(const std::string& instance_path, const PenaltyFlags& penalties,
               const std::string& out_path) {
    const ofisp::Instance inst = ofisp::load_instance(instance_path);
    auto defects = ofisp::validate_instance(inst);
    if (!defects.empty()) {
        for (const auto& d : defects) std::cerr << "error: " << d << "\n";
        return kExitInputError;
    }
    ofisp::SolveSettings settings;
    penalties.apply(settings);
    const ofisp::PenaltyConfig pen = ofisp::resolve_penalties(inst, settings);
    const ofisp::QuboModel model = inst.has_eligibility()
                                       ? ofisp::encode_unidentical(inst, pen)
                                       : ofisp::encode_min_idle(inst, pen);

    const std::string text = ofisp::export_qubo(model);
    if (out_path.empty())
        std::cout << text;
    else
        ofisp::write_text_file(out_path, text);
    std::cerr << "variables: " << model.registry.n_decision() << " decision + "
              << model.registry.n_slack() << " slack = " << model.registry.n_total() << "\n";
    return kExitOk;
}

int cmd_solve(const std::string& instance_path, const PenaltyFlags& penalties,
              const ScheduleFlags& schedule, const std::string& out_path) {
    const ofisp::Instance inst = ofisp::load_instance(instance_path);
    ofisp::SolveSettings settings;
    penalties.apply(settings);
    schedule.apply(settings);
    const ofisp::RunReport report = ofisp::run_solve(inst, settings);
    emit(ofisp::report_to_json(inst, report), out_path);
    if (!report.feasible()) {
        std::cerr << "error: no hard-feasible sample found\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

int cmd_reduce(const std::string& midi_path, int machines, int k_max,
               const PenaltyFlags& penalties, const ScheduleFlags& schedule,
               const std::string& out_path, const std::string& report_path,
               const std::string& instance_path, const std::string& phrases_path) {
    const ofisp::Score score = ofisp::parse_midi_file(midi_path);
    for (const auto& w : score.warnings) std::cerr << "warning: " << w << "\n";

    ofisp::ReduceSettings settings;
    settings.machines = machines;
    settings.k_max = k_max;
    penalties.apply(settings.solve);
    schedule.apply(settings.solve);

    const ofisp::ReduceResult result = ofisp::run_reduce(score, settings);
    if (!instance_path.empty())
        ofisp::write_text_file(instance_path,
                               ofisp::instance_to_json(result.instance).dump(2) + "\n");
    if (!phrases_path.empty())
        ofisp::write_text_file(phrases_path,
                               ofisp::phrase_table_to_json(score, result.phrases).dump(2) + "\n");
    emit(ofisp::report_to_json(result.instance, result.report), report_path);
    if (!result.report.feasible()) {
        std::cerr << "error: no hard-feasible sample found\n";
        return kExitInfeasible;
    }
    ofisp::write_midi_file(out_path, result.midi);
    std::cerr << "wrote " << out_path << " (" << result.selected.size() << " of "
              << result.phrases.size() << " phrases kept)\n";
    return kExitOk;
}

int cmd_check(const std::string& instance_path, const std::string& solution_path) {
    const ofisp::Instance inst = ofisp::load_instance(instance_path);
    std::ifstream in(solution_path);
    if (!in) throw ofisp::InputError("cannot open " + solution_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ofisp::InputError(solution_path + ": " + e.what());
    }
    if (!doc.contains("selection")) throw ofisp::InputError("solution lacks a selection");
    const ofisp::Selection sel = ofisp::selection_from_json(inst, doc["selection"]);
    const ofisp::ViolationReport rep = ofisp::evaluate(inst, sel);
    std::cout << ofisp::report_to_json(rep).dump(2) << "\n";
    return rep.hard_violations > 0 ? kExitInfeasible : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-interval scheduling with minimal idle time: QUBO encoding, "
                 "simulated annealing, and MIDI score reduction"};
    app.require_subcommand(1);

    std::string midi_path, instance_path, solution_path, out_path, report_path;
    std::string instance_out, phrases_out;
    int k_max = 4;
    int machines = 2;
    PenaltyFlags penalties;
    ScheduleFlags schedule;

    auto* phrases = app.add_subcommand("phrases", "Segment a MIDI file into weighted phrases");
    phrases->add_option("midi", midi_path, "Input MIDI file")->required();
    phrases->add_option("--k-max", k_max, "Maximum phrase length in measures")
        ->check(CLI::PositiveNumber);
    phrases->add_option("--out", out_path, "Output path (default stdout)");

    auto* encode = app.add_subcommand("encode", "Compile an instance to a QUBO file");
    encode->add_option("instance", instance_path, "Instance JSON document")->required();
    penalties.attach(*encode);
    encode->add_option("--out", out_path, "Output path (default stdout)");

    auto* solve = app.add_subcommand("solve", "Encode, anneal and report solutions");
    solve->add_option("instance", instance_path, "Instance JSON document")->required();
    penalties.attach(*solve);
    schedule.attach(*solve);
    solve->add_option("--out", out_path, "Report path (default stdout)");

    auto* reduce = app.add_subcommand("reduce", "Reduce a MIDI score to --machines tracks");
    reduce->add_option("midi", midi_path, "Input MIDI file")->required();
    reduce->add_option("--machines", machines, "Number of output tracks")
        ->check(CLI::PositiveNumber);
    reduce->add_option("--k-max", k_max, "Maximum phrase length in measures")
        ->check(CLI::PositiveNumber);
    penalties.attach(*reduce);
    schedule.attach(*reduce);
    reduce->add_option("--out", out_path, "Reduced MIDI path")->required();
    reduce->add_option("--report", report_path, "Report path (default stdout)");
    reduce->add_option("--instance-out", instance_out, "Also write the scheduling instance");
    reduce->add_option("--phrases-out", phrases_out, "Also write the phrase table");

    auto* check = app.add_subcommand("check", "Evaluate a solution against an instance");
    check->add_option("instance", instance_path, "Instance JSON document")->required();
    check->add_option("solution", solution_path, "Solution JSON document")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (phrases->parsed()) return cmd_phrases(midi_path, k_max, out_path);
        if (encode->parsed()) return cmd_encode(instance_path, penalties, out_path);
        if (solve->parsed()) return cmd_solve(instance_path, penalties, schedule, out_path);
        if (reduce->parsed())
            return cmd_reduce(midi_path, machines, k_max, penalties, schedule, out_path,
                              report_path, instance_out, phrases_out);
        if (check->parsed()) return cmd_check(instance_path, solution_path);
    } catch (const ofisp::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ofisp::MidiError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
