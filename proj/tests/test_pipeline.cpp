// Tests for the orchestration layer: solve reports, policy handling,
// instance/solution serialization, and the in-memory reduction pipeline.

#include "ofisp/pipeline.hpp"

#include <gtest/gtest.h>

#include <set>

#include "ofisp/instance_io.hpp"
#include "test_util.hpp"

namespace ofisp {
namespace {

using test::gap_fixture;

SolveSettings oracle_settings() {
    SolveSettings s;
    s.use_oracle = true;
    return s;
}

TEST(RunSolve, GapFixtureDefaultsPickTheGaplessSchedule) {
    const auto report = run_solve(gap_fixture(), oracle_settings());
    ASSERT_TRUE(report.feasible());
    EXPECT_DOUBLE_EQ(report.best->report.total_weight, 18.0);
    EXPECT_EQ(report.best->report.soft_violations, 0);
    EXPECT_EQ(report.best->assignment.machines_used, 1);
    EXPECT_EQ(report.total_vars, 10);
    EXPECT_EQ(report.headline_policy, "energy");
}

TEST(RunSolve, DisablingTheSoftPenaltyRestoresTheWeightOptimum) {
    SolveSettings settings = oracle_settings();
    settings.p2 = 0.0;
    const auto report = run_solve(gap_fixture(), settings);
    ASSERT_TRUE(report.feasible());
    EXPECT_DOUBLE_EQ(report.best->report.total_weight, 23.0);
    EXPECT_EQ(report.best->report.soft_violations, 1);
}

TEST(RunSolve, AnnealerPathIsDeterministicPerSeed) {
    SolveSettings settings;
    settings.schedule.reads = 32;
    settings.schedule.sweeps = 200;
    settings.schedule.seed = 11;
    const auto a = run_solve(gap_fixture(), settings);
    const auto b = run_solve(gap_fixture(), settings);
    ASSERT_TRUE(a.feasible());
    ASSERT_TRUE(b.feasible());
    EXPECT_EQ(a.best->selection, b.best->selection);
    EXPECT_DOUBLE_EQ(a.best->energy, b.best->energy);
    EXPECT_EQ(report_to_json(gap_fixture(), a).at("solutions"),
              report_to_json(gap_fixture(), b).at("solutions"));
}

TEST(RunSolve, PolicyFlagSelectsTheHeadline) {
    SolveSettings settings = oracle_settings();
    settings.schedule.reads = 64;
    settings.schedule.sweeps = 200;
    settings.use_oracle = false;
    settings.policy = SelectPolicy::MaxWeightFeasible;
    const auto report = run_solve(gap_fixture(), settings);
    ASSERT_TRUE(report.feasible());
    EXPECT_EQ(report.headline_policy, "max-weight");
    EXPECT_DOUBLE_EQ(report.best->report.total_weight, 23.0);  // soft gap accepted

    settings.policy = SelectPolicy::MinSoft;
    const auto min_soft = run_solve(gap_fixture(), settings);
    ASSERT_TRUE(min_soft.feasible());
    EXPECT_EQ(min_soft.best->report.soft_violations, 0);
    EXPECT_DOUBLE_EQ(min_soft.best->report.total_weight, 18.0);
}

TEST(RunSolve, ReportNumbersRecomputeFromTheirArtifacts) {
    SolveSettings settings;
    settings.schedule.reads = 16;
    settings.schedule.sweeps = 150;
    const Instance inst = gap_fixture();
    const auto report = run_solve(inst, settings);
    for (const auto* view : {&report.best, &report.max_weight, &report.min_soft}) {
        if (!view->has_value()) continue;
        const ViolationReport fresh = evaluate(inst, (*view)->selection);
        EXPECT_DOUBLE_EQ(fresh.total_weight, (*view)->report.total_weight);
        EXPECT_EQ(fresh.hard_violations, (*view)->report.hard_violations);
        EXPECT_EQ(fresh.soft_violations, (*view)->report.soft_violations);
        EXPECT_EQ((*view)->assignment.machines_used,
                  static_cast<int>([&] {
                      std::set<int> machines;
                      for (const auto& [id, m] : (*view)->assignment.machine_of)
                          machines.insert(m);
                      return machines.size();
                  }()));
    }
}

TEST(RunSolve, RejectsInvalidInstancesAndPenalties) {
    Instance bad = gap_fixture();
    bad.jobs[0].end = bad.jobs[0].start;
    EXPECT_THROW(run_solve(bad, oracle_settings()), InputError);

    SolveSettings settings = oracle_settings();
    settings.p1 = 1.0;
    settings.p2 = 2.0;
    EXPECT_THROW(run_solve(gap_fixture(), settings), InputError);

    Instance empty;
    empty.horizon = 3;
    EXPECT_THROW(run_solve(empty, oracle_settings()), InputError);
}

TEST(RunSolve, UnidenticalInstanceReportsMachinePairs) {
    Instance inst;
    inst.machines = 2;
    inst.horizon = 4;
    inst.jobs = {Job{"a", 0, 2, 2.0}, Job{"b", 2, 4, 3.0}, Job{"c", 0, 4, 1.0}};
    inst.eligibility["a"] = {1};
    inst.eligibility["b"] = {1};
    const auto report = run_solve(inst, oracle_settings());
    ASSERT_TRUE(report.feasible());
    EXPECT_EQ(report.decision_vars, 6);
    const auto& assignment = report.best->assignment.machine_of;
    if (assignment.count("a")) EXPECT_EQ(assignment.at("a"), 1);
    if (assignment.count("b")) EXPECT_EQ(assignment.at("b"), 1);
}

TEST(InstanceIo, JsonRoundTrip) {
    Instance inst = gap_fixture();
    inst.exclusions.emplace_back("b1", "b3");
    inst.eligibility["b2"] = {1};
    const Instance back = instance_from_json(instance_to_json(inst));
    EXPECT_EQ(back.machines, inst.machines);
    EXPECT_EQ(back.horizon, inst.horizon);
    ASSERT_EQ(back.jobs.size(), inst.jobs.size());
    for (std::size_t i = 0; i < inst.jobs.size(); ++i) {
        EXPECT_EQ(back.jobs[i].id, inst.jobs[i].id);
        EXPECT_EQ(back.jobs[i].start, inst.jobs[i].start);
        EXPECT_EQ(back.jobs[i].end, inst.jobs[i].end);
        EXPECT_DOUBLE_EQ(back.jobs[i].weight, inst.jobs[i].weight);
    }
    EXPECT_EQ(back.exclusions, inst.exclusions);
    EXPECT_EQ(back.eligibility, inst.eligibility);
}

TEST(InstanceIo, MalformedDocumentsRaiseInputError) {
    EXPECT_THROW(instance_from_json(nlohmann::json::object()), InputError);
    EXPECT_THROW(instance_from_json(nlohmann::json::parse(
                     R"({"machines": 1, "horizon": 2, "jobs": [{"id": "a"}]})")),
                 InputError);
    EXPECT_THROW(load_instance("/nonexistent/file.json"), InputError);
}

TEST(RunReduce, GenerousMachineCountKeepsEveryPhrase) {
    // two fully overlapping tracks, three machines: nothing needs dropping
    std::vector<NoteEvent> upper, lower;
    for (int i = 0; i < 8; ++i) upper.push_back(NoteEvent{i * 480, 480, 70 + (i % 3), 80, 0});
    for (int i = 0; i < 8; ++i) lower.push_back(NoteEvent{i * 480, 480, 50 + (i % 4), 80, 1});
    Score score;
    score.ticks_per_quarter = 480;
    score.time_signatures = {TimeSignature{0, 4, 4}};
    score.tracks = {upper, lower};
    score.measure_boundaries = measure_grid(score.time_signatures, 480, score.end_tick());

    ReduceSettings settings;
    settings.machines = 3;
    settings.solve.use_oracle = true;
    const auto result = run_reduce(score, settings);
    ASSERT_TRUE(result.report.feasible());
    EXPECT_EQ(result.selected.size(), result.phrases.size());
    EXPECT_GT(result.report.best->report.soft_violations, 0);  // occupancy stays below 3
}

TEST(RunReduce, TwoTrackScoreOntoOneMachine) {
    // two alternating tracks over four measures
    std::vector<NoteEvent> upper, lower;
    for (int i = 0; i < 8; ++i) upper.push_back(NoteEvent{i * 480, 480, 70 + (i % 3), 80, 0});
    for (int i = 0; i < 8; ++i)
        lower.push_back(NoteEvent{3840 + i * 480, 480, 50 + (i % 4), 80, 1});
    Score score;
    score.ticks_per_quarter = 480;
    score.time_signatures = {TimeSignature{0, 4, 4}};
    score.tracks = {upper, lower};
    score.measure_boundaries = measure_grid(score.time_signatures, 480, score.end_tick());

    ReduceSettings settings;
    settings.machines = 1;
    settings.solve.use_oracle = true;
    const auto result = run_reduce(score, settings);
    ASSERT_TRUE(result.report.feasible());
    EXPECT_FALSE(result.selected.empty());
    EXPECT_FALSE(result.midi.empty());

    const Score reduced = parse_midi(result.midi);
    EXPECT_EQ(reduced.tracks.size(), 2u);  // conductor + 1 machine
}

}  // namespace
}  // namespace ofisp
