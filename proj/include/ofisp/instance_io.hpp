#pragma once

// JSON serialization of instances, selections, solutions and phrase tables.
//
// Instance document:
//   { "machines": 1, "horizon": 6,
//     "jobs": [{"id": "b1", "start": 0, "end": 2, "weight": 5.0}, ...],
//     "exclusions": [["b1", "b3"], ...],            // optional
//     "eligibility": {"b1": [1, 2], ...} }          // optional
//
// Solution document:
//   { "selection": ["b1", "b2"], "assignment": {"b1": 1, ...} }

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofisp/assign.hpp"
#include "ofisp/core.hpp"
#include "ofisp/music.hpp"

namespace ofisp {

class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

inline nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json doc;
    doc["machines"] = inst.machines;
    doc["horizon"] = inst.horizon;
    doc["jobs"] = nlohmann::json::array();
    for (const Job& j : inst.jobs)
        doc["jobs"].push_back(
            {{"id", j.id}, {"start", j.start}, {"end", j.end}, {"weight", j.weight}});
    if (!inst.exclusions.empty()) {
        doc["exclusions"] = nlohmann::json::array();
        for (const auto& [a, b] : inst.exclusions)
            doc["exclusions"].push_back(nlohmann::json::array({a, b}));
    }
    if (!inst.eligibility.empty()) {
        doc["eligibility"] = nlohmann::json::object();
        for (const auto& [id, machines] : inst.eligibility) doc["eligibility"][id] = machines;
    }
    return doc;
}

inline Instance instance_from_json(const nlohmann::json& doc) {
    try {
        Instance inst;
        inst.machines = doc.at("machines").get<int>();
        inst.horizon = doc.at("horizon").get<int>();
        for (const auto& j : doc.at("jobs"))
            inst.jobs.push_back(Job{j.at("id").get<std::string>(), j.at("start").get<int>(),
                                    j.at("end").get<int>(), j.at("weight").get<double>()});
        if (doc.contains("exclusions"))
            for (const auto& pair : doc["exclusions"]) {
                if (!pair.is_array() || pair.size() != 2)
                    throw InputError("exclusions must be two-element arrays");
                inst.exclusions.emplace_back(pair[0].get<std::string>(),
                                             pair[1].get<std::string>());
            }
        if (doc.contains("eligibility"))
            for (const auto& [id, machines] : doc["eligibility"].items())
                inst.eligibility[id] = machines.get<std::vector<int>>();
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed instance document: ") + e.what());
    }
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return instance_from_json(doc);
}

inline nlohmann::json selection_to_json(const Instance& inst, const Selection& sel) {
    nlohmann::json ids = nlohmann::json::array();
    for (int i : sel.indices()) ids.push_back(inst.jobs[i].id);
    return ids;
}

inline Selection selection_from_json(const Instance& inst, const nlohmann::json& ids) {
    std::vector<std::string> names;
    try {
        names = ids.get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed selection: ") + e.what());
    }
    try {
        return Selection::of_ids(inst, names);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

inline nlohmann::json assignment_to_json(const Assignment& a) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [id, machine] : a.machine_of) doc[id] = machine;
    return doc;
}

inline nlohmann::json report_to_json(const ViolationReport& rep) {
    return {{"occupancy", rep.occupancy},
            {"hard_violations", rep.hard_violations},
            {"soft_violations", rep.soft_violations},
            {"total_weight", rep.total_weight}};
}

inline nlohmann::json phrase_table_to_json(const Score& score,
                                           const std::vector<Phrase>& phrases) {
    nlohmann::json doc;
    doc["ticks_per_quarter"] = score.ticks_per_quarter;
    doc["measures"] = score.measure_count();
    doc["phrases"] = nlohmann::json::array();
    for (const Phrase& p : phrases)
        doc["phrases"].push_back({{"id", phrase_job_id(p)},
                                  {"track", p.track},
                                  {"start_measure", p.start_measure},
                                  {"end_measure", p.end_measure},
                                  {"notes", p.notes.size()},
                                  {"pitch_entropy", p.pitch_entropy},
                                  {"ioi_entropy", p.ioi_entropy},
                                  {"weight", p.weight}});
    return doc;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

}  // namespace ofisp
