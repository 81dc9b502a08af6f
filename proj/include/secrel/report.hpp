#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "secrel/pipeline.hpp"

// Config file handling, deterministic result export, and the command line
// front end.

namespace secrel {

// JSON with exactly the ScenarioConfig fields (nested "tolerances" object,
// "adversaries" array of {est: [x, y], radius: R}). Unknown or ill-typed
// keys are errors naming the key; missing keys keep defaults.
ScenarioConfig load_config(const std::filesystem::path& file);
ScenarioConfig config_from_json_text(const std::string& text);
std::string dump_config(const ScenarioConfig& cfg);  // canonical key order

// FNV-1a over the canonical dump; stable across runs and platforms.
std::uint64_t config_hash(const ScenarioConfig& cfg);

// Writes trajectory.csv, powers.csv, rates.csv, trace.csv, summary.json
// into dir (created if absent). Numbers at 9 significant digits, LF line
// endings; identical inputs produce byte-identical files.
void export_results(const Solution& sol, const SolutionReport& rep,
                    const AlgorithmTrace& trace, const ScenarioConfig& cfg,
                    const std::filesystem::path& dir);

// Reads trajectory.csv / powers.csv back into a Solution.
Solution import_solution(const std::filesystem::path& dir,
                         const ScenarioConfig& cfg);

// Exit codes: 0 success, 1 validation failure, 2 solver failure, 64 usage.
int run_cli(int argc, char** argv);

}  // namespace secrel
