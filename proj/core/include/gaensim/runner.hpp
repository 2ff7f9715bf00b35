#pragma once

#include <string>

#include "gaensim/report.hpp"
#include "gaensim/scenario.hpp"
#include "gaensim/trace.hpp"
#include "gaensim/world.hpp"

namespace gaensim {

struct RunOptions {
    std::string trace_path;   // written when non-empty
    std::string capture_dir;  // per-sniffer capture logs when non-empty
    bool run_server_flow = true;
    bool run_attacks = true;
};

/// Full pipeline: simulate, then the upload/publish/download/detect flow
/// for scheduled infections, then any configured attacks, then invariant
/// checks over the trace (honest devices only).
RunReport run_scenario(const ScenarioConfig& scenario,
                       const RunOptions& options = {});

/// Same pipeline against an existing world the caller already ran.
RunReport finish_run(World& world, const RunOptions& options = {});

/// Replays an identifier-level attack over a serialized trace: sniffer logs
/// are rebuilt from recv events and ground truth from their src column.
AttackOutcome replay_attack(const TraceLog& trace, const AttackSpec& spec,
                            uint64_t seed);

}  // namespace gaensim
