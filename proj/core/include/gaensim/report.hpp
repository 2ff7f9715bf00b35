#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaensim/adversary.hpp"
#include "gaensim/exposure.hpp"

namespace gaensim {

struct DeviceReport {
    std::string name;
    bool infected = false;
    bool notified = false;
    uint64_t storage_bytes = 0;
    size_t observation_records = 0;
    uint64_t sightings = 0;
    uint64_t malformed = 0;
    size_t rotations = 0;
    double rotation_min_s = 0.0;
    double rotation_mean_s = 0.0;
    double rotation_max_s = 0.0;
    ExposureSummary exposure;
};

struct RunReport {
    std::string scenario_name;
    std::string scenario_digest;
    uint64_t seed = 0;
    double duration_s = 0.0;
    uint64_t delivered_packets = 0;
    std::vector<DeviceReport> devices;
    std::vector<std::string> notifications;
    std::vector<AttackOutcome> attacks;
    bool invariants_ok = true;
    std::vector<std::string> invariant_failures;
};

enum class ReportFormat { Text, Json };

std::string emit_report(const RunReport& report, ReportFormat format);
RunReport parse_report_json(const std::string& text);

}  // namespace gaensim
