#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaensim/exposure.hpp"
#include "gaensim/radio.hpp"

namespace gaensim {

struct ToggleSpec {
    int64_t time_ms = 0;
    bool enabled = false;
};

struct WaypointSpec {
    int64_t time_ms = 0;
    Position position{};
};

struct DeviceSpec {
    std::string name;
    Position position{};
    int8_t tx_power_dbm = -20;
    double extra_attenuation_db = 0.0;
    int64_t advertising_interval_ms = 250;
    int64_t scan_period_ms = 240'000;
    int64_t scan_window_ms = 4'000;
    int64_t rotation_min_ms = 600'000;
    int64_t rotation_max_ms = 1'200'000;
    bool enabled = true;
    bool async_fault = false;
    uint32_t record_overhead_bytes = 64;
    std::optional<int64_t> infected_at_ms;
    std::vector<ToggleSpec> toggles;
    std::vector<WaypointSpec> waypoints;
};

struct SnifferSpec {
    std::string name;
    Position position{};
    std::string location;        // side-channel label, empty if none
    int64_t scan_period_ms = 0;  // 0 means always listening
    int64_t scan_window_ms = 0;
};

struct AttackSpec {
    std::string model;  // walking-trail|neighbor|stalker1|stalker2|orgcrime1|orgcrime2
    double window_minutes = 15.0;
    size_t candidate_profiles = 10;
    std::string target;  // device name, orgcrime2 only
    bool compromised = false;
    bool side_channel = true;
};

struct ServerSpec {
    std::string region = "US-VA";
    int64_t pin_expiry_ms = 86'400'000;
};

struct ScenarioConfig {
    uint64_t seed = 0;
    int64_t duration_ms = 86'400'000;
    std::string name;
    RadioModel radio{};
    ExposureConfig exposure{};
    ServerSpec server{};
    std::vector<DeviceSpec> devices;
    std::vector<SnifferSpec> sniffers;
    std::vector<AttackSpec> attacks;
    std::string digest;  // sha256 of the source text
};

/// Parses the line-oriented `key = value` format with `[section]` headers.
/// Unknown keys, bad values, or a missing seed raise ConfigError carrying
/// the "section.key" path.
ScenarioConfig parse_scenario_text(std::string_view text);
ScenarioConfig load_scenario_file(const std::string& path);

std::string sha256_hex(std::span<const uint8_t> data);

}  // namespace gaensim
