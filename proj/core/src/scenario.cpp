#include "gaensim/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gaensim/bytes.hpp"
#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

const std::set<std::string> kAttackModels = {
    "walking-trail", "neighbor", "stalker1",
    "stalker2",      "orgcrime1", "orgcrime2"};

std::string trim(std::string_view text) {
    size_t begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    size_t end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

double parse_f64(const std::string& value, const std::string& path) {
    double out = 0.0;
    auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() ||
        !std::isfinite(out)) {
        throw ConfigError(path, "expected a number, got '" + value + "'");
    }
    return out;
}

int64_t parse_i64(const std::string& value, const std::string& path) {
    int64_t out = 0;
    auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(path, "expected an integer, got '" + value + "'");
    }
    return out;
}

uint64_t parse_u64(const std::string& value, const std::string& path) {
    uint64_t out = 0;
    auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(path,
                          "expected an unsigned integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& path) {
    if (value == "true" || value == "on" || value == "yes" || value == "1") {
        return true;
    }
    if (value == "false" || value == "off" || value == "no" || value == "0") {
        return false;
    }
    throw ConfigError(path, "expected a boolean, got '" + value + "'");
}

int64_t seconds_to_ms(double seconds) {
    return static_cast<int64_t>(std::llround(seconds * 1000.0));
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> fields;
    std::stringstream stream(value);
    std::string field;
    while (std::getline(stream, field, ',')) {
        fields.push_back(trim(field));
    }
    return fields;
}

struct Parser {
    ScenarioConfig config;
    bool seed_seen = false;
    std::set<std::string> device_names;
    std::set<std::string> sniffer_names;

    void scenario_key(const std::string& key, const std::string& value,
                      const std::string& path) {
        if (key == "seed") {
            config.seed = parse_u64(value, path);
            seed_seen = true;
        } else if (key == "duration_s") {
            config.duration_ms = seconds_to_ms(parse_f64(value, path));
            if (config.duration_ms <= 0) {
                throw ConfigError(path, "duration must be positive");
            }
        } else if (key == "name") {
            config.name = value;
        } else {
            throw ConfigError(path, "unknown key");
        }
    }

    void radio_key(const std::string& key, const std::string& value,
                   const std::string& path) {
        if (key == "reference_loss_db") {
            config.radio.reference_loss_db = parse_f64(value, path);
        } else if (key == "path_loss_exponent") {
            config.radio.path_loss_exponent = parse_f64(value, path);
        } else if (key == "saturation_db") {
            config.radio.saturation_db = parse_f64(value, path);
        } else if (key == "reception_floor_db") {
            config.radio.reception_floor_db = parse_f64(value, path);
        } else if (key == "min_distance_m") {
            config.radio.min_distance_m = parse_f64(value, path);
            if (config.radio.min_distance_m <= 0.0) {
                throw ConfigError(path, "minimum distance must be positive");
            }
        } else {
            throw ConfigError(path, "unknown key");
        }
    }

    void exposure_key(const std::string& key, const std::string& value,
                      const std::string& path) {
        if (key == "min_duration_minutes") {
            config.exposure.min_duration_minutes = parse_f64(value, path);
        } else if (key == "attenuation_threshold_db") {
            config.exposure.attenuation_threshold_db = parse_f64(value, path);
        } else if (key == "interval_tolerance") {
            config.exposure.interval_tolerance =
                static_cast<uint32_t>(parse_u64(value, path));
        } else {
            throw ConfigError(path, "unknown key");
        }
    }

    void server_key(const std::string& key, const std::string& value,
                    const std::string& path) {
        if (key == "region") {
            config.server.region = value;
        } else if (key == "pin_expiry_s") {
            config.server.pin_expiry_ms = seconds_to_ms(parse_f64(value, path));
            if (config.server.pin_expiry_ms <= 0) {
                throw ConfigError(path, "expiry must be positive");
            }
        } else {
            throw ConfigError(path, "unknown key");
        }
    }

    void device_key(DeviceSpec& device, const std::string& key,
                    const std::string& value, const std::string& path) {
        if (key == "x") {
            device.position.x = parse_f64(value, path);
        } else if (key == "y") {
            device.position.y = parse_f64(value, path);
        } else if (key == "tx_power_dbm") {
            int64_t raw = parse_i64(value, path);
            if (raw < -127 || raw > 127) {
                throw ConfigError(path, "tx power out of range");
            }
            device.tx_power_dbm = static_cast<int8_t>(raw);
        } else if (key == "extra_attenuation_db") {
            device.extra_attenuation_db = parse_f64(value, path);
        } else if (key == "advertising_interval_ms") {
            device.advertising_interval_ms = parse_i64(value, path);
            if (device.advertising_interval_ms <= 0) {
                throw ConfigError(path, "interval must be positive");
            }
        } else if (key == "scan_period_s") {
            device.scan_period_ms = seconds_to_ms(parse_f64(value, path));
            if (device.scan_period_ms <= 0) {
                throw ConfigError(path, "scan period must be positive");
            }
        } else if (key == "scan_window_s") {
            device.scan_window_ms = seconds_to_ms(parse_f64(value, path));
            if (device.scan_window_ms <= 0) {
                throw ConfigError(path, "scan window must be positive");
            }
        } else if (key == "rotation_min_s") {
            device.rotation_min_ms = seconds_to_ms(parse_f64(value, path));
        } else if (key == "rotation_max_s") {
            device.rotation_max_ms = seconds_to_ms(parse_f64(value, path));
        } else if (key == "enabled") {
            device.enabled = parse_bool(value, path);
        } else if (key == "async_fault") {
            device.async_fault = parse_bool(value, path);
        } else if (key == "record_overhead_bytes") {
            device.record_overhead_bytes =
                static_cast<uint32_t>(parse_u64(value, path));
        } else if (key == "infected_at_s") {
            device.infected_at_ms = seconds_to_ms(parse_f64(value, path));
        } else if (key == "toggle") {
            auto fields = split_csv(value);
            if (fields.size() != 2) {
                throw ConfigError(path, "expected 'time_s,on|off'");
            }
            ToggleSpec toggle;
            toggle.time_ms = seconds_to_ms(parse_f64(fields[0], path));
            toggle.enabled = parse_bool(fields[1], path);
            device.toggles.push_back(toggle);
        } else if (key == "waypoint") {
            auto fields = split_csv(value);
            if (fields.size() != 3) {
                throw ConfigError(path, "expected 'time_s,x,y'");
            }
            WaypointSpec waypoint;
            waypoint.time_ms = seconds_to_ms(parse_f64(fields[0], path));
            waypoint.position.x = parse_f64(fields[1], path);
            waypoint.position.y = parse_f64(fields[2], path);
            device.waypoints.push_back(waypoint);
        } else {
            throw ConfigError(path, "unknown key");
        }
    }

    void sniffer_key(SnifferSpec& sniffer, const std::string& key,
                     const std::string& value, const std::string& path) {
        if (key == "x") {
            sniffer.position.x = parse_f64(value, path);
        } else if (key == "y") {
            sniffer.position.y = parse_f64(value, path);
        } else if (key == "location") {
            sniffer.location = value;
        } else if (key == "scan_period_s") {
            sniffer.scan_period_ms = seconds_to_ms(parse_f64(value, path));
            if (sniffer.scan_period_ms < 0) {
                throw ConfigError(path, "scan period must not be negative");
            }
        } else if (key == "scan_window_s") {
            sniffer.scan_window_ms = seconds_to_ms(parse_f64(value, path));
            if (sniffer.scan_window_ms < 0) {
                throw ConfigError(path, "scan window must not be negative");
            }
        } else {
            throw ConfigError(path, "unknown key");
        }
    }

    void attack_key(AttackSpec& attack, const std::string& key,
                    const std::string& value, const std::string& path) {
        if (key == "model") {
            if (!kAttackModels.count(value)) {
                throw ConfigError(path, "unknown threat model '" + value + "'");
            }
            attack.model = value;
        } else if (key == "window_minutes") {
            attack.window_minutes = parse_f64(value, path);
            if (attack.window_minutes <= 0.0) {
                throw ConfigError(path, "window must be positive");
            }
        } else if (key == "candidate_profiles") {
            attack.candidate_profiles =
                static_cast<size_t>(parse_u64(value, path));
            if (attack.candidate_profiles < 1) {
                throw ConfigError(path, "need at least one candidate profile");
            }
        } else if (key == "target") {
            attack.target = value;
        } else if (key == "compromised") {
            attack.compromised = parse_bool(value, path);
        } else if (key == "side_channel") {
            attack.side_channel = parse_bool(value, path);
        } else {
            throw ConfigError(path, "unknown key");
        }
    }
};

}  // namespace

ScenarioConfig parse_scenario_text(std::string_view text) {
    Parser parser;
    std::string section;
    DeviceSpec* device = nullptr;
    SnifferSpec* sniffer = nullptr;
    AttackSpec* attack = nullptr;

    size_t line_number = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_number;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("line " + std::to_string(line_number),
                                  "malformed section header '" + line + "'");
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            device = nullptr;
            sniffer = nullptr;
            attack = nullptr;
            if (section.rfind("device.", 0) == 0) {
                std::string name = section.substr(7);
                if (name.empty()) {
                    throw ConfigError(section, "device needs a name");
                }
                if (!parser.device_names.insert(name).second) {
                    throw ConfigError(section, "duplicate device name");
                }
                parser.config.devices.emplace_back();
                parser.config.devices.back().name = name;
                device = &parser.config.devices.back();
            } else if (section.rfind("sniffer.", 0) == 0) {
                std::string name = section.substr(8);
                if (name.empty()) {
                    throw ConfigError(section, "sniffer needs a name");
                }
                if (!parser.sniffer_names.insert(name).second) {
                    throw ConfigError(section, "duplicate sniffer name");
                }
                parser.config.sniffers.emplace_back();
                parser.config.sniffers.back().name = name;
                sniffer = &parser.config.sniffers.back();
            } else if (section.rfind("attack.", 0) == 0) {
                parser.config.attacks.emplace_back();
                attack = &parser.config.attacks.back();
            } else if (section != "scenario" && section != "radio" &&
                       section != "exposure" && section != "server") {
                throw ConfigError(section, "unknown section");
            }
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(section.empty() ? "line " + std::to_string(
                                                    line_number)
                                              : section,
                              "expected 'key = value', got '" + line + "'");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(section, "missing key before '='");
        }
        std::string path = section + "." + key;

        if (device != nullptr) {
            parser.device_key(*device, key, value, path);
        } else if (sniffer != nullptr) {
            parser.sniffer_key(*sniffer, key, value, path);
        } else if (attack != nullptr) {
            parser.attack_key(*attack, key, value, path);
        } else if (section == "scenario") {
            parser.scenario_key(key, value, path);
        } else if (section == "radio") {
            parser.radio_key(key, value, path);
        } else if (section == "exposure") {
            parser.exposure_key(key, value, path);
        } else if (section == "server") {
            parser.server_key(key, value, path);
        } else {
            throw ConfigError(key, "key outside any section");
        }
    }

    if (!parser.seed_seen) {
        throw ConfigError("scenario.seed", "scenario requires an explicit seed");
    }
    for (DeviceSpec& spec : parser.config.devices) {
        std::string path = "device." + spec.name;
        if (spec.rotation_min_ms < 1000 ||
            spec.rotation_max_ms < spec.rotation_min_ms) {
            throw ConfigError(path + ".rotation_min_s",
                              "rotation bounds are inconsistent");
        }
        if (spec.scan_window_ms > spec.scan_period_ms) {
            throw ConfigError(path + ".scan_window_s",
                              "scan window exceeds the scan period");
        }
        if (spec.infected_at_ms &&
            (*spec.infected_at_ms < 0 ||
             *spec.infected_at_ms >= parser.config.duration_ms)) {
            throw ConfigError(path + ".infected_at_s",
                              "infection time falls outside the run");
        }
        std::sort(spec.toggles.begin(), spec.toggles.end(),
                  [](const ToggleSpec& a, const ToggleSpec& b) {
                      return a.time_ms < b.time_ms;
                  });
        std::sort(spec.waypoints.begin(), spec.waypoints.end(),
                  [](const WaypointSpec& a, const WaypointSpec& b) {
                      return a.time_ms < b.time_ms;
                  });
    }
    for (const SnifferSpec& spec : parser.config.sniffers) {
        if (spec.scan_period_ms > 0 &&
            spec.scan_window_ms > spec.scan_period_ms) {
            throw ConfigError("sniffer." + spec.name + ".scan_window_s",
                              "scan window exceeds the scan period");
        }
        if (spec.scan_period_ms > 0 && spec.scan_window_ms <= 0) {
            throw ConfigError("sniffer." + spec.name + ".scan_window_s",
                              "duty-cycled sniffer needs a scan window");
        }
    }
    for (const AttackSpec& spec : parser.config.attacks) {
        if (spec.model.empty()) {
            throw ConfigError("attack.model", "attack needs a threat model");
        }
        if (spec.model == "orgcrime2") {
            if (spec.target.empty()) {
                throw ConfigError("attack.target",
                                  "orgcrime2 needs a target device");
            }
            if (!parser.device_names.count(spec.target)) {
                throw ConfigError("attack.target",
                                  "unknown device '" + spec.target + "'");
            }
        }
    }

    std::span<const uint8_t> bytes(
        reinterpret_cast<const uint8_t*>(text.data()), text.size());
    parser.config.digest = sha256_hex(bytes);
    return parser.config;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("scenario.file", "cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ScenarioConfig config = parse_scenario_text(buffer.str());
    if (config.name.empty()) {
        config.name = std::filesystem::path(path).stem().string();
    }
    return config;
}

std::string sha256_hex(std::span<const uint8_t> data) {
    std::array<uint8_t, 32> digest{};
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &length,
                   EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    return to_hex(std::span<const uint8_t>(digest.data(), length));
}

}  // namespace gaensim
