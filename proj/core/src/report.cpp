#include "gaensim/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "gaensim/bytes.hpp"
#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

using json = nlohmann::ordered_json;

InfoLeaked info_from_string(const std::string& text) {
    if (text == "nearby_user_count") return InfoLeaked::NearbyUserCount;
    if (text == "movement_profile") return InfoLeaked::MovementProfile;
    if (text == "infection_status") return InfoLeaked::InfectionStatus;
    return InfoLeaked::None;
}

json window_to_json(const ContactWindow& window) {
    return json{{"key", to_hex(window.key_bytes)},
                {"start_ms", window.start_ms},
                {"end_ms", window.end_ms},
                {"min_attenuation_db", window.min_attenuation_db},
                {"duration_minutes", window.duration_minutes}};
}

json exposure_to_json(const ExposureSummary& summary) {
    json windows = json::array();
    for (const ContactWindow& window : summary.windows) {
        windows.push_back(window_to_json(window));
    }
    return json{{"matched_key_count", summary.matched_key_count},
                {"total_duration_minutes", summary.total_duration_minutes},
                {"max_single_duration_minutes",
                 summary.max_single_duration_minutes},
                {"windows", windows}};
}

ExposureSummary exposure_from_json(const json& node) {
    ExposureSummary summary;
    summary.matched_key_count = node.at("matched_key_count").get<size_t>();
    summary.total_duration_minutes =
        node.at("total_duration_minutes").get<double>();
    summary.max_single_duration_minutes =
        node.at("max_single_duration_minutes").get<double>();
    for (const json& raw : node.at("windows")) {
        ContactWindow window;
        Bytes key = from_hex(raw.at("key").get<std::string>());
        if (key.size() != window.key_bytes.size()) {
            throw ParseError("exposure window key has the wrong length");
        }
        std::copy(key.begin(), key.end(), window.key_bytes.begin());
        window.start_ms = raw.at("start_ms").get<int64_t>();
        window.end_ms = raw.at("end_ms").get<int64_t>();
        window.min_attenuation_db = raw.at("min_attenuation_db").get<double>();
        window.duration_minutes = raw.at("duration_minutes").get<double>();
        summary.windows.push_back(std::move(window));
    }
    return summary;
}

std::string format_seconds(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.1f", value);
    return buffer;
}

std::string emit_text(const RunReport& report) {
    std::ostringstream out;
    out << "scenario: " << report.scenario_name << "\n";
    out << "digest: " << report.scenario_digest << "\n";
    out << "seed: " << report.seed << "\n";
    out << "duration_s: " << format_seconds(report.duration_s) << "\n";
    out << "delivered_packets: " << report.delivered_packets << "\n";
    out << "invariants: " << (report.invariants_ok ? "ok" : "VIOLATED")
        << "\n";
    for (const std::string& failure : report.invariant_failures) {
        out << "  violation: " << failure << "\n";
    }
    out << "devices:\n";
    for (const DeviceReport& device : report.devices) {
        out << "  " << device.name << ": storage=" << device.storage_bytes
            << "B records=" << device.observation_records
            << " sightings=" << device.sightings
            << " rotations=" << device.rotations;
        if (device.rotations > 1) {
            out << " gaps_s=[" << format_seconds(device.rotation_min_s) << ", "
                << format_seconds(device.rotation_mean_s) << ", "
                << format_seconds(device.rotation_max_s) << "]";
        }
        if (device.infected) out << " infected";
        if (device.notified) out << " notified";
        if (device.exposure.matched_key_count > 0) {
            out << " exposure_minutes="
                << format_seconds(device.exposure.max_single_duration_minutes);
        }
        out << "\n";
    }
    out << "notifications: " << report.notifications.size();
    for (const std::string& name : report.notifications) {
        out << " " << name;
    }
    out << "\n";
    for (const AttackOutcome& attack : report.attacks) {
        out << "attack " << attack.threat_model
            << ": leaked=" << to_string(attack.info_leaked) << "\n";
        for (const auto& [key, value] : attack.metrics) {
            out << "  " << key << " = " << value << "\n";
        }
        for (const std::string& note : attack.notes) {
            out << "  note: " << note << "\n";
        }
    }
    return out.str();
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
    if (format == ReportFormat::Text) {
        return emit_text(report);
    }

    json devices = json::array();
    for (const DeviceReport& device : report.devices) {
        devices.push_back(
            json{{"name", device.name},
                 {"infected", device.infected},
                 {"notified", device.notified},
                 {"storage_bytes", device.storage_bytes},
                 {"observation_records", device.observation_records},
                 {"sightings", device.sightings},
                 {"malformed", device.malformed},
                 {"rotations", device.rotations},
                 {"rotation_min_s", device.rotation_min_s},
                 {"rotation_mean_s", device.rotation_mean_s},
                 {"rotation_max_s", device.rotation_max_s},
                 {"exposure", exposure_to_json(device.exposure)}});
    }
    json attacks = json::array();
    for (const AttackOutcome& attack : report.attacks) {
        json notes = json::array();
        for (const std::string& note : attack.notes) notes.push_back(note);
        attacks.push_back(json{{"threat_model", attack.threat_model},
                               {"info_leaked", to_string(attack.info_leaked)},
                               {"metrics", attack.metrics},
                               {"notes", notes}});
    }
    json root{{"scenario_name", report.scenario_name},
              {"scenario_digest", report.scenario_digest},
              {"seed", report.seed},
              {"duration_s", report.duration_s},
              {"delivered_packets", report.delivered_packets},
              {"devices", devices},
              {"notifications", report.notifications},
              {"attacks", attacks},
              {"invariants_ok", report.invariants_ok},
              {"invariant_failures", report.invariant_failures}};
    return root.dump(2) + "\n";
}

RunReport parse_report_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError(std::string("report is not valid json: ") +
                         err.what());
    }
    try {
        RunReport report;
        report.scenario_name = root.at("scenario_name").get<std::string>();
        report.scenario_digest = root.at("scenario_digest").get<std::string>();
        report.seed = root.at("seed").get<uint64_t>();
        report.duration_s = root.at("duration_s").get<double>();
        report.delivered_packets =
            root.at("delivered_packets").get<uint64_t>();
        for (const json& raw : root.at("devices")) {
            DeviceReport device;
            device.name = raw.at("name").get<std::string>();
            device.infected = raw.at("infected").get<bool>();
            device.notified = raw.at("notified").get<bool>();
            device.storage_bytes = raw.at("storage_bytes").get<uint64_t>();
            device.observation_records =
                raw.at("observation_records").get<size_t>();
            device.sightings = raw.at("sightings").get<uint64_t>();
            device.malformed = raw.at("malformed").get<uint64_t>();
            device.rotations = raw.at("rotations").get<size_t>();
            device.rotation_min_s = raw.at("rotation_min_s").get<double>();
            device.rotation_mean_s = raw.at("rotation_mean_s").get<double>();
            device.rotation_max_s = raw.at("rotation_max_s").get<double>();
            device.exposure = exposure_from_json(raw.at("exposure"));
            report.devices.push_back(std::move(device));
        }
        for (const json& raw : root.at("notifications")) {
            report.notifications.push_back(raw.get<std::string>());
        }
        for (const json& raw : root.at("attacks")) {
            AttackOutcome attack;
            attack.threat_model = raw.at("threat_model").get<std::string>();
            attack.info_leaked =
                info_from_string(raw.at("info_leaked").get<std::string>());
            for (const auto& [key, value] : raw.at("metrics").items()) {
                attack.metrics[key] = value.get<double>();
            }
            for (const json& note : raw.at("notes")) {
                attack.notes.push_back(note.get<std::string>());
            }
            report.attacks.push_back(std::move(attack));
        }
        report.invariants_ok = root.at("invariants_ok").get<bool>();
        for (const json& raw : root.at("invariant_failures")) {
            report.invariant_failures.push_back(raw.get<std::string>());
        }
        return report;
    } catch (const json::exception& err) {
        throw ParseError(std::string("report json missing fields: ") +
                         err.what());
    }
}

}  // namespace gaensim
