#include "gaensim/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "gaensim/audit.hpp"
#include "gaensim/errors.hpp"
#include "gaensim/exposure.hpp"
#include "gaensim/server.hpp"

namespace gaensim {

namespace {

std::vector<SnifferEntry> merged_logs(const std::vector<SnifferNode>& sniffers) {
    std::vector<SnifferEntry> log;
    for (const SnifferNode& sniffer : sniffers) {
        log.insert(log.end(), sniffer.log.begin(), sniffer.log.end());
    }
    std::stable_sort(log.begin(), log.end(),
                     [](const SnifferEntry& a, const SnifferEntry& b) {
                         return a.time_ms < b.time_ms;
                     });
    return log;
}

std::string format_seconds(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.1f", value);
    return buffer;
}

AttackOutcome neighbor_report(const NearbyEstimate& estimate,
                              size_t actual_devices) {
    AttackOutcome outcome;
    outcome.threat_model = "neighbor";
    outcome.info_leaked = estimate.estimate > 0 ? InfoLeaked::NearbyUserCount
                                                : InfoLeaked::None;
    outcome.metrics["windows"] = static_cast<double>(estimate.window_count);
    outcome.metrics["naive_distinct_total"] =
        static_cast<double>(estimate.naive_distinct_total);
    outcome.metrics["naive_mean_per_window"] = estimate.naive_mean_per_window;
    outcome.metrics["corrected_median"] = estimate.corrected_median;
    outcome.metrics["estimate"] = static_cast<double>(estimate.estimate);
    outcome.metrics["actual_devices"] = static_cast<double>(actual_devices);
    outcome.notes.push_back(
        "distinct identifiers overcount users; the rotation multiplicity is "
        "divided out before taking the median");
    return outcome;
}

AttackOutcome unavailable_report(const std::string& model,
                                 const std::string& reason) {
    AttackOutcome outcome;
    outcome.threat_model = model;
    outcome.info_leaked = InfoLeaked::None;
    outcome.notes.push_back(reason);
    return outcome;
}

AttackOutcome run_attack(World& world, const AttackSpec& spec, size_t index,
                         const std::vector<DiagnosisKey>& published) {
    Rng rng = make_stream(world.scenario().seed, "attack", index);
    std::vector<SnifferEntry> log = merged_logs(world.sniffers());

    if (spec.model == "walking-trail" || spec.model == "stalker1") {
        return run_walking_trail(log, spec.model);
    }
    if (spec.model == "neighbor") {
        NearbyEstimate estimate =
            estimate_nearby_users(log, spec.window_minutes);
        return neighbor_report(estimate, world.devices().size());
    }
    if (spec.model == "stalker2") {
        StalkerOutcome outcome =
            stalker_link(log, world.ground_truth(), rng);
        return stalker_outcome_report(outcome);
    }
    if (spec.model == "orgcrime1") {
        if (published.empty()) {
            return unavailable_report(spec.model,
                                      "no diagnosis keys were published");
        }
        SideChannel side_channel;
        side_channel.available = spec.side_channel;
        for (const SnifferNode& sniffer : world.sniffers()) {
            if (!sniffer.location.empty()) {
                side_channel.sniffer_locations[sniffer.name] = sniffer.location;
            }
        }
        OrgCrimeOutcome outcome = org_crime_profile(
            world.sniffers(), published, side_channel, spec.candidate_profiles,
            world.ground_truth(), rng);
        return org_crime_outcome_report(outcome, spec.candidate_profiles);
    }
    if (spec.model == "orgcrime2") {
        Device* target = world.device_by_name(spec.target);
        if (target == nullptr) {
            return unavailable_report(spec.model,
                                      "target device '" + spec.target +
                                          "' does not exist");
        }
        try {
            return org_crime_device_read(*target, spec.compromised);
        } catch (const AuthorizationError& err) {
            AttackOutcome blocked;
            blocked.threat_model = spec.model;
            blocked.info_leaked = InfoLeaked::None;
            blocked.metrics["attempted"] = 1.0;
            blocked.metrics["succeeded"] = 0.0;
            blocked.notes.push_back(err.what());
            return blocked;
        }
    }
    return unavailable_report(spec.model, "unknown threat model");
}

void write_captures(World& world, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const SnifferNode& sniffer : world.sniffers()) {
        std::vector<CaptureRecord> records;
        records.reserve(sniffer.log.size());
        for (const SnifferEntry& entry : sniffer.log) {
            CaptureRecord record;
            record.timestamp_s = static_cast<double>(entry.time_ms) / 1000.0;
            record.address = entry.address;
            std::copy_n(entry.payload.begin(),
                        std::min(entry.payload.size(), record.payload.size()),
                        record.payload.begin());
            records.push_back(std::move(record));
        }
        std::filesystem::path path =
            std::filesystem::path(dir) / (sniffer.name + ".capture");
        std::ofstream out(path);
        if (!out) {
            throw ConfigError("capture_dir",
                              "cannot write '" + path.string() + "'");
        }
        out << format_capture(records);
    }
}

void check_invariants(World& world, RunReport& report) {
    const ScenarioConfig& scenario = world.scenario();
    std::map<std::string, const DeviceSpec*> specs;
    for (const DeviceSpec& spec : scenario.devices) {
        specs[spec.name] = &spec;
    }

    std::set<std::string> toggled;
    std::map<std::string, std::vector<int64_t>> rotations;
    std::map<std::string, std::set<std::string>> addr_to_payload;
    std::map<std::string, std::set<std::string>> payload_to_addr;

    for (const TraceEvent& event : world.trace().events()) {
        if (event.event_type == "toggle") {
            toggled.insert(event.src);
        } else if (event.event_type == "rotate" ||
                   event.event_type == "addrswap") {
            if (event.event_type == "rotate") {
                rotations[event.src].push_back(event.time_ms);
            }
            auto it = specs.find(event.src);
            if (it != specs.end() && !it->second->async_fault) {
                addr_to_payload[event.address_hex].insert(event.payload_hex);
                payload_to_addr[event.payload_hex].insert(event.address_hex);
            }
        }
    }

    for (const auto& [address, payloads] : addr_to_payload) {
        if (payloads.size() > 1) {
            report.invariant_failures.push_back(
                "address " + address + " advertised " +
                std::to_string(payloads.size()) + " distinct payloads");
        }
    }
    for (const auto& [payload, addresses] : payload_to_addr) {
        if (addresses.size() > 1) {
            report.invariant_failures.push_back(
                "payload " + payload + " advertised under " +
                std::to_string(addresses.size()) + " distinct addresses");
        }
    }

    for (const auto& [name, times] : rotations) {
        if (toggled.count(name)) continue;
        auto it = specs.find(name);
        if (it == specs.end()) continue;
        int64_t min_ms = it->second->rotation_min_ms;
        int64_t max_ms = it->second->rotation_max_ms;
        for (size_t i = 1; i < times.size(); ++i) {
            int64_t gap = times[i] - times[i - 1];
            if (gap < min_ms || gap > max_ms) {
                report.invariant_failures.push_back(
                    name + " rotated after " + format_seconds(gap / 1000.0) +
                    " s, outside [" + format_seconds(min_ms / 1000.0) + ", " +
                    format_seconds(max_ms / 1000.0) + "]");
            }
        }
    }

    for (const Device& device : world.devices()) {
        if (device.staged_keys().empty()) continue;
        ExposureSummary summary = detect_exposure(device, scenario.exposure);
        std::vector<MatchPair> oracle = match_oracle(
            device.observations(), device.staged_keys(), scenario.exposure);
        if (summary.matches != oracle) {
            report.invariant_failures.push_back(
                device.name() + ": indexed matcher disagrees with the "
                                "brute-force oracle");
        }
    }

    report.invariants_ok = report.invariant_failures.empty();
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& scenario,
                       const RunOptions& options) {
    World world(scenario);
    world.run();
    return finish_run(world, options);
}

RunReport finish_run(World& world, const RunOptions& options) {
    const ScenarioConfig& scenario = world.scenario();
    RunReport report;
    report.scenario_name = scenario.name;
    report.scenario_digest = scenario.digest;
    report.seed = scenario.seed;
    report.duration_s = static_cast<double>(scenario.duration_ms) / 1000.0;
    report.delivered_packets = world.delivered_total();

    std::vector<DiagnosisKey> published;
    if (options.run_server_flow && !world.uploads().empty()) {
        KeyServerConfig server_config;
        server_config.region = scenario.server.region;
        server_config.pin_expiry_ms = scenario.server.pin_expiry_ms;
        KeyServer server(scenario.seed, server_config);

        std::vector<InfectionUpload> uploads = world.uploads();
        std::stable_sort(uploads.begin(), uploads.end(),
                         [](const InfectionUpload& a, const InfectionUpload& b) {
                             return std::tie(a.time_ms, a.device_id) <
                                    std::tie(b.time_ms, b.device_id);
                         });
        for (const InfectionUpload& upload : uploads) {
            const std::string& name = world.devices()[upload.device_id].name();
            Pin pin = server.issue_pin(name, upload.time_ms);
            SubmitResult result =
                server.submit_keys(pin.digits, upload.teks, upload.time_ms);
            if (!result.accepted()) {
                report.invariant_failures.push_back(
                    "upload for " + name + " rejected: " + result.reason);
            }
        }

        if (server.pending_key_count() > 0) {
            ExportFile file = server.publish_batch(scenario.duration_ms);
            VerifiedBatch batch = verify_and_parse_export(
                file.bytes, file.signature, server.public_key());
            published = batch.keys;
            for (Device& device : world.devices()) {
                provide_diagnosis_keys(device, batch);
            }
        }
    }

    TraceLog& trace = world.trace();
    for (Device& device : world.devices()) {
        DeviceReport dr;
        dr.name = device.name();
        dr.infected = device.infected();
        dr.storage_bytes = device.storage_bytes();
        dr.observation_records = device.observations().size();
        for (const ObservationRecord& record : device.observations()) {
            dr.sightings += record.scan_count;
        }
        dr.malformed = device.malformed_count();
        dr.exposure = detect_exposure(device, scenario.exposure);
        if (should_notify(dr.exposure, scenario.exposure)) {
            device.set_notified(true);
            report.notifications.push_back(device.name());
            TraceEvent te;
            te.event_type = "notify";
            te.time_ms = scenario.duration_ms;
            te.src = device.name();
            trace.add(std::move(te));
        }
        dr.notified = device.notified();
        report.devices.push_back(std::move(dr));
    }
    trace.sort();

    std::map<std::string, std::vector<int64_t>> rotate_times;
    for (const TraceEvent& event : trace.events()) {
        if (event.event_type == "rotate") {
            rotate_times[event.src].push_back(event.time_ms);
        }
    }
    for (DeviceReport& dr : report.devices) {
        const std::vector<int64_t>& times = rotate_times[dr.name];
        dr.rotations = times.size();
        if (times.size() > 1) {
            double min_s = 0.0;
            double max_s = 0.0;
            double sum_s = 0.0;
            for (size_t i = 1; i < times.size(); ++i) {
                double gap = static_cast<double>(times[i] - times[i - 1]) /
                             1000.0;
                if (i == 1 || gap < min_s) min_s = gap;
                if (i == 1 || gap > max_s) max_s = gap;
                sum_s += gap;
            }
            dr.rotation_min_s = min_s;
            dr.rotation_max_s = max_s;
            dr.rotation_mean_s = sum_s / static_cast<double>(times.size() - 1);
        }
    }

    if (options.run_attacks) {
        for (size_t i = 0; i < scenario.attacks.size(); ++i) {
            report.attacks.push_back(
                run_attack(world, scenario.attacks[i], i, published));
        }
    }

    check_invariants(world, report);

    if (!options.trace_path.empty()) {
        std::ofstream out(options.trace_path);
        if (!out) {
            throw ConfigError("trace_path",
                              "cannot write '" + options.trace_path + "'");
        }
        trace.write_csv(out);
    }
    if (!options.capture_dir.empty()) {
        write_captures(world, options.capture_dir);
    }
    return report;
}

AttackOutcome replay_attack(const TraceLog& trace, const AttackSpec& spec,
                            uint64_t seed) {
    std::set<std::string> device_srcs;
    for (const TraceEvent& event : trace.events()) {
        if (event.event_type == "rotate" || event.event_type == "tekroll" ||
            event.event_type == "addrswap") {
            device_srcs.insert(event.src);
        }
    }

    AttackGroundTruth truth;
    std::map<std::string, uint32_t> ids;
    auto id_of = [&](const std::string& name) {
        auto it = ids.find(name);
        if (it == ids.end()) {
            uint32_t id = static_cast<uint32_t>(ids.size());
            truth.device_names[id] = name;
            it = ids.emplace(name, id).first;
        }
        return it->second;
    };
    auto register_pair = [&](const std::string& src,
                             const ByteArray<6>& address, const Bytes& payload) {
        if (payload.size() < 20) return;
        ByteArray<26> pair{};
        std::copy(address.begin(), address.end(), pair.begin());
        std::copy_n(payload.begin(), 20, pair.begin() + 6);
        uint32_t id = id_of(src);
        truth.pair_source[pair] = id;
        Rpi rpi{};
        std::copy_n(payload.begin(), 16, rpi.begin());
        truth.rpi_source[rpi] = id;
    };

    std::vector<SnifferEntry> log;
    for (const TraceEvent& event : trace.events()) {
        if ((event.event_type == "rotate" || event.event_type == "addrswap") &&
            !event.address_hex.empty() && !event.payload_hex.empty()) {
            register_pair(event.src, parse_mac(event.address_hex),
                          from_hex(event.payload_hex));
        } else if (event.event_type == "recv" &&
                   !device_srcs.count(event.dst)) {
            SnifferEntry entry;
            entry.time_ms = event.time_ms;
            entry.address = parse_mac(event.address_hex);
            entry.payload = from_hex(event.payload_hex);
            entry.attenuation_db = event.attenuation_db.value_or(0.0);
            register_pair(event.src, entry.address, entry.payload);
            log.push_back(std::move(entry));
        }
    }

    Rng rng = make_stream(seed, "attack-replay", 0);
    if (spec.model == "walking-trail" || spec.model == "stalker1") {
        return run_walking_trail(log, spec.model);
    }
    if (spec.model == "neighbor") {
        return neighbor_report(estimate_nearby_users(log, spec.window_minutes),
                               device_srcs.size());
    }
    if (spec.model == "stalker2") {
        return stalker_outcome_report(stalker_link(log, truth, rng));
    }
    return unavailable_report(
        spec.model, "this threat model needs a live run, not a trace replay");
}

}  // namespace gaensim
