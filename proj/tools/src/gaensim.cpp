#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaensim/audit.hpp"
#include "gaensim/errors.hpp"
#include "gaensim/report.hpp"
#include "gaensim/runner.hpp"
#include "gaensim/server.hpp"

namespace {

using namespace gaensim;
using json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitViolation = 3;

std::string resolve_report_path(const std::string& out) {
    const char* dir = std::getenv("GAENSIM_REPORT_DIR");
    std::filesystem::path path(out);
    if (dir != nullptr && *dir != '\0' && path.is_relative()) {
        return (std::filesystem::path(dir) / path).string();
    }
    return out;
}

void write_or_print(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::string path = resolve_report_path(out);
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream file(path);
    if (!file) {
        throw ConfigError("out", "cannot write '" + path + "'");
    }
    file << text;
}

Bytes read_file(const std::string& path, const std::string& field) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(field, "cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string data = buffer.str();
    return Bytes(data.begin(), data.end());
}

ReportFormat parse_format(const std::string& name) {
    if (name == "text") return ReportFormat::Text;
    if (name == "json") return ReportFormat::Json;
    throw ConfigError("report", "unknown format '" + name + "'");
}

json outcome_to_json(const AttackOutcome& outcome) {
    json notes = json::array();
    for (const std::string& note : outcome.notes) notes.push_back(note);
    return json{{"threat_model", outcome.threat_model},
                {"info_leaked", to_string(outcome.info_leaked)},
                {"metrics", outcome.metrics},
                {"notes", notes}};
}

std::string outcome_to_text(const AttackOutcome& outcome) {
    std::ostringstream out;
    out << "threat_model: " << outcome.threat_model << "\n";
    out << "info_leaked: " << to_string(outcome.info_leaked) << "\n";
    for (const auto& [key, value] : outcome.metrics) {
        out << key << " = " << value << "\n";
    }
    for (const std::string& note : outcome.notes) {
        out << "note: " << note << "\n";
    }
    return out.str();
}

struct SimulateArgs {
    std::string scenario_path;
    std::string format = "text";
    std::string out;
    std::string trace_path;
    std::string capture_dir;
    bool no_server = false;
    bool no_attacks = false;
};

int cmd_simulate(const SimulateArgs& args) {
    ScenarioConfig scenario = load_scenario_file(args.scenario_path);
    RunOptions options;
    options.trace_path = args.trace_path;
    options.capture_dir = args.capture_dir;
    options.run_server_flow = !args.no_server;
    options.run_attacks = !args.no_attacks;
    RunReport report = run_scenario(scenario, options);
    write_or_print(emit_report(report, parse_format(args.format)), args.out);
    if (!report.invariants_ok) {
        std::cerr << "invariant violations detected\n";
        return kExitViolation;
    }
    return 0;
}

struct AttackArgs {
    std::string model;
    std::string scenario_path;
    std::string trace_path;
    uint64_t seed = 1;
    double window_minutes = 15.0;
    size_t candidate_profiles = 10;
    std::string target;
    bool compromised = false;
    bool no_side_channel = false;
    std::string format = "text";
    std::string out;
};

int cmd_attack(const AttackArgs& args) {
    AttackSpec spec;
    spec.model = args.model;
    spec.window_minutes = args.window_minutes;
    spec.candidate_profiles = args.candidate_profiles;
    spec.target = args.target;
    spec.compromised = args.compromised;
    spec.side_channel = !args.no_side_channel;

    AttackOutcome outcome;
    if (!args.scenario_path.empty()) {
        ScenarioConfig scenario = load_scenario_file(args.scenario_path);
        scenario.attacks.clear();
        scenario.attacks.push_back(spec);
        RunReport report = run_scenario(scenario, {});
        if (report.attacks.empty()) {
            throw ConfigError("attack.model", "attack did not run");
        }
        outcome = report.attacks.front();
    } else {
        std::ifstream in(args.trace_path);
        if (!in) {
            throw ConfigError("trace", "cannot open '" + args.trace_path + "'");
        }
        TraceLog trace = TraceLog::from_csv(in);
        outcome = replay_attack(trace, spec, args.seed);
    }

    if (args.format == "json") {
        write_or_print(outcome_to_json(outcome).dump(2) + "\n", args.out);
    } else {
        write_or_print(outcome_to_text(outcome), args.out);
    }
    return 0;
}

struct AuditArgs {
    std::string input;
    std::string format = "text";
    std::string out;
};

json audit_to_json(const AuditReport& report) {
    json violations = json::array();
    for (const SyncViolation& violation : report.violations) {
        json values = json::array();
        for (const std::string& value : violation.values_hex) {
            values.push_back(value);
        }
        violations.push_back(
            json{{"kind", violation.kind ==
                                  SyncViolation::Kind::AddressWithMultiplePayloads
                              ? "address_with_multiple_payloads"
                              : "payload_with_multiple_addresses"},
                 {"key", violation.key_hex},
                 {"values", values}});
    }
    json root{{"record_count", report.record_count},
              {"distinct_pairs", report.distinct_pairs},
              {"malformed_count", report.malformed_count},
              {"violations", violations},
              {"clean", report.clean()}};
    if (report.intervals) {
        root["intervals"] = json{{"rotation_count", report.intervals->rotation_count},
                                 {"gap_count", report.intervals->gap_count},
                                 {"min_s", report.intervals->min_s},
                                 {"mean_s", report.intervals->mean_s},
                                 {"max_s", report.intervals->max_s},
                                 {"bounds_ok", report.intervals->bounds_ok}};
    } else {
        root["intervals"] = nullptr;
    }
    return root;
}

std::string audit_to_text(const AuditReport& report) {
    std::ostringstream out;
    out << "records: " << report.record_count << "\n";
    out << "distinct_pairs: " << report.distinct_pairs << "\n";
    out << "malformed_lines: " << report.malformed_count << "\n";
    if (report.violations.empty()) {
        out << "sync: address and payload stay in lockstep\n";
    } else {
        out << "sync: " << report.violations.size() << " violation(s)\n";
        for (const SyncViolation& violation : report.violations) {
            out << "  "
                << (violation.kind ==
                            SyncViolation::Kind::AddressWithMultiplePayloads
                        ? "address "
                        : "payload ")
                << violation.key_hex << " seen with "
                << violation.values_hex.size() << " counterparts\n";
        }
    }
    if (report.intervals) {
        out << "rotations: " << report.intervals->rotation_count
            << " gaps_s=[" << report.intervals->min_s << ", "
            << report.intervals->mean_s << ", " << report.intervals->max_s
            << "] bounds " << (report.intervals->bounds_ok ? "ok" : "VIOLATED")
            << "\n";
    } else {
        out << "rotations: not enough timed records\n";
    }
    out << "verdict: " << (report.clean() ? "clean" : "suspicious") << "\n";
    return out.str();
}

int cmd_audit(const AuditArgs& args) {
    std::ifstream in(args.input);
    if (!in) {
        throw ConfigError("input", "cannot open '" + args.input + "'");
    }
    AuditReport report = audit_report(in);
    if (args.format == "json") {
        write_or_print(audit_to_json(report).dump(2) + "\n", args.out);
    } else {
        write_or_print(audit_to_text(report), args.out);
    }
    return report.clean() ? 0 : kExitViolation;
}

struct ServerDemoArgs {
    std::string out_dir = "server-out";
    uint64_t seed = 1;
    size_t key_count = 3;
    int64_t now_s = 14 * 86'400;
};

int cmd_server_demo(const ServerDemoArgs& args) {
    if (args.key_count < 1 || args.key_count > 15) {
        throw ConfigError("keys", "key count must be in [1, 15]");
    }
    int64_t now_ms = args.now_s * 1000;
    KeyServer server(args.seed);
    Rng tek_rng = make_stream(args.seed, "demo-teks");

    IntervalNumber day = day_start_interval(
        interval_number(static_cast<uint64_t>(args.now_s)));
    std::vector<TemporaryExposureKey> teks;
    for (size_t k = 0; k < args.key_count; ++k) {
        uint32_t back = static_cast<uint32_t>(args.key_count - 1 - k);
        if (day < back * kIntervalsPerDay) {
            throw ConfigError("now_s", "not enough days before the epoch");
        }
        teks.push_back(generate_tek(tek_rng, day - back * kIntervalsPerDay));
    }

    Pin pin = server.issue_pin("demo-case", now_ms);
    SubmitResult result = server.submit_keys(pin.digits, teks, now_ms);
    if (!result.accepted()) {
        throw ValidityError("demo submission rejected: " + result.reason);
    }
    ExportFile file = server.publish_batch(now_ms);

    std::filesystem::create_directories(args.out_dir);
    auto write_bytes = [&](const std::string& name, const Bytes& bytes) {
        std::filesystem::path path = std::filesystem::path(args.out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw ConfigError("out-dir", "cannot write '" + path.string() + "'");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    };
    write_bytes("export.bin", file.bytes);
    write_bytes("export.sig", serialize_signature(file.signature, "v1"));
    std::string pubkey_hex =
        to_hex(std::span<const uint8_t>(server.public_key().data(), 32));
    {
        std::filesystem::path path =
            std::filesystem::path(args.out_dir) / "public_key.hex";
        std::ofstream out(path);
        out << pubkey_hex << "\n";
    }

    VerifiedBatch batch =
        verify_and_parse_export(file.bytes, file.signature, server.public_key());
    std::cout << "pin issued: " << pin.digits << "\n";
    std::cout << "keys accepted: " << result.stored << "\n";
    std::cout << "batch " << file.batch_num << " published: " << batch.keys.size()
              << " keys, signature verifies\n";
    std::cout << "wrote " << args.out_dir
              << "/export.bin, export.sig, public_key.hex\n";
    return 0;
}

struct ServerVerifyArgs {
    std::string export_path;
    std::string signature_path;
    std::string public_key_path;
};

int cmd_server_verify(const ServerVerifyArgs& args) {
    Bytes export_bytes = read_file(args.export_path, "export");
    Bytes sidecar = read_file(args.signature_path, "signature");
    auto [signature, key_version] = parse_signature(sidecar);

    Bytes pubkey_text = read_file(args.public_key_path, "public-key");
    std::string hex(pubkey_text.begin(), pubkey_text.end());
    while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r' ||
                            hex.back() == ' ')) {
        hex.pop_back();
    }
    Bytes pubkey_bytes = from_hex(hex);
    if (pubkey_bytes.size() != 32) {
        throw ConfigError("public-key", "expected 32 hex-encoded bytes");
    }
    ByteArray<32> public_key{};
    std::copy(pubkey_bytes.begin(), pubkey_bytes.end(), public_key.begin());

    VerifiedBatch batch =
        verify_and_parse_export(export_bytes, signature, public_key);
    ExportContent content = parse_export(export_bytes);
    std::cout << "signature verifies (key version " << key_version << ")\n";
    std::cout << "region " << content.header.region << ", batch "
              << batch.batch_num << ", " << batch.keys.size() << " keys, ["
              << content.header.start_s << ", " << content.header.end_s
              << "] s\n";
    return 0;
}

int cmd_vectors() {
    auto hex16 = [](const ByteArray<16>& a) {
        return to_hex(std::span<const uint8_t>(a.data(), a.size()));
    };
    auto dump = [&](const char* label, const TemporaryExposureKey& tek,
                    IntervalNumber interval, int8_t tx) {
        std::cout << label << ".tek = " << hex16(tek.key_bytes) << "\n";
        std::cout << label << ".start_interval = " << tek.rolling_start_interval
                  << "\n";
        std::cout << label << ".rpik = " << hex16(derive_rpik(tek)) << "\n";
        std::cout << label << ".aemk = " << hex16(derive_aemk(tek)) << "\n";
        Rpi rpi = derive_rpi(tek, interval);
        std::cout << label << ".rpi[" << interval << "] = " << hex16(rpi)
                  << "\n";
        Aem aem = encrypt_metadata(tek, rpi, Metadata{0x40, tx});
        std::cout << label << ".aem[" << interval << ", tx=" << int(tx)
                  << "] = " << to_hex(std::span<const uint8_t>(aem.data(), 4))
                  << "\n";
    };

    TemporaryExposureKey zero{};
    zero.rolling_start_interval = 0;
    dump("a", zero, 0, -20);
    Rpi last = derive_rpi(zero, 143);
    std::cout << "a.rpi[143] = " << hex16(last) << "\n";

    TemporaryExposureKey stepped{};
    for (size_t i = 0; i < 16; ++i) {
        stepped.key_bytes[i] = static_cast<uint8_t>(i);
    }
    stepped.rolling_start_interval = 2'592'000;
    dump("b", stepped, 2'592'071, 12);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic desk-scale simulator of the exposure "
                 "notification BLE protocol"};
    app.require_subcommand(1);
    int rc = 0;

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "run a scenario end to end and print its report");
    simulate->add_option("--scenario", sim.scenario_path, "scenario file")
        ->required();
    simulate->add_option("--report", sim.format, "text or json");
    simulate->add_option("--out", sim.out,
                         "report file (honors GAENSIM_REPORT_DIR)");
    simulate->add_option("--trace", sim.trace_path, "write the event trace CSV");
    simulate->add_option("--capture-dir", sim.capture_dir,
                         "write one capture log per sniffer");
    simulate->add_flag("--no-server", sim.no_server,
                       "skip the key-server upload/download flow");
    simulate->add_flag("--no-attacks", sim.no_attacks,
                       "skip configured attacks");
    simulate->callback([&] { rc = cmd_simulate(sim); });

    AttackArgs atk;
    CLI::App* attack = app.add_subcommand(
        "attack", "run one threat model against a scenario or a trace");
    attack
        ->add_option("--model", atk.model,
                     "walking-trail|stalker1|neighbor|stalker2|orgcrime1|"
                     "orgcrime2")
        ->required()
        ->check(CLI::IsMember({"walking-trail", "stalker1", "neighbor",
                               "stalker2", "orgcrime1", "orgcrime2"}));
    CLI::Option* atk_scenario =
        attack->add_option("--scenario", atk.scenario_path, "scenario file");
    CLI::Option* atk_trace =
        attack->add_option("--trace", atk.trace_path, "trace CSV to replay");
    atk_scenario->excludes(atk_trace);
    attack->add_option("--seed", atk.seed, "attacker rng seed (replay only)");
    attack->add_option("--window-minutes", atk.window_minutes,
                       "counting window for the neighbor model");
    attack->add_option("--candidate-profiles", atk.candidate_profiles,
                       "profile count for orgcrime1");
    attack->add_option("--target", atk.target, "victim device for orgcrime2");
    attack->add_flag("--compromised", atk.compromised,
                     "orgcrime2 has control of the victim's phone");
    attack->add_flag("--no-side-channel", atk.no_side_channel,
                     "orgcrime1 lacks the location side channel");
    attack->add_option("--report", atk.format, "text or json");
    attack->add_option("--out", atk.out,
                       "report file (honors GAENSIM_REPORT_DIR)");
    attack->callback([&] {
        if (atk.scenario_path.empty() && atk.trace_path.empty()) {
            throw CLI::RequiredError("--scenario or --trace");
        }
        rc = cmd_attack(atk);
    });

    AuditArgs aud;
    CLI::App* audit = app.add_subcommand(
        "audit", "check a capture log for address/payload desynchronization");
    audit->add_option("--input", aud.input, "capture log file")->required();
    audit->add_option("--report", aud.format, "text or json");
    audit->add_option("--out", aud.out,
                      "report file (honors GAENSIM_REPORT_DIR)");
    audit->callback([&] { rc = cmd_audit(aud); });

    CLI::App* server = app.add_subcommand(
        "server", "key-server demo and export verification");
    server->require_subcommand(1);

    ServerDemoArgs demo;
    CLI::App* server_demo = server->add_subcommand(
        "demo", "issue a pin, accept keys, publish a signed export");
    server_demo->add_option("--out-dir", demo.out_dir, "output directory");
    server_demo->add_option("--seed", demo.seed, "server seed");
    server_demo->add_option("--keys", demo.key_count, "keys to submit (1-15)");
    server_demo->add_option("--now-s", demo.now_s, "wall clock in unix seconds");
    server_demo->callback([&] { rc = cmd_server_demo(demo); });

    ServerVerifyArgs ver;
    CLI::App* server_verify = server->add_subcommand(
        "verify", "verify an export file against its signature sidecar");
    server_verify->add_option("--export", ver.export_path, "export.bin")
        ->required();
    server_verify
        ->add_option("--signature", ver.signature_path, "export.sig")
        ->required();
    server_verify
        ->add_option("--public-key", ver.public_key_path,
                     "hex-encoded 32-byte verification key")
        ->required();
    server_verify->callback([&] { rc = cmd_server_verify(ver); });

    CLI::App* vectors = app.add_subcommand(
        "vectors", "print the crypto derivation chain for two fixed keys");
    vectors->callback([&] { rc = cmd_vectors(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int cli_rc = app.exit(err);
        return cli_rc == 0 ? 0 : kExitConfig;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& err) {
        std::cerr << "input error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const InsufficientDataError& err) {
        std::cerr << "input error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const IntegrityError& err) {
        std::cerr << "integrity violation: " << err.what() << "\n";
        return kExitViolation;
    } catch (const ValidityError& err) {
        std::cerr << "validity violation: " << err.what() << "\n";
        return kExitViolation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return rc;
}
