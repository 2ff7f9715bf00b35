#include <doctest.h>

#include <string>

#include "gaensim/errors.hpp"
#include "gaensim/report.hpp"

using namespace gaensim;

namespace {

RunReport sample_report() {
    RunReport report;
    report.scenario_name = "pairwise";
    report.scenario_digest = std::string(64, 'f');
    report.seed = 4242;
    report.duration_s = 1200.0;
    report.delivered_packets = 987;

    DeviceReport alice;
    alice.name = "alice";
    alice.infected = true;
    alice.storage_bytes = 610'608;
    alice.observation_records = 12;
    alice.sightings = 340;
    alice.malformed = 1;
    alice.rotations = 3;
    alice.rotation_min_s = 611.2;
    alice.rotation_mean_s = 902.7;
    alice.rotation_max_s = 1190.0;
    report.devices.push_back(alice);

    DeviceReport bob;
    bob.name = "bob";
    bob.notified = true;
    bob.exposure.matched_key_count = 1;
    bob.exposure.total_duration_minutes = 18.5;
    bob.exposure.max_single_duration_minutes = 18.5;
    ContactWindow window;
    window.key_bytes.fill(0x5c);
    window.start_ms = 900'000;
    window.end_ms = 1'770'000;
    window.min_attenuation_db = 58.25;
    window.duration_minutes = 18.5;
    bob.exposure.windows.push_back(window);
    report.devices.push_back(bob);

    report.notifications.push_back("bob");

    AttackOutcome attack;
    attack.threat_model = "neighbor";
    attack.info_leaked = InfoLeaked::NearbyUserCount;
    attack.metrics["estimate"] = 2.0;
    attack.metrics["windows"] = 4.0;
    attack.notes.push_back("estimate uses the median across windows");
    report.attacks.push_back(attack);

    report.invariants_ok = false;
    report.invariant_failures.push_back("a sample failure line");
    return report;
}

}  // namespace

TEST_CASE("json reports survive a round trip unchanged") {
    RunReport report = sample_report();
    std::string json = emit_report(report, ReportFormat::Json);
    RunReport parsed = parse_report_json(json);

    CHECK(parsed.scenario_name == report.scenario_name);
    CHECK(parsed.scenario_digest == report.scenario_digest);
    CHECK(parsed.seed == report.seed);
    CHECK(parsed.duration_s == doctest::Approx(report.duration_s));
    CHECK(parsed.delivered_packets == report.delivered_packets);
    CHECK(parsed.invariants_ok == report.invariants_ok);
    CHECK(parsed.invariant_failures == report.invariant_failures);
    CHECK(parsed.notifications == report.notifications);

    REQUIRE(parsed.devices.size() == 2);
    const DeviceReport& alice = parsed.devices[0];
    CHECK(alice.name == "alice");
    CHECK(alice.infected);
    CHECK_FALSE(alice.notified);
    CHECK(alice.storage_bytes == 610'608);
    CHECK(alice.observation_records == 12);
    CHECK(alice.sightings == 340);
    CHECK(alice.malformed == 1);
    CHECK(alice.rotations == 3);
    CHECK(alice.rotation_mean_s == doctest::Approx(902.7));

    const DeviceReport& bob = parsed.devices[1];
    CHECK(bob.notified);
    CHECK(bob.exposure.matched_key_count == 1);
    CHECK(bob.exposure.max_single_duration_minutes == doctest::Approx(18.5));
    REQUIRE(bob.exposure.windows.size() == 1);
    CHECK(bob.exposure.windows[0].key_bytes ==
          report.devices[1].exposure.windows[0].key_bytes);
    CHECK(bob.exposure.windows[0].start_ms == 900'000);
    CHECK(bob.exposure.windows[0].end_ms == 1'770'000);
    CHECK(bob.exposure.windows[0].min_attenuation_db ==
          doctest::Approx(58.25));

    REQUIRE(parsed.attacks.size() == 1);
    CHECK(parsed.attacks[0].threat_model == "neighbor");
    CHECK(parsed.attacks[0].info_leaked == InfoLeaked::NearbyUserCount);
    CHECK(parsed.attacks[0].metrics.at("estimate") == doctest::Approx(2.0));
    CHECK(parsed.attacks[0].notes == report.attacks[0].notes);

    CHECK(emit_report(parsed, ReportFormat::Json) == json);
}

TEST_CASE("emitting twice gives identical bytes") {
    RunReport report = sample_report();
    CHECK(emit_report(report, ReportFormat::Json) ==
          emit_report(report, ReportFormat::Json));
    CHECK(emit_report(report, ReportFormat::Text) ==
          emit_report(report, ReportFormat::Text));
}

TEST_CASE("the text rendering mentions what an operator needs") {
    std::string text = emit_report(sample_report(), ReportFormat::Text);
    for (const char* needle :
         {"pairwise", "alice", "bob", "notifications", "neighbor",
          "nearby_user_count", "610608", "invariant"}) {
        INFO(needle);
        CHECK(text.find(needle) != std::string::npos);
    }
}

TEST_CASE("an empty report still renders and round trips") {
    RunReport empty;
    std::string json = emit_report(empty, ReportFormat::Json);
    RunReport parsed = parse_report_json(json);
    CHECK(parsed.devices.empty());
    CHECK(parsed.attacks.empty());
    CHECK(parsed.invariants_ok);
    CHECK_FALSE(emit_report(empty, ReportFormat::Text).empty());
}

TEST_CASE("malformed json raises a parse error") {
    CHECK_THROWS_AS(parse_report_json("not json at all"), ParseError);
    CHECK_THROWS_AS(parse_report_json("{\"seed\": \"zebra\"}"), ParseError);

    std::string json = emit_report(sample_report(), ReportFormat::Json);
    const std::string marker = "\"key\": \"";
    size_t pos = json.find(marker);
    REQUIRE(pos != std::string::npos);
    json.replace(pos, marker.size() + 32, marker + "abcd");
    CHECK_THROWS_AS(parse_report_json(json), ParseError);
}
