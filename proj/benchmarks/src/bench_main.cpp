#include <benchmark/benchmark.h>

#include <sstream>

#include "gaensim/crypto.hpp"
#include "gaensim/exposure.hpp"
#include "gaensim/runner.hpp"
#include "gaensim/scenario.hpp"
#include "gaensim/server.hpp"
#include "gaensim/world.hpp"

namespace {

using namespace gaensim;

TemporaryExposureKey bench_tek() {
    Rng rng = make_stream(7, "bench-tek");
    return generate_tek(rng, 0);
}

void BM_DeriveRpik(benchmark::State& state) {
    TemporaryExposureKey tek = bench_tek();
    for (auto _ : state) {
        benchmark::DoNotOptimize(derive_rpik(tek));
    }
}
BENCHMARK(BM_DeriveRpik);

void BM_DeriveRpi(benchmark::State& state) {
    TemporaryExposureKey tek = bench_tek();
    IntervalNumber interval = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(derive_rpi(tek, interval));
        interval = (interval + 1) % kIntervalsPerDay;
    }
}
BENCHMARK(BM_DeriveRpi);

void BM_ExpandDay(benchmark::State& state) {
    TemporaryExposureKey tek = bench_tek();
    for (auto _ : state) {
        benchmark::DoNotOptimize(rpis_for_day(tek));
    }
}
BENCHMARK(BM_ExpandDay);

void BM_EncryptMetadata(benchmark::State& state) {
    TemporaryExposureKey tek = bench_tek();
    Rpi rpi = derive_rpi(tek, 0);
    Metadata metadata{0x40, -20};
    for (auto _ : state) {
        benchmark::DoNotOptimize(encrypt_metadata(tek, rpi, metadata));
    }
}
BENCHMARK(BM_EncryptMetadata);

ScenarioConfig contact_scenario(int64_t duration_s) {
    std::ostringstream text;
    text << "[scenario]\nseed = 11\nduration_s = " << duration_s << "\n";
    text << "[device.a]\nx = 0\ny = 0\n";
    text << "[device.b]\nx = 1\ny = 0\n";
    return parse_scenario_text(text.str());
}

void BM_WorldHour(benchmark::State& state) {
    ScenarioConfig scenario = contact_scenario(3600);
    for (auto _ : state) {
        World world(scenario);
        benchmark::DoNotOptimize(world.run());
    }
}
BENCHMARK(BM_WorldHour);

void BM_WorldDayStep(benchmark::State& state) {
    ScenarioConfig scenario = contact_scenario(86'400);
    for (auto _ : state) {
        World world(scenario);
        while (world.now_ms() < 86'400'000) {
            benchmark::DoNotOptimize(world.step(3'600'000));
        }
    }
}
BENCHMARK(BM_WorldDayStep);

void BM_PublishBatch(benchmark::State& state) {
    Rng rng = make_stream(3, "bench-batch");
    std::vector<TemporaryExposureKey> teks;
    for (int d = 0; d < 14; ++d) {
        teks.push_back(generate_tek(rng, d * kIntervalsPerDay));
    }
    for (auto _ : state) {
        KeyServer server(5);
        Pin pin = server.issue_pin("case", 14 * 86'400'000LL);
        server.submit_keys(pin.digits, teks, 14 * 86'400'000LL);
        benchmark::DoNotOptimize(server.publish_batch(14 * 86'400'000LL));
    }
}
BENCHMARK(BM_PublishBatch);

void BM_VerifyExport(benchmark::State& state) {
    Rng rng = make_stream(3, "bench-batch");
    std::vector<TemporaryExposureKey> teks;
    for (int d = 0; d < 14; ++d) {
        teks.push_back(generate_tek(rng, d * kIntervalsPerDay));
    }
    KeyServer server(5);
    Pin pin = server.issue_pin("case", 14 * 86'400'000LL);
    server.submit_keys(pin.digits, teks, 14 * 86'400'000LL);
    ExportFile file = server.publish_batch(14 * 86'400'000LL);
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify_and_parse_export(
            file.bytes, file.signature, server.public_key()));
    }
}
BENCHMARK(BM_VerifyExport);

void BM_DetectExposure(benchmark::State& state) {
    ScenarioConfig scenario = contact_scenario(7200);
    scenario.devices[0].infected_at_ms = 3'600'000;
    World world(scenario);
    world.run();
    RunOptions options;
    options.run_attacks = false;
    finish_run(world, options);
    const Device& device = world.devices()[1];
    ExposureConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_exposure(device, config));
    }
}
BENCHMARK(BM_DetectExposure);

}  // namespace

BENCHMARK_MAIN();
