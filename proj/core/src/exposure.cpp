#include "gaensim/exposure.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

constexpr int64_t kMsPerInterval =
    static_cast<int64_t>(kIntervalSeconds) * 1000;

bool interval_overlap(const ObservationRecord& record, IntervalNumber rpi_interval,
                      uint32_t tolerance) {
    int64_t lo = record.first_seen_ms / kMsPerInterval;
    int64_t hi = record.last_seen_ms / kMsPerInterval;
    int64_t target_lo = static_cast<int64_t>(rpi_interval) - tolerance;
    int64_t target_hi = static_cast<int64_t>(rpi_interval) + tolerance;
    return hi >= target_lo && lo <= target_hi;
}

}  // namespace

size_t provide_diagnosis_keys(Device& device, const VerifiedBatch& batch) {
    if (!batch.verified) {
        throw IntegrityError("diagnosis keys must come from a verified batch");
    }
    return device.stage_keys(batch.keys);
}

ExposureSummary detect_exposure(const Device& device,
                                const ExposureConfig& config) {
    const int64_t scan_period_ms = device.config().scan_period_ms;
    const int64_t merge_gap_ms = scan_period_ms + 60'000;

    struct RpiOrigin {
        size_t key_index;
        IntervalNumber interval;
    };
    std::unordered_map<Rpi, std::vector<RpiOrigin>, ByteArrayHash> lookup;
    const std::vector<DiagnosisKey>& keys = device.staged_keys();
    for (size_t k = 0; k < keys.size(); ++k) {
        TemporaryExposureKey tek = keys[k].tek();
        std::vector<Rpi> rpis = rpis_for_day(tek);
        for (uint32_t i = 0; i < rpis.size(); ++i) {
            lookup[rpis[i]].push_back({k, tek.rolling_start_interval + i});
        }
    }

    ExposureSummary summary;
    std::map<size_t, std::vector<const ObservationRecord*>> matched_by_key;
    for (const ObservationRecord& record : device.observations()) {
        auto it = lookup.find(record.rpi);
        if (it == lookup.end()) continue;
        if (record.min_attenuation_db > config.attenuation_threshold_db) {
            continue;
        }
        for (const RpiOrigin& origin : it->second) {
            if (!interval_overlap(record, origin.interval,
                                  config.interval_tolerance)) {
                continue;
            }
            matched_by_key[origin.key_index].push_back(&record);
            summary.matches.push_back(
                {keys[origin.key_index].key_bytes, record.rpi});
        }
    }
    std::sort(summary.matches.begin(), summary.matches.end());
    summary.matches.erase(
        std::unique(summary.matches.begin(), summary.matches.end()),
        summary.matches.end());

    summary.matched_key_count = matched_by_key.size();
    for (auto& [key_index, records] : matched_by_key) {
        std::sort(records.begin(), records.end(),
                  [](const ObservationRecord* a, const ObservationRecord* b) {
                      return a->first_seen_ms < b->first_seen_ms;
                  });
        ContactWindow window;
        bool open = false;
        for (const ObservationRecord* record : records) {
            if (open && record->first_seen_ms - window.end_ms <= merge_gap_ms) {
                window.end_ms = std::max(window.end_ms, record->last_seen_ms);
                window.min_attenuation_db = std::min(
                    window.min_attenuation_db, record->min_attenuation_db);
                continue;
            }
            if (open) {
                window.duration_minutes =
                    static_cast<double>(window.end_ms - window.start_ms +
                                        scan_period_ms) /
                    60'000.0;
                summary.windows.push_back(window);
            }
            window.key_bytes = keys[key_index].key_bytes;
            window.start_ms = record->first_seen_ms;
            window.end_ms = record->last_seen_ms;
            window.min_attenuation_db = record->min_attenuation_db;
            open = true;
        }
        if (open) {
            window.duration_minutes =
                static_cast<double>(window.end_ms - window.start_ms +
                                    scan_period_ms) /
                60'000.0;
            summary.windows.push_back(window);
        }
    }

    for (const ContactWindow& window : summary.windows) {
        summary.total_duration_minutes += window.duration_minutes;
        summary.max_single_duration_minutes = std::max(
            summary.max_single_duration_minutes, window.duration_minutes);
    }
    return summary;
}

std::vector<MatchPair> match_oracle(
    const std::vector<ObservationRecord>& observations,
    const std::vector<DiagnosisKey>& keys, const ExposureConfig& config) {
    std::vector<MatchPair> out;
    for (const DiagnosisKey& key : keys) {
        TemporaryExposureKey tek = key.tek();
        for (uint32_t i = 0; i < tek.rolling_period; ++i) {
            Rpi rpi = derive_rpi(tek, tek.rolling_start_interval + i);
            for (const ObservationRecord& record : observations) {
                if (record.rpi != rpi) continue;
                if (record.min_attenuation_db >
                    config.attenuation_threshold_db) {
                    continue;
                }
                if (!interval_overlap(record, tek.rolling_start_interval + i,
                                      config.interval_tolerance)) {
                    continue;
                }
                out.push_back({key.key_bytes, rpi});
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool should_notify(const ExposureSummary& summary,
                   const ExposureConfig& config) {
    return summary.max_single_duration_minutes >=
           config.min_duration_minutes;
}

}  // namespace gaensim
