#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "gaensim/crypto.hpp"
#include "gaensim/device.hpp"
#include "gaensim/server.hpp"

namespace gaensim {

struct ExposureConfig {
    double min_duration_minutes = 15.0;
    double attenuation_threshold_db = 73.0;
    uint32_t interval_tolerance = 2;
};

struct MatchPair {
    ByteArray<16> key_bytes{};
    Rpi rpi{};

    auto operator<=>(const MatchPair&) const = default;
};

struct ContactWindow {
    ByteArray<16> key_bytes{};
    int64_t start_ms = 0;
    int64_t end_ms = 0;
    double min_attenuation_db = 0.0;
    double duration_minutes = 0.0;
};

struct ExposureSummary {
    size_t matched_key_count = 0;
    std::vector<ContactWindow> windows;
    std::vector<MatchPair> matches;  // sorted, deduplicated
    double total_duration_minutes = 0.0;
    double max_single_duration_minutes = 0.0;
};

/// Stages a verified batch into the device's matching store, deduplicating
/// by key bytes. Throws IntegrityError on an unverified batch.
size_t provide_diagnosis_keys(Device& device, const VerifiedBatch& batch);

/// Matches staged diagnosis keys against the observation store. A record
/// matches a key's RPI when the bytes are equal, the record's interval span
/// overlaps the RPI interval within the tolerance, and its attenuation is
/// at or below the threshold. Matched records are merged per key into
/// contact windows; each window is credited its span plus one scan period.
ExposureSummary detect_exposure(const Device& device,
                                const ExposureConfig& config);

/// Brute-force ground truth: every record against every expanded RPI of
/// every key, same match rule, no indexing.
std::vector<MatchPair> match_oracle(
    const std::vector<ObservationRecord>& observations,
    const std::vector<DiagnosisKey>& keys, const ExposureConfig& config);

bool should_notify(const ExposureSummary& summary,
                   const ExposureConfig& config);

}  // namespace gaensim
