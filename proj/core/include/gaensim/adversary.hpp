#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gaensim/bytes.hpp"
#include "gaensim/crypto.hpp"
#include "gaensim/radio.hpp"
#include "gaensim/rng.hpp"

namespace gaensim {

struct SnifferEntry {
    int64_t time_ms = 0;
    ByteArray<6> address{};
    Bytes payload;  // 20 bytes
    double attenuation_db = 0.0;
};

/// Passive receiver. Never transmits; logs every decoded advertisement.
struct SnifferNode {
    std::string name;
    Position position{};
    std::string location;        // side-channel label, empty if none
    int64_t scan_period_ms = 0;  // 0 means always listening
    int64_t scan_window_ms = 0;
    std::vector<SnifferEntry> log;
};

/// Simulation-side knowledge used only to score attacks, never to run them.
struct AttackGroundTruth {
    // (address || payload) -> emitting device id
    std::unordered_map<ByteArray<26>, uint32_t, ByteArrayHash> pair_source;
    std::unordered_map<Rpi, uint32_t, ByteArrayHash> rpi_source;
    std::map<uint32_t, std::string> device_names;
    // device id -> time-ordered (bucket, location) visits actually made
    std::map<uint32_t, std::vector<std::pair<int64_t, std::string>>>
        device_visits;
};

enum class InfoLeaked { None, NearbyUserCount, MovementProfile, InfectionStatus };

std::string to_string(InfoLeaked leaked);

struct AttackOutcome {
    std::string threat_model;
    InfoLeaked info_leaked = InfoLeaked::None;
    std::map<std::string, double> metrics;
    std::vector<std::string> notes;
};

/// Threat models 1 and 2: one or a handful of captured RPIs. Reports that
/// nothing usable leaks, including a failed AEM decryption attempt.
AttackOutcome run_walking_trail(const std::vector<SnifferEntry>& log,
                                const std::string& model_name = "walking-trail");

struct NearbyEstimate {
    size_t window_count = 0;
    size_t naive_distinct_total = 0;
    double naive_mean_per_window = 0.0;
    double corrected_median = 0.0;
    size_t estimate = 0;
};

/// Threat model 3: count distinct RPIs per time window, divide out the
/// expected rotation multiplicity, take the median across windows.
NearbyEstimate estimate_nearby_users(const std::vector<SnifferEntry>& log,
                                     double window_minutes);

struct EpochSighting {
    ByteArray<6> address{};
    Bytes payload;
    int64_t first_seen_ms = 0;
    int64_t last_seen_ms = 0;
    size_t sightings = 0;
};

struct StalkerLink {
    size_t from_epoch = 0;
    size_t to_epoch = 0;
    bool evidence = false;  // shared address or payload, not a guess
    bool correct = false;
};

struct StalkerOutcome {
    std::vector<EpochSighting> epochs;
    std::vector<StalkerLink> links;
    std::vector<std::vector<size_t>> chains;
    size_t attempted = 0;
    size_t evidence_links = 0;
    size_t correct = 0;
    double accuracy = 0.0;
    double chance_baseline = 0.0;
};

/// Threat model 4: chain identifier epochs. Epochs sharing an address or a
/// payload are linked outright; every other epoch start gets a uniform
/// guess among epochs that ended nearby in time. Ground truth is consulted
/// only to mark links correct and to compute the analytic chance baseline.
StalkerOutcome stalker_link(const std::vector<SnifferEntry>& log,
                            const AttackGroundTruth& truth, Rng& attacker_rng);

AttackOutcome stalker_outcome_report(const StalkerOutcome& outcome);

struct SideChannel {
    bool available = true;
    int64_t bucket_ms = 900'000;  // 15 min visit granularity
    std::map<std::string, std::string> sniffer_locations;
};

struct Visit {
    int64_t bucket_start_ms = 0;
    std::string location;

    auto operator<=>(const Visit&) const = default;
};

struct Trajectory {
    ByteArray<16> key_bytes{};
    uint32_t true_device = 0;
    std::vector<Visit> visits;
    int assigned_profile = -1;
    bool correct = false;
};

struct OrgCrimeOutcome {
    std::vector<Trajectory> trajectories;
    size_t assignments = 0;
    size_t correct = 0;
    double precision = 0.0;
    bool degraded = false;  // no side channel: trajectories stay anonymous
};

/// Threat model 5: expand published keys to RPIs, place them at sniffer
/// locations over time, then assign each trajectory to the best-overlapping
/// candidate profile (one true profile plus decoys; ties score as wrong).
/// Decoy sets are nested across increasing counts for a fixed rng stream.
OrgCrimeOutcome org_crime_profile(const std::vector<SnifferNode>& sniffers,
                                  const std::vector<DiagnosisKey>& published,
                                  const SideChannel& side_channel,
                                  size_t candidate_profiles,
                                  const AttackGroundTruth& truth,
                                  Rng& attacker_rng);

AttackOutcome org_crime_outcome_report(const OrgCrimeOutcome& outcome,
                                       size_t candidate_profiles);

class Device;

/// Threat model 6: reading the victim's app state. Without the compromise
/// flag this throws AuthorizationError and leaks nothing.
AttackOutcome org_crime_device_read(const Device& device, bool compromised);

}  // namespace gaensim
