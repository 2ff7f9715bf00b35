#include "gaensim/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include "gaensim/device.hpp"
#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

// Guess candidates are epochs whose last sighting fell in this window
// around the new epoch's first sighting.
constexpr int64_t kCandidateBeforeMs = 300'000;
constexpr int64_t kCandidateAfterMs = 60'000;

// Mean rotation gap; one identifier per (1 + window/gap) devices per window.
constexpr double kRotationGapS = 900.0;

// Chance that an OrgCrime decoy has exactly the victim's schedule.
constexpr double kDoppelgangerRate = 0.15;

Rpi payload_rpi(const Bytes& payload) {
    Rpi rpi{};
    std::memcpy(rpi.data(), payload.data(),
                std::min(payload.size(), rpi.size()));
    return rpi;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return (values[mid - 1] + values[mid]) / 2.0;
}

struct UnionFind {
    std::vector<size_t> parent;

    explicit UnionFind(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), size_t{0});
    }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

uint32_t epoch_source(const EpochSighting& epoch,
                      const AttackGroundTruth& truth) {
    ByteArray<26> pair{};
    std::copy(epoch.address.begin(), epoch.address.end(), pair.begin());
    std::copy(epoch.payload.begin(), epoch.payload.end(), pair.begin() + 6);
    auto it = truth.pair_source.find(pair);
    if (it != truth.pair_source.end()) return it->second;
    auto rit = truth.rpi_source.find(payload_rpi(epoch.payload));
    return rit != truth.rpi_source.end() ? rit->second : UINT32_MAX;
}

}  // namespace

std::string to_string(InfoLeaked leaked) {
    switch (leaked) {
        case InfoLeaked::None: return "none";
        case InfoLeaked::NearbyUserCount: return "nearby_user_count";
        case InfoLeaked::MovementProfile: return "movement_profile";
        case InfoLeaked::InfectionStatus: return "infection_status";
    }
    return "none";
}

AttackOutcome run_walking_trail(const std::vector<SnifferEntry>& log,
                                const std::string& model_name) {
    AttackOutcome outcome;
    outcome.threat_model = model_name;
    outcome.info_leaked = InfoLeaked::None;

    std::set<Rpi> rpis;
    for (const SnifferEntry& entry : log) {
        rpis.insert(payload_rpi(entry.payload));
    }
    outcome.metrics["captured_records"] = static_cast<double>(log.size());
    outcome.metrics["captured_rpis"] = static_cast<double>(rpis.size());
    outcome.metrics["aem_decryption_attempts"] = log.empty() ? 0.0 : 1.0;
    outcome.metrics["aem_decryptions"] = 0.0;
    if (!log.empty()) {
        outcome.notes.push_back(
            "AEM decryption failed: metadata key requires the TEK");
    }
    outcome.notes.push_back(
        "captured identifiers expose no identity, location history, or "
        "infection status");
    return outcome;
}

NearbyEstimate estimate_nearby_users(const std::vector<SnifferEntry>& log,
                                     double window_minutes) {
    if (window_minutes <= 0.0) {
        throw ValidityError("window must be positive");
    }
    NearbyEstimate estimate;
    if (log.empty()) return estimate;

    int64_t window_ms = static_cast<int64_t>(window_minutes * 60'000.0);
    std::map<int64_t, std::set<Rpi>> windows;
    std::set<Rpi> all;
    for (const SnifferEntry& entry : log) {
        Rpi rpi = payload_rpi(entry.payload);
        windows[entry.time_ms / window_ms].insert(rpi);
        all.insert(rpi);
    }

    double multiplicity = 1.0 + window_minutes * 60.0 / kRotationGapS;
    std::vector<double> corrected;
    double naive_sum = 0.0;
    for (const auto& [bucket, rpis] : windows) {
        naive_sum += static_cast<double>(rpis.size());
        corrected.push_back(static_cast<double>(rpis.size()) / multiplicity);
    }

    estimate.window_count = windows.size();
    estimate.naive_distinct_total = all.size();
    estimate.naive_mean_per_window =
        naive_sum / static_cast<double>(windows.size());
    estimate.corrected_median = median(corrected);
    estimate.estimate =
        static_cast<size_t>(std::llround(estimate.corrected_median));
    return estimate;
}

StalkerOutcome stalker_link(const std::vector<SnifferEntry>& log,
                            const AttackGroundTruth& truth,
                            Rng& attacker_rng) {
    StalkerOutcome outcome;

    std::map<std::pair<std::string, std::string>, size_t> index;
    for (const SnifferEntry& entry : log) {
        auto key = std::make_pair(to_hex(entry.address), to_hex(entry.payload));
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, outcome.epochs.size());
            outcome.epochs.push_back({entry.address, entry.payload,
                                      entry.time_ms, entry.time_ms, 1});
        } else {
            EpochSighting& epoch = outcome.epochs[it->second];
            epoch.first_seen_ms = std::min(epoch.first_seen_ms, entry.time_ms);
            epoch.last_seen_ms = std::max(epoch.last_seen_ms, entry.time_ms);
            epoch.sightings += 1;
        }
    }

    std::vector<size_t> order(outcome.epochs.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return outcome.epochs[a].first_seen_ms <
               outcome.epochs[b].first_seen_ms;
    });

    // Evidence pass: identifiers reused across epochs tie them together.
    std::map<std::string, std::vector<size_t>> by_address;
    std::map<std::string, std::vector<size_t>> by_payload;
    for (size_t i : order) {
        by_address[to_hex(outcome.epochs[i].address)].push_back(i);
        by_payload[to_hex(outcome.epochs[i].payload)].push_back(i);
    }
    UnionFind components(outcome.epochs.size());
    std::set<std::pair<size_t, size_t>> evidence_pairs;
    auto add_evidence = [&](const std::vector<size_t>& group) {
        for (size_t k = 1; k < group.size(); ++k) {
            evidence_pairs.emplace(group[k - 1], group[k]);
        }
    };
    for (const auto& [address, group] : by_address) add_evidence(group);
    for (const auto& [payload, group] : by_payload) add_evidence(group);

    std::set<size_t> has_evidence_predecessor;
    for (const auto& [from, to] : evidence_pairs) {
        components.unite(from, to);
        has_evidence_predecessor.insert(to);
        outcome.links.push_back(
            {from, to, true,
             epoch_source(outcome.epochs[from], truth) ==
                 epoch_source(outcome.epochs[to], truth)});
    }

    // Guess pass: remaining epoch starts get a uniform pick among epochs
    // that disappeared shortly before.
    double chance_sum = 0.0;
    size_t chance_n = 0;
    for (size_t pos = 0; pos < order.size(); ++pos) {
        size_t e = order[pos];
        if (has_evidence_predecessor.count(e)) continue;
        const EpochSighting& epoch = outcome.epochs[e];
        std::vector<size_t> candidates;
        for (size_t qpos = 0; qpos < pos; ++qpos) {
            size_t f = order[qpos];
            const EpochSighting& prev = outcome.epochs[f];
            if (prev.last_seen_ms >= epoch.first_seen_ms - kCandidateBeforeMs &&
                prev.last_seen_ms <= epoch.first_seen_ms + kCandidateAfterMs) {
                candidates.push_back(f);
            }
        }
        if (candidates.empty()) continue;

        uint32_t mine = epoch_source(epoch, truth);
        size_t same = 0;
        for (size_t f : candidates) {
            if (epoch_source(outcome.epochs[f], truth) == mine) ++same;
        }
        chance_sum +=
            static_cast<double>(same) / static_cast<double>(candidates.size());
        ++chance_n;

        size_t pick =
            candidates[uniform_u64(attacker_rng, candidates.size())];
        bool correct = epoch_source(outcome.epochs[pick], truth) == mine;
        components.unite(pick, e);
        outcome.links.push_back({pick, e, false, correct});
    }

    for (const StalkerLink& link : outcome.links) {
        ++outcome.attempted;
        if (link.evidence) ++outcome.evidence_links;
        if (link.correct) ++outcome.correct;
    }
    outcome.accuracy =
        outcome.attempted == 0
            ? 0.0
            : static_cast<double>(outcome.correct) /
                  static_cast<double>(outcome.attempted);
    outcome.chance_baseline =
        chance_n == 0 ? 0.0 : chance_sum / static_cast<double>(chance_n);

    std::map<size_t, std::vector<size_t>> chains;
    for (size_t i : order) {
        chains[components.find(i)].push_back(i);
    }
    for (auto& [root, members] : chains) {
        outcome.chains.push_back(std::move(members));
    }
    return outcome;
}

AttackOutcome stalker_outcome_report(const StalkerOutcome& outcome) {
    AttackOutcome report;
    report.threat_model = "stalker2";
    bool tracked = outcome.evidence_links > 0 && outcome.accuracy >= 0.95;
    report.info_leaked =
        tracked ? InfoLeaked::MovementProfile : InfoLeaked::None;
    report.metrics["epochs"] = static_cast<double>(outcome.epochs.size());
    report.metrics["attempted_links"] = static_cast<double>(outcome.attempted);
    report.metrics["evidence_links"] =
        static_cast<double>(outcome.evidence_links);
    report.metrics["linkage_accuracy"] = outcome.accuracy;
    report.metrics["chance_baseline"] = outcome.chance_baseline;
    if (tracked) {
        report.notes.push_back(
            "identifier reuse across rotations chains the victim's epochs");
    } else {
        report.notes.push_back(
            "no identifier reuse across rotations; linkage is at chance");
    }
    return report;
}

OrgCrimeOutcome org_crime_profile(const std::vector<SnifferNode>& sniffers,
                                  const std::vector<DiagnosisKey>& published,
                                  const SideChannel& side_channel,
                                  size_t candidate_profiles,
                                  const AttackGroundTruth& truth,
                                  Rng& attacker_rng) {
    OrgCrimeOutcome outcome;
    outcome.degraded = !side_channel.available;
    int64_t bucket_ms = side_channel.bucket_ms > 0 ? side_channel.bucket_ms
                                                   : 900'000;

    std::unordered_map<Rpi, size_t, ByteArrayHash> rpi_to_key;
    for (size_t k = 0; k < published.size(); ++k) {
        TemporaryExposureKey tek = published[k].tek();
        for (const Rpi& rpi : rpis_for_day(tek)) {
            rpi_to_key.emplace(rpi, k);
        }
        Trajectory trajectory;
        trajectory.key_bytes = published[k].key_bytes;
        outcome.trajectories.push_back(std::move(trajectory));
    }

    for (const SnifferNode& sniffer : sniffers) {
        std::string label;
        if (side_channel.available) {
            auto it = side_channel.sniffer_locations.find(sniffer.name);
            label = it != side_channel.sniffer_locations.end()
                        ? it->second
                        : sniffer.location;
        }
        if (label.empty()) label = "node:" + sniffer.name;
        for (const SnifferEntry& entry : sniffer.log) {
            auto it = rpi_to_key.find(payload_rpi(entry.payload));
            if (it == rpi_to_key.end()) continue;
            Trajectory& trajectory = outcome.trajectories[it->second];
            trajectory.visits.push_back(
                {entry.time_ms / bucket_ms * bucket_ms, label});
            auto src = truth.rpi_source.find(payload_rpi(entry.payload));
            if (src != truth.rpi_source.end()) {
                trajectory.true_device = src->second;
            }
        }
    }
    for (Trajectory& trajectory : outcome.trajectories) {
        std::sort(trajectory.visits.begin(), trajectory.visits.end());
        trajectory.visits.erase(
            std::unique(trajectory.visits.begin(), trajectory.visits.end()),
            trajectory.visits.end());
    }

    if (outcome.degraded || candidate_profiles < 1) {
        return outcome;
    }

    // One base draw keeps decoy streams stable as the candidate count
    // grows, so profile sets are nested across {2, 5, 10, 20}.
    uint64_t decoy_base = attacker_rng();

    for (size_t t = 0; t < outcome.trajectories.size(); ++t) {
        Trajectory& trajectory = outcome.trajectories[t];
        if (trajectory.visits.empty()) continue;

        auto truth_it = truth.device_visits.find(trajectory.true_device);
        std::vector<Visit> true_profile;
        if (truth_it != truth.device_visits.end()) {
            for (const auto& [bucket, location] : truth_it->second) {
                true_profile.push_back({bucket, location});
            }
        }

        std::vector<std::vector<Visit>> profiles;
        profiles.push_back(true_profile);
        for (size_t d = 1; d < candidate_profiles; ++d) {
            Rng decoy_rng = make_stream(decoy_base, "decoy", t * 1000 + d);
            std::vector<Visit> decoy;
            if (bernoulli(decoy_rng, kDoppelgangerRate)) {
                decoy = true_profile;
            } else {
                for (const Visit& visit : true_profile) {
                    Visit shifted = visit;
                    int64_t jitter =
                        uniform_i64(decoy_rng, 1, 3) * bucket_ms;
                    if (bernoulli(decoy_rng, 0.5)) jitter = -jitter;
                    shifted.bucket_start_ms += jitter;
                    decoy.push_back(shifted);
                }
                std::sort(decoy.begin(), decoy.end());
                decoy.erase(std::unique(decoy.begin(), decoy.end()),
                            decoy.end());
            }
            profiles.push_back(std::move(decoy));
        }

        std::set<Visit> observed(trajectory.visits.begin(),
                                 trajectory.visits.end());
        size_t best = 0;
        size_t best_score = 0;
        bool tie = false;
        for (size_t p = 0; p < profiles.size(); ++p) {
            size_t score = 0;
            for (const Visit& visit : profiles[p]) {
                if (observed.count(visit)) ++score;
            }
            if (p == 0 || score > best_score) {
                best = p;
                best_score = score;
                tie = false;
            } else if (score == best_score) {
                tie = true;
            }
        }

        trajectory.assigned_profile = static_cast<int>(best);
        trajectory.correct = !tie && best == 0 && best_score > 0;
        ++outcome.assignments;
        if (trajectory.correct) ++outcome.correct;
    }

    outcome.precision =
        outcome.assignments == 0
            ? 0.0
            : static_cast<double>(outcome.correct) /
                  static_cast<double>(outcome.assignments);
    return outcome;
}

AttackOutcome org_crime_outcome_report(const OrgCrimeOutcome& outcome,
                                       size_t candidate_profiles) {
    AttackOutcome report;
    report.threat_model = "orgcrime1";
    size_t placed = 0;
    for (const Trajectory& trajectory : outcome.trajectories) {
        if (!trajectory.visits.empty()) ++placed;
    }
    report.info_leaked =
        placed > 0 ? InfoLeaked::MovementProfile : InfoLeaked::None;
    report.metrics["published_keys"] =
        static_cast<double>(outcome.trajectories.size());
    report.metrics["trajectories_with_visits"] = static_cast<double>(placed);
    report.metrics["candidate_profiles"] =
        static_cast<double>(candidate_profiles);
    report.metrics["assignments"] = static_cast<double>(outcome.assignments);
    report.metrics["precision"] = outcome.precision;
    if (outcome.degraded) {
        report.notes.push_back(
            "no side channel: trajectories reconstructed without identities");
    }
    return report;
}

AttackOutcome org_crime_device_read(const Device& device, bool compromised) {
    if (!compromised) {
        throw AuthorizationError(
            "reading app state requires control of the victim's phone");
    }
    AttackOutcome outcome;
    outcome.threat_model = "orgcrime2";
    outcome.info_leaked = InfoLeaked::InfectionStatus;
    outcome.metrics["infected"] = device.infected() ? 1.0 : 0.0;
    outcome.metrics["notified"] = device.notified() ? 1.0 : 0.0;
    outcome.metrics["stored_observations"] =
        static_cast<double>(device.observations().size());
    outcome.notes.push_back(device.infected()
                                ? "victim's app state shows a positive status"
                                : "victim's app state shows no positive status");
    return outcome;
}

}  // namespace gaensim
