#include "gaensim/device.hpp"

#include <algorithm>
#include <cstring>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

constexpr int64_t kDayMs = 86'400'000;
constexpr int64_t kMsPerInterval =
    static_cast<int64_t>(kIntervalSeconds) * 1000;

}  // namespace

Device::Device(DeviceConfig config, uint64_t master_seed)
    : config_(std::move(config)),
      position_(config_.position),
      enabled_(config_.start_enabled),
      schedule_rng_(make_stream(master_seed, "device", config_.id)) {
    advertising_phase_ms_ =
        uniform_i64(schedule_rng_, 0, config_.advertising_interval_ms - 1);
    teks_.push_back(generate_tek(schedule_rng_, 0));
    rotate_identifiers(0);
    if (!enabled_) {
        pending_events_.clear();
    }
}

const TemporaryExposureKey& Device::current_tek() const {
    return teks_.back();
}

void Device::roll_tek(int64_t now_ms) {
    IntervalNumber day_start =
        day_start_interval(interval_number(static_cast<uint64_t>(now_ms / 1000)));
    teks_.push_back(generate_tek(schedule_rng_, day_start));
    while (teks_.size() > static_cast<size_t>(config_.retention_days)) {
        teks_.pop_front();
    }
    pending_events_.push_back(
        {DeviceEvent::Kind::TekRoll, now_ms, {}, {}, {}});
}

void Device::rotate_identifiers(int64_t now_ms) {
    BluetoothAddress fresh{};
    fill_random(schedule_rng_, fresh);
    rpi_ = derive_rpi(teks_.back(),
                      interval_number(static_cast<uint64_t>(now_ms / 1000)));
    Metadata metadata;
    metadata.tx_power_dbm = config_.tx_power_dbm;
    aem_ = encrypt_metadata(teks_.back(), rpi_, metadata);
    if (config_.async_fault && now_ms > 0) {
        pending_address_swap_ms_ =
            now_ms + uniform_i64(schedule_rng_, config_.async_lag_min_ms,
                                 config_.async_lag_max_ms);
        pending_address_ = fresh;
    } else {
        address_ = fresh;
    }
    rotation_deadline_ms_ =
        now_ms + uniform_i64(schedule_rng_, config_.rotation_min_ms,
                             config_.rotation_max_ms);
    pending_events_.push_back(
        {DeviceEvent::Kind::Rotate, now_ms, address_, rpi_, aem_});
}

void Device::apply_address_swap(int64_t now_ms) {
    address_ = pending_address_;
    pending_address_swap_ms_ = -1;
    pending_events_.push_back(
        {DeviceEvent::Kind::AddressSwap, now_ms, address_, rpi_, aem_});
}

void Device::advance_to(int64_t now_ms) {
    while (true) {
        int64_t next_roll =
            (teks_.back().rolling_start_interval / kIntervalsPerDay + 1) *
            kDayMs;
        int64_t next_event = next_roll;
        int kind = 0;
        if (pending_address_swap_ms_ >= 0 &&
            pending_address_swap_ms_ < next_event) {
            next_event = pending_address_swap_ms_;
            kind = 1;
        }
        if (enabled_ && rotation_deadline_ms_ < next_event) {
            next_event = rotation_deadline_ms_;
            kind = 2;
        }
        if (next_event > now_ms) break;
        switch (kind) {
            case 0: roll_tek(next_event); break;
            case 1: apply_address_swap(next_event); break;
            case 2: rotate_identifiers(next_event); break;
        }
    }
    clock_ms_ = std::max(clock_ms_, now_ms);
}

int64_t Device::next_emission_time(int64_t now_ms) const {
    if (now_ms <= advertising_phase_ms_) return advertising_phase_ms_;
    int64_t interval = config_.advertising_interval_ms;
    int64_t since = now_ms - advertising_phase_ms_;
    int64_t k = (since + interval - 1) / interval;
    return advertising_phase_ms_ + k * interval;
}

std::optional<AdvertisementPacket> Device::emission_at(int64_t now_ms) {
    advance_to(now_ms);
    if (!enabled_) return std::nullopt;
    if (now_ms < advertising_phase_ms_ ||
        (now_ms - advertising_phase_ms_) % config_.advertising_interval_ms !=
            0) {
        return std::nullopt;
    }
    AdvertisementPacket packet;
    packet.address = address_;
    packet.payload.reserve(20);
    packet.payload.insert(packet.payload.end(), rpi_.begin(), rpi_.end());
    packet.payload.insert(packet.payload.end(), aem_.begin(), aem_.end());
    packet.emit_time_ms = now_ms;
    packet.tx_power_dbm = config_.tx_power_dbm;
    return packet;
}

std::vector<AdvertisementPacket> Device::tick(int64_t now_ms) {
    std::vector<AdvertisementPacket> out;
    int64_t t = next_emission_time(last_tick_ms_ + 1);
    while (t <= now_ms) {
        if (auto packet = emission_at(t)) {
            out.push_back(std::move(*packet));
        }
        t += config_.advertising_interval_ms;
    }
    advance_to(now_ms);
    last_tick_ms_ = std::max(last_tick_ms_, now_ms);
    return out;
}

void Device::set_enabled(bool flag, int64_t now_ms) {
    advance_to(now_ms);
    if (flag == enabled_) return;
    enabled_ = flag;
    if (flag) {
        rotate_identifiers(now_ms);
    }
}

void Device::on_receive(const AdvertisementPacket& packet, int64_t now_ms,
                        double attenuation_db) {
    if (!enabled_) return;
    if (packet.payload.size() != 20) {
        ++malformed_;
        return;
    }
    Rpi rpi{};
    std::memcpy(rpi.data(), packet.payload.data(), rpi.size());
    auto it = observation_index_.find(rpi);
    if (it == observation_index_.end()) {
        ObservationRecord record;
        record.rpi = rpi;
        std::memcpy(record.aem.data(), packet.payload.data() + 16,
                    record.aem.size());
        record.first_seen_ms = now_ms;
        record.last_seen_ms = now_ms;
        record.scan_count = 1;
        record.min_attenuation_db = attenuation_db;
        observation_index_.emplace(rpi, observations_.size());
        observations_.push_back(record);
    } else {
        ObservationRecord& record = observations_[it->second];
        record.last_seen_ms = std::max(record.last_seen_ms, now_ms);
        record.scan_count += 1;
        record.min_attenuation_db =
            std::min(record.min_attenuation_db, attenuation_db);
    }
}

size_t Device::prune(int64_t now_ms) {
    int64_t cutoff = now_ms - static_cast<int64_t>(config_.retention_days) * kDayMs;
    size_t removed = 0;

    while (teks_.size() > 1) {
        const TemporaryExposureKey& oldest = teks_.front();
        int64_t end_ms =
            (static_cast<int64_t>(oldest.rolling_start_interval) +
             oldest.rolling_period) *
            kMsPerInterval;
        if (end_ms >= cutoff) break;
        teks_.pop_front();
        ++removed;
    }

    std::vector<ObservationRecord> kept;
    kept.reserve(observations_.size());
    for (const ObservationRecord& record : observations_) {
        if (record.last_seen_ms >= cutoff) {
            kept.push_back(record);
        } else {
            ++removed;
        }
    }
    if (kept.size() != observations_.size()) {
        observations_ = std::move(kept);
        observation_index_.clear();
        for (size_t i = 0; i < observations_.size(); ++i) {
            observation_index_.emplace(observations_[i].rpi, i);
        }
    }
    return removed;
}

std::vector<TemporaryExposureKey> Device::get_tek_history(
    const ConsentToken& consent) const {
    if (!infected_) {
        throw AuthorizationError("device is not diagnosed; TEKs stay local");
    }
    if (!consent.granted) {
        throw AuthorizationError("upload requires user consent");
    }
    return {teks_.begin(), teks_.end()};
}

uint64_t Device::storage_bytes() const {
    uint64_t row = 16 + 4 + 2 * 8 + 4 + 2 + config_.record_overhead_bytes;
    uint64_t total = teks_.size() * (16 + 8);
    for (const ObservationRecord& record : observations_) {
        total += record.scan_count * row;
    }
    return total;
}

std::vector<DeviceEvent> Device::drain_events() {
    std::vector<DeviceEvent> out = std::move(pending_events_);
    pending_events_.clear();
    return out;
}

size_t Device::stage_keys(const std::vector<DiagnosisKey>& keys) {
    size_t inserted = 0;
    for (const DiagnosisKey& key : keys) {
        bool duplicate = false;
        for (const DiagnosisKey& have : staged_keys_) {
            if (have.key_bytes == key.key_bytes) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            staged_keys_.push_back(key);
            ++inserted;
        }
    }
    return inserted;
}

}  // namespace gaensim
