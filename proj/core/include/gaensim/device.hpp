#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gaensim/bytes.hpp"
#include "gaensim/crypto.hpp"
#include "gaensim/radio.hpp"
#include "gaensim/rng.hpp"

namespace gaensim {

using BluetoothAddress = ByteArray<6>;

/// One over-the-air beacon. Carries no device identity beyond the
/// advertised address and payload.
struct AdvertisementPacket {
    BluetoothAddress address{};
    Bytes payload;  // 20 bytes: RPI(16) || AEM(4)
    int64_t emit_time_ms = 0;
    int8_t tx_power_dbm = -20;
};

struct ObservationRecord {
    Rpi rpi{};
    Aem aem{};
    int64_t first_seen_ms = 0;
    int64_t last_seen_ms = 0;
    uint32_t scan_count = 0;
    double min_attenuation_db = 0.0;
};

/// Grants TEK release. Only produced through user_approved so accidental
/// default construction does not authorize anything.
struct ConsentToken {
    bool granted = false;

    static ConsentToken user_approved() { return {true}; }
};

struct DeviceConfig {
    uint32_t id = 0;
    std::string name;
    Position position{};
    int8_t tx_power_dbm = -20;
    double extra_attenuation_db = 0.0;
    int64_t advertising_interval_ms = 250;
    int64_t scan_period_ms = 240'000;
    int64_t scan_window_ms = 4'000;
    int64_t rotation_min_ms = 600'000;
    int64_t rotation_max_ms = 1'200'000;
    bool async_fault = false;
    int64_t async_lag_min_ms = 30'000;
    int64_t async_lag_max_ms = 120'000;
    int retention_days = 14;
    uint32_t record_overhead_bytes = 64;
    bool start_enabled = true;
};

/// Schedule changes a device performed while advancing, for the trace.
struct DeviceEvent {
    enum class Kind { Rotate, TekRoll, AddressSwap };
    Kind kind{};
    int64_t time_ms = 0;
    BluetoothAddress address{};
    Rpi rpi{};
    Aem aem{};
};

class Device {
  public:
    Device(DeviceConfig config, uint64_t master_seed);

    uint32_t id() const { return config_.id; }
    const std::string& name() const { return config_.name; }
    const DeviceConfig& config() const { return config_; }
    const Position& position() const { return position_; }
    void set_position(const Position& p) { position_ = p; }
    bool enabled() const { return enabled_; }
    bool infected() const { return infected_; }
    void set_infected(bool flag) { infected_ = flag; }
    bool notified() const { return notified_; }
    void set_notified(bool flag) { notified_ = flag; }

    void set_enabled(bool flag, int64_t now_ms);

    /// Processes TEK rolls, rotations, and delayed address swaps up to and
    /// including now_ms, in time order.
    void advance_to(int64_t now_ms);

    /// Advances to now_ms and returns the advertisements due strictly after
    /// the previous tick, on the 250 ms schedule. Disabled devices emit
    /// nothing.
    std::vector<AdvertisementPacket> tick(int64_t now_ms);

    /// Single emission if now_ms lies on the advertising schedule. Does not
    /// interfere with tick bookkeeping.
    std::optional<AdvertisementPacket> emission_at(int64_t now_ms);

    /// First advertising time >= now_ms.
    int64_t next_emission_time(int64_t now_ms) const;

    void on_receive(const AdvertisementPacket& packet, int64_t now_ms,
                    double attenuation_db);

    size_t prune(int64_t now_ms);

    /// The stored TEKs, newest last. Requires infection plus consent.
    std::vector<TemporaryExposureKey> get_tek_history(
        const ConsentToken& consent) const;

    uint64_t storage_bytes() const;

    const std::vector<ObservationRecord>& observations() const {
        return observations_;
    }
    const TemporaryExposureKey& current_tek() const;
    const BluetoothAddress& current_address() const { return address_; }
    const Rpi& current_rpi() const { return rpi_; }
    uint64_t malformed_count() const { return malformed_; }
    int64_t next_rotation_at() const { return rotation_deadline_ms_; }

    std::vector<DeviceEvent> drain_events();

    // Diagnosis-key staging for the exposure module.
    size_t stage_keys(const std::vector<DiagnosisKey>& keys);
    const std::vector<DiagnosisKey>& staged_keys() const {
        return staged_keys_;
    }

  private:
    void roll_tek(int64_t now_ms);
    void rotate_identifiers(int64_t now_ms);
    void apply_address_swap(int64_t now_ms);

    DeviceConfig config_;
    Position position_;
    bool enabled_ = true;
    bool infected_ = false;
    bool notified_ = false;

    Rng schedule_rng_;
    int64_t advertising_phase_ms_ = 0;

    std::deque<TemporaryExposureKey> teks_;
    BluetoothAddress address_{};
    BluetoothAddress pending_address_{};
    Rpi rpi_{};
    Aem aem_{};
    int64_t rotation_deadline_ms_ = 0;
    int64_t pending_address_swap_ms_ = -1;
    int64_t clock_ms_ = 0;
    int64_t last_tick_ms_ = -1;

    std::vector<ObservationRecord> observations_;
    std::unordered_map<Rpi, size_t, ByteArrayHash> observation_index_;
    uint64_t malformed_ = 0;

    std::vector<DiagnosisKey> staged_keys_;
    std::vector<DeviceEvent> pending_events_;
};

}  // namespace gaensim
