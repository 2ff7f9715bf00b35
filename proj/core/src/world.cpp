#include "gaensim/world.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <queue>
#include <tuple>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

constexpr int64_t kDayMs = 86'400'000;
constexpr double kVisitRadius = 10.0;

std::string format_position(const Position& p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g:%g", p.x, p.y);
    return buf;
}

}  // namespace

// Heap entries ordered ascending by (time, receiver, emitter); receivers are
// indexed devices first, then sniffers.
struct Candidate {
    int64_t t_ms;
    size_t receiver;
    size_t emitter;
    int64_t window_end_ms;

    bool operator>(const Candidate& other) const {
        return std::tie(t_ms, receiver, emitter) >
               std::tie(other.t_ms, other.receiver, other.emitter);
    }
};

struct WindowStart {
    int64_t t_ms;
    size_t receiver;

    bool operator>(const WindowStart& other) const {
        return std::tie(t_ms, receiver) > std::tie(other.t_ms, other.receiver);
    }
};

struct World::Engine {
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>>
        deliveries;
    std::priority_queue<WindowStart, std::vector<WindowStart>, std::greater<>>
        windows;
};

World::World(const ScenarioConfig& scenario)
    : scenario_(scenario), radio_(scenario.radio) {
    uint64_t seed = scenario_.seed;
    devices_.reserve(scenario_.devices.size());
    for (size_t i = 0; i < scenario_.devices.size(); ++i) {
        const DeviceSpec& spec = scenario_.devices[i];
        DeviceConfig cfg;
        cfg.id = static_cast<uint32_t>(i);
        cfg.name = spec.name;
        cfg.position = spec.position;
        cfg.tx_power_dbm = spec.tx_power_dbm;
        cfg.extra_attenuation_db = spec.extra_attenuation_db;
        cfg.advertising_interval_ms = spec.advertising_interval_ms;
        cfg.scan_period_ms = spec.scan_period_ms;
        cfg.scan_window_ms = spec.scan_window_ms;
        cfg.rotation_min_ms = spec.rotation_min_ms;
        cfg.rotation_max_ms = spec.rotation_max_ms;
        cfg.async_fault = spec.async_fault;
        cfg.record_overhead_bytes = spec.record_overhead_bytes;
        cfg.start_enabled = spec.enabled;
        devices_.emplace_back(cfg, seed);
        truth_.device_names[cfg.id] = spec.name;
    }
    sniffers_.reserve(scenario_.sniffers.size());
    for (const SnifferSpec& spec : scenario_.sniffers) {
        SnifferNode node;
        node.name = spec.name;
        node.position = spec.position;
        node.location = spec.location;
        node.scan_period_ms = spec.scan_period_ms;
        node.scan_window_ms = spec.scan_window_ms;
        sniffers_.push_back(std::move(node));
    }

    size_t receiver_count = devices_.size() + sniffers_.size();
    receiver_rngs_.reserve(receiver_count);
    window_phase_ms_.assign(receiver_count, 0);
    for (size_t r = 0; r < receiver_count; ++r) {
        receiver_rngs_.push_back(make_stream(seed, "rx", r));
        Rng phase_rng = make_stream(seed, "scanphase", r);
        int64_t period = r < devices_.size()
                             ? devices_[r].config().scan_period_ms
                             : sniffers_[r - devices_.size()].scan_period_ms;
        if (period > 0) {
            window_phase_ms_[r] = uniform_i64(phase_rng, 0, period - 1);
        }
    }

    for (size_t i = 0; i < scenario_.devices.size(); ++i) {
        const DeviceSpec& spec = scenario_.devices[i];
        for (const ToggleSpec& t : spec.toggles) {
            controls_.push_back({t.time_ms, i, 0, t.enabled, {}});
        }
        for (const WaypointSpec& w : spec.waypoints) {
            controls_.push_back({w.time_ms, i, 1, false, w.position});
        }
        if (spec.infected_at_ms) {
            controls_.push_back({*spec.infected_at_ms, i, 2, true, {}});
        }
    }
    std::sort(controls_.begin(), controls_.end(),
              [](const Control& a, const Control& b) {
                  return std::tie(a.time_ms, a.device_index, a.kind) <
                         std::tie(b.time_ms, b.device_index, b.kind);
              });

    engine_ = std::make_unique<Engine>();
    for (size_t r = 0; r < receiver_count; ++r) {
        int64_t period = r < devices_.size()
                             ? devices_[r].config().scan_period_ms
                             : sniffers_[r - devices_.size()].scan_period_ms;
        int64_t window = r < devices_.size()
                             ? devices_[r].config().scan_window_ms
                             : sniffers_[r - devices_.size()].scan_window_ms;
        if (r >= devices_.size() && period <= 0) {
            // Always-on sniffer: one window spanning the whole run.
            engine_->windows.push({0, r});
        } else if (period > 0 && window > 0) {
            engine_->windows.push({window_phase_ms_[r], r});
        }
    }

    for (Device& device : devices_) {
        record_device_events(device);
    }
    compute_true_visits();
}

World::~World() = default;

void World::record_device_events(Device& device) {
    for (const DeviceEvent& event : device.drain_events()) {
        TraceEvent te;
        te.time_ms = event.time_ms;
        te.src = device.name();
        switch (event.kind) {
            case DeviceEvent::Kind::Rotate: te.event_type = "rotate"; break;
            case DeviceEvent::Kind::TekRoll: te.event_type = "tekroll"; break;
            case DeviceEvent::Kind::AddressSwap:
                te.event_type = "addrswap";
                break;
        }
        if (event.kind != DeviceEvent::Kind::TekRoll) {
            te.address_hex = format_mac(event.address);
            Bytes payload(event.rpi.begin(), event.rpi.end());
            payload.insert(payload.end(), event.aem.begin(), event.aem.end());
            te.payload_hex = to_hex(payload);

            ByteArray<26> pair{};
            std::copy(event.address.begin(), event.address.end(), pair.begin());
            std::copy(payload.begin(), payload.end(), pair.begin() + 6);
            truth_.pair_source[pair] = device.id();
            truth_.rpi_source[event.rpi] = device.id();
        }
        trace_.add(std::move(te));
    }
}

void World::compute_true_visits() {
    for (size_t i = 0; i < devices_.size(); ++i) {
        const DeviceSpec& spec = scenario_.devices[i];
        std::vector<std::pair<int64_t, Position>> segments;
        segments.emplace_back(0, spec.position);
        for (const WaypointSpec& w : spec.waypoints) {
            segments.emplace_back(w.time_ms, w.position);
        }
        std::sort(segments.begin(), segments.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        auto& visits = truth_.device_visits[static_cast<uint32_t>(i)];
        for (size_t s = 0; s < segments.size(); ++s) {
            int64_t seg_start = segments[s].first;
            int64_t seg_end = s + 1 < segments.size() ? segments[s + 1].first
                                                      : scenario_.duration_ms;
            if (seg_end <= seg_start) continue;
            for (const SnifferNode& sniffer : sniffers_) {
                if (sniffer.location.empty()) continue;
                if (distance_m(segments[s].second, sniffer.position) >
                    kVisitRadius) {
                    continue;
                }
                int64_t bucket = seg_start / 900'000 * 900'000;
                for (; bucket < seg_end; bucket += 900'000) {
                    visits.emplace_back(bucket, sniffer.location);
                }
            }
        }
        std::sort(visits.begin(), visits.end());
        visits.erase(std::unique(visits.begin(), visits.end()), visits.end());
    }
}

Device* World::device_by_name(const std::string& name) {
    for (Device& device : devices_) {
        if (device.name() == name) return &device;
    }
    return nullptr;
}

void World::apply_timed_controls(int64_t up_to_ms) {
    while (next_control_ < controls_.size() &&
           controls_[next_control_].time_ms <= up_to_ms) {
        const Control& control = controls_[next_control_++];
        Device& device = devices_[control.device_index];
        TraceEvent te;
        te.time_ms = control.time_ms;
        te.src = device.name();
        switch (control.kind) {
            case 0:
                device.set_enabled(control.flag, control.time_ms);
                te.event_type = "toggle";
                te.dst = control.flag ? "on" : "off";
                break;
            case 1:
                device.set_position(control.position);
                te.event_type = "move";
                te.dst = format_position(control.position);
                break;
            case 2: {
                device.advance_to(control.time_ms);
                device.set_infected(true);
                te.event_type = "infect";
                InfectionUpload upload;
                upload.device_id = device.id();
                upload.time_ms = control.time_ms;
                upload.teks =
                    device.get_tek_history(ConsentToken::user_approved());
                uploads_.push_back(std::move(upload));
                break;
            }
        }
        record_device_events(device);
        trace_.add(std::move(te));
    }
}

void World::deliver(int64_t t_ms, size_t receiver, size_t emitter) {
    apply_timed_controls(t_ms);

    Device& source = devices_[emitter];
    bool to_sniffer = receiver >= devices_.size();
    if (!to_sniffer && !devices_[receiver].enabled()) return;

    auto packet = source.emission_at(t_ms);
    record_device_events(source);
    if (!packet) return;

    const Position& rx_pos = to_sniffer
                                 ? sniffers_[receiver - devices_.size()].position
                                 : devices_[receiver].position();
    double dist = std::max(distance_m(source.position(), rx_pos),
                           radio_.min_distance_m);
    double attenuation = radio_.attenuation_db(dist, packet->tx_power_dbm) +
                         source.config().extra_attenuation_db;
    if (!to_sniffer) {
        attenuation += devices_[receiver].config().extra_attenuation_db;
    }

    double p = radio_.reception_probability_db(attenuation);
    if (p <= 0.0) return;
    if (p < 1.0 && !bernoulli(receiver_rngs_[receiver], p)) return;

    TraceEvent te;
    te.event_type = "recv";
    te.time_ms = t_ms;
    te.src = source.name();
    te.address_hex = format_mac(packet->address);
    te.payload_hex = to_hex(packet->payload);
    te.attenuation_db = attenuation;

    if (to_sniffer) {
        SnifferNode& sniffer = sniffers_[receiver - devices_.size()];
        sniffer.log.push_back(
            {t_ms, packet->address, packet->payload, attenuation});
        te.dst = sniffer.name;
    } else {
        devices_[receiver].on_receive(*packet, t_ms, attenuation);
        te.dst = devices_[receiver].name();
    }
    trace_.add(std::move(te));
    ++delivered_total_;
    ++delivered_step_;
}

uint64_t World::step(int64_t dt_ms) {
    if (dt_ms <= 0) {
        throw std::invalid_argument("step size must be positive");
    }
    delivered_step_ = 0;
    int64_t target = std::min(now_ms_ + dt_ms, scenario_.duration_ms);

    while (true) {
        int64_t next_window = engine_->windows.empty()
                                  ? std::numeric_limits<int64_t>::max()
                                  : engine_->windows.top().t_ms;
        int64_t next_delivery = engine_->deliveries.empty()
                                    ? std::numeric_limits<int64_t>::max()
                                    : engine_->deliveries.top().t_ms;
        if (std::min(next_window, next_delivery) >= target) break;

        if (next_window <= next_delivery) {
            WindowStart w = engine_->windows.top();
            engine_->windows.pop();
            open_window(w.t_ms, w.receiver);
        } else {
            Candidate c = engine_->deliveries.top();
            engine_->deliveries.pop();
            deliver(c.t_ms, c.receiver, c.emitter);
            int64_t next =
                c.t_ms + devices_[c.emitter].config().advertising_interval_ms;
            if (next < std::min(c.window_end_ms, scenario_.duration_ms)) {
                engine_->deliveries.push(
                    {next, c.receiver, c.emitter, c.window_end_ms});
            }
        }
    }

    apply_timed_controls(target - 1);
    int64_t day = target / kDayMs;
    if (day > last_prune_day_ && target % kDayMs == 0) {
        last_prune_day_ = day;
        for (Device& device : devices_) {
            device.prune(target);
        }
    }
    now_ms_ = target;
    return delivered_step_;
}

void World::open_window(int64_t start_ms, size_t receiver) {
    bool is_sniffer = receiver >= devices_.size();
    int64_t period = is_sniffer
                         ? sniffers_[receiver - devices_.size()].scan_period_ms
                         : devices_[receiver].config().scan_period_ms;
    int64_t window = is_sniffer
                         ? sniffers_[receiver - devices_.size()].scan_window_ms
                         : devices_[receiver].config().scan_window_ms;
    int64_t end_ms;
    if (is_sniffer && period <= 0) {
        end_ms = scenario_.duration_ms;
    } else {
        end_ms = start_ms + window;
        if (start_ms + period < scenario_.duration_ms) {
            engine_->windows.push({start_ms + period, receiver});
        }
    }

    TraceEvent te;
    te.event_type = "scan";
    te.time_ms = start_ms;
    te.src = is_sniffer ? sniffers_[receiver - devices_.size()].name
                        : devices_[receiver].name();
    trace_.add(std::move(te));

    for (size_t e = 0; e < devices_.size(); ++e) {
        if (!is_sniffer && e == receiver) continue;
        int64_t first = devices_[e].next_emission_time(start_ms);
        if (first < std::min(end_ms, scenario_.duration_ms)) {
            engine_->deliveries.push({first, receiver, e, end_ms});
        }
    }
}

uint64_t World::run() {
    if (now_ms_ < scenario_.duration_ms) {
        step(scenario_.duration_ms - now_ms_);
    }
    for (Device& device : devices_) {
        device.advance_to(scenario_.duration_ms);
        record_device_events(device);
    }
    return delivered_total_;
}

TraceLog& World::trace() {
    if (!trace_sorted_) {
        trace_.sort();
        trace_sorted_ = true;
    }
    return trace_;
}

}  // namespace gaensim
