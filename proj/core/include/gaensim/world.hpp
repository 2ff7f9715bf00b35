#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gaensim/adversary.hpp"
#include "gaensim/device.hpp"
#include "gaensim/radio.hpp"
#include "gaensim/scenario.hpp"
#include "gaensim/trace.hpp"

namespace gaensim {

/// A device's TEKs captured at its diagnosis time, for the upload flow.
struct InfectionUpload {
    uint32_t device_id = 0;
    int64_t time_ms = 0;
    std::vector<TemporaryExposureKey> teks;
};

/// Single-threaded discrete-event loop. Reception draws are consumed in
/// (time, receiver, emitter) order, so a run is one deterministic function
/// of the scenario and seed regardless of step sizes.
class World {
  public:
    explicit World(const ScenarioConfig& scenario);
    ~World();

    /// Advances the clock by dt_ms, delivering advertisements to scanning
    /// devices and sniffers. Returns packets delivered in this step.
    uint64_t step(int64_t dt_ms);

    /// Runs to the scenario duration. Returns total packets delivered.
    uint64_t run();

    int64_t now_ms() const { return now_ms_; }
    uint64_t delivered_total() const { return delivered_total_; }

    std::vector<Device>& devices() { return devices_; }
    const std::vector<Device>& devices() const { return devices_; }
    Device* device_by_name(const std::string& name);

    std::vector<SnifferNode>& sniffers() { return sniffers_; }
    const std::vector<SnifferNode>& sniffers() const { return sniffers_; }

    const AttackGroundTruth& ground_truth() const { return truth_; }
    const std::vector<InfectionUpload>& uploads() const { return uploads_; }

    /// Finalized, time-sorted log. Call after the run completes.
    TraceLog& trace();

    const ScenarioConfig& scenario() const { return scenario_; }

  private:
    struct Engine;

    void apply_timed_controls(int64_t up_to_ms);
    void record_device_events(Device& device);
    void compute_true_visits();
    void open_window(int64_t start_ms, size_t receiver);
    void deliver(int64_t t_ms, size_t receiver, size_t emitter);

    ScenarioConfig scenario_;
    RadioModel radio_;
    std::vector<Device> devices_;
    std::vector<SnifferNode> sniffers_;
    std::vector<Rng> receiver_rngs_;  // devices then sniffers
    std::vector<int64_t> window_phase_ms_;
    std::unique_ptr<Engine> engine_;

    struct Control {
        int64_t time_ms;
        size_t device_index;
        int kind;  // 0 toggle, 1 waypoint, 2 infect
        bool flag;
        Position position;
    };
    std::vector<Control> controls_;
    size_t next_control_ = 0;

    AttackGroundTruth truth_;
    std::vector<InfectionUpload> uploads_;
    TraceLog trace_;
    bool trace_sorted_ = false;

    int64_t now_ms_ = 0;
    int64_t last_prune_day_ = 0;
    uint64_t delivered_total_ = 0;
    uint64_t delivered_step_ = 0;
};

}  // namespace gaensim
