#pragma once

#include <cstdint>

#include "gaensim/rng.hpp"

namespace gaensim {

struct Position {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance_m(const Position& a, const Position& b);

/// Log-distance path loss plus a piecewise-linear reception curve.
struct RadioModel {
    double reference_loss_db = 40.0;
    double path_loss_exponent = 2.2;
    double saturation_db = 67.0;
    double reception_floor_db = 88.0;
    double min_distance_m = 0.1;

    /// Attenuation in dB between a transmitter at `tx_power_dbm` and a
    /// receiver `distance_m` away. Distances under min_distance_m clamp to
    /// it; non-positive distances are a domain error.
    double attenuation_db(double distance_m, int8_t tx_power_dbm) const;

    /// Chance that one advertisement at this attenuation is decoded:
    /// 1 at or below saturation, 0 at or beyond the floor, linear between.
    double reception_probability_db(double attenuation_db) const;

    /// Same curve addressed by distance.
    double reception_probability(double distance_m,
                                 int8_t tx_power_dbm = -20) const;

    bool receive(Rng& rng, double attenuation_db) const;
};

}  // namespace gaensim
