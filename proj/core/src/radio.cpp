#include "gaensim/radio.hpp"

#include <cmath>
#include <stdexcept>

namespace gaensim {

double distance_m(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double RadioModel::attenuation_db(double distance, int8_t tx_power_dbm) const {
    if (distance <= 0.0 || !std::isfinite(distance)) {
        throw std::domain_error("distance must be positive");
    }
    double d = std::max(distance, min_distance_m);
    return reference_loss_db + 10.0 * path_loss_exponent * std::log10(d) -
           static_cast<double>(tx_power_dbm);
}

double RadioModel::reception_probability_db(double attenuation) const {
    if (attenuation <= saturation_db) return 1.0;
    if (attenuation >= reception_floor_db) return 0.0;
    return (reception_floor_db - attenuation) /
           (reception_floor_db - saturation_db);
}

double RadioModel::reception_probability(double distance,
                                         int8_t tx_power_dbm) const {
    return reception_probability_db(attenuation_db(distance, tx_power_dbm));
}

bool RadioModel::receive(Rng& rng, double attenuation) const {
    double p = reception_probability_db(attenuation);
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return bernoulli(rng, p);
}

}  // namespace gaensim
