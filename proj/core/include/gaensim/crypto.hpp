#pragma once

#include <cstdint>
#include <vector>

#include "gaensim/bytes.hpp"
#include "gaensim/rng.hpp"

namespace gaensim {

/// Number of seconds covered by one interval number.
inline constexpr uint32_t kIntervalSeconds = 600;
/// Intervals per key validity day.
inline constexpr uint32_t kIntervalsPerDay = 144;

/// Count of 10-minute windows since the Unix epoch.
using IntervalNumber = uint32_t;

using Rpi = ByteArray<16>;
using Aem = ByteArray<4>;

/// 16-byte daily device secret plus its validity window.
struct TemporaryExposureKey {
    ByteArray<16> key_bytes{};
    IntervalNumber rolling_start_interval = 0;
    uint32_t rolling_period = kIntervalsPerDay;

    bool covers(IntervalNumber interval) const {
        return interval >= rolling_start_interval &&
               interval < rolling_start_interval + rolling_period;
    }
    friend bool operator==(const TemporaryExposureKey&,
                           const TemporaryExposureKey&) = default;
};

/// Advertised beacon metadata. The two reserved bytes are zero on the wire.
struct Metadata {
    uint8_t version = 0x40;
    int8_t tx_power_dbm = -20;

    friend bool operator==(const Metadata&, const Metadata&) = default;
};

IntervalNumber interval_number(uint64_t unix_seconds);

/// Floors an interval number to the start of its day.
IntervalNumber day_start_interval(IntervalNumber interval);

/// Draws a fresh 16-byte key valid for one day starting at `day_start`.
/// Throws ValidityError if `day_start` is not day-aligned.
TemporaryExposureKey generate_tek(Rng& rng, IntervalNumber day_start,
                                  uint32_t rolling_period = kIntervalsPerDay);

/// Identifier subkey: HKDF-SHA256(key, info="EN-RPIK", 16 bytes, no salt).
ByteArray<16> derive_rpik(const TemporaryExposureKey& tek);

/// Metadata subkey: HKDF-SHA256(key, info="EN-AEMK", 16 bytes, no salt).
ByteArray<16> derive_aemk(const TemporaryExposureKey& tek);

/// Rolling proximity identifier for one interval: a single AES-128 block of
/// "EN-RPI" || 6 zero bytes || little-endian interval, under derive_rpik.
/// Throws ValidityError if the interval is outside the key's window.
Rpi derive_rpi(const TemporaryExposureKey& tek, IntervalNumber interval);

/// All identifiers of the key's day, in interval order.
std::vector<Rpi> rpis_for_day(const TemporaryExposureKey& tek);

/// Encrypts the 4 metadata bytes with AES-128-CTR keyed by derive_aemk and
/// the identifier as the counter block, binding the ciphertext to the RPI.
Aem encrypt_metadata(const TemporaryExposureKey& tek, const Rpi& rpi,
                     const Metadata& metadata);

/// Inverse of encrypt_metadata under the same (key, identifier). Stream
/// decryption cannot detect tampering; a wrong key yields garbage metadata.
Metadata decrypt_metadata(const TemporaryExposureKey& tek, const Rpi& rpi,
                          const Aem& aem);

// Primitive layer, exposed for test vectors.
ByteArray<16> hkdf_sha256_16(std::span<const uint8_t> ikm, std::string_view info);
ByteArray<16> aes128_block(const ByteArray<16>& key, const ByteArray<16>& block);
void aes128_ctr_xor(const ByteArray<16>& key, const ByteArray<16>& counter,
                    std::span<uint8_t> data);

/// A published key with the metadata carried in export files.
struct DiagnosisKey {
    ByteArray<16> key_bytes{};
    IntervalNumber rolling_start_interval = 0;
    uint32_t rolling_period = kIntervalsPerDay;
    int32_t transmission_risk = 0;

    TemporaryExposureKey tek() const {
        return {key_bytes, rolling_start_interval, rolling_period};
    }
    friend bool operator==(const DiagnosisKey&, const DiagnosisKey&) = default;
};

}  // namespace gaensim
