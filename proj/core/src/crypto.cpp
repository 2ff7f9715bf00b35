#include "gaensim/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstring>
#include <memory>
#include <stdexcept>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

ByteArray<32> hmac_sha256(std::span<const uint8_t> key,
                          std::span<const uint8_t> message) {
    ByteArray<32> out{};
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
              message.data(), message.size(), out.data(), &len) ||
        len != out.size()) {
        throw std::runtime_error("HMAC-SHA256 failed");
    }
    return out;
}

}  // namespace

IntervalNumber interval_number(uint64_t unix_seconds) {
    return static_cast<IntervalNumber>(unix_seconds / kIntervalSeconds);
}

IntervalNumber day_start_interval(IntervalNumber interval) {
    return interval - interval % kIntervalsPerDay;
}

TemporaryExposureKey generate_tek(Rng& rng, IntervalNumber day_start,
                                  uint32_t rolling_period) {
    if (day_start % kIntervalsPerDay != 0) {
        throw ValidityError("TEK start interval must be day-aligned");
    }
    TemporaryExposureKey tek;
    tek.rolling_start_interval = day_start;
    tek.rolling_period = rolling_period;
    fill_random(rng, tek.key_bytes);
    return tek;
}

ByteArray<16> hkdf_sha256_16(std::span<const uint8_t> ikm,
                             std::string_view info) {
    // Extract with an absent salt (hashlen zero bytes), then a single
    // expand round, which covers any output up to 32 bytes.
    ByteArray<32> zero_salt{};
    ByteArray<32> prk = hmac_sha256(zero_salt, ikm);

    Bytes block(info.begin(), info.end());
    block.push_back(0x01);
    ByteArray<32> t1 = hmac_sha256(prk, block);

    ByteArray<16> out{};
    std::memcpy(out.data(), t1.data(), out.size());
    return out;
}

ByteArray<16> derive_rpik(const TemporaryExposureKey& tek) {
    return hkdf_sha256_16(tek.key_bytes, "EN-RPIK");
}

ByteArray<16> derive_aemk(const TemporaryExposureKey& tek) {
    return hkdf_sha256_16(tek.key_bytes, "EN-AEMK");
}

ByteArray<16> aes128_block(const ByteArray<16>& key,
                           const ByteArray<16>& block) {
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx ||
        !EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.data(),
                            nullptr) ||
        !EVP_CIPHER_CTX_set_padding(ctx.get(), 0)) {
        throw std::runtime_error("AES-128 init failed");
    }
    ByteArray<16> out{};
    int len = 0;
    if (!EVP_EncryptUpdate(ctx.get(), out.data(), &len, block.data(),
                           static_cast<int>(block.size())) ||
        len != static_cast<int>(out.size())) {
        throw std::runtime_error("AES-128 block encryption failed");
    }
    return out;
}

void aes128_ctr_xor(const ByteArray<16>& key, const ByteArray<16>& counter,
                    std::span<uint8_t> data) {
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx || !EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr,
                                    key.data(), counter.data())) {
        throw std::runtime_error("AES-128-CTR init failed");
    }
    int len = 0;
    if (!EVP_EncryptUpdate(ctx.get(), data.data(), &len, data.data(),
                           static_cast<int>(data.size())) ||
        len != static_cast<int>(data.size())) {
        throw std::runtime_error("AES-128-CTR failed");
    }
}

Rpi derive_rpi(const TemporaryExposureKey& tek, IntervalNumber interval) {
    if (!tek.covers(interval)) {
        throw ValidityError("interval outside the key's rolling window");
    }
    ByteArray<16> padded{};
    static constexpr char kTag[] = "EN-RPI";
    std::memcpy(padded.data(), kTag, 6);
    padded[12] = static_cast<uint8_t>(interval);
    padded[13] = static_cast<uint8_t>(interval >> 8);
    padded[14] = static_cast<uint8_t>(interval >> 16);
    padded[15] = static_cast<uint8_t>(interval >> 24);
    return aes128_block(derive_rpik(tek), padded);
}

std::vector<Rpi> rpis_for_day(const TemporaryExposureKey& tek) {
    std::vector<Rpi> out;
    out.reserve(tek.rolling_period);
    ByteArray<16> rpik = derive_rpik(tek);
    for (uint32_t i = 0; i < tek.rolling_period; ++i) {
        IntervalNumber interval = tek.rolling_start_interval + i;
        ByteArray<16> padded{};
        static constexpr char kTag[] = "EN-RPI";
        std::memcpy(padded.data(), kTag, 6);
        padded[12] = static_cast<uint8_t>(interval);
        padded[13] = static_cast<uint8_t>(interval >> 8);
        padded[14] = static_cast<uint8_t>(interval >> 16);
        padded[15] = static_cast<uint8_t>(interval >> 24);
        out.push_back(aes128_block(rpik, padded));
    }
    return out;
}

Aem encrypt_metadata(const TemporaryExposureKey& tek, const Rpi& rpi,
                     const Metadata& metadata) {
    ByteArray<4> data{metadata.version,
                      static_cast<uint8_t>(metadata.tx_power_dbm), 0x00, 0x00};
    aes128_ctr_xor(derive_aemk(tek), rpi, data);
    return data;
}

Metadata decrypt_metadata(const TemporaryExposureKey& tek, const Rpi& rpi,
                          const Aem& aem) {
    ByteArray<4> data = aem;
    aes128_ctr_xor(derive_aemk(tek), rpi, data);
    Metadata metadata;
    metadata.version = data[0];
    metadata.tx_power_dbm = static_cast<int8_t>(data[1]);
    return metadata;
}

}  // namespace gaensim
