#include "gaensim/server.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <memory>
#include <stdexcept>
#include <utility>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

constexpr char kMagic[8] = {'E', 'N', 'E', 'X', 'P', 'O', 'R', 'T'};
constexpr uint16_t kVersion = 1;

struct PkeyFree {
    void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
struct MdCtxFree {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;

}  // namespace

ByteArray<32> ed25519_public_key(const ByteArray<32>& seed) {
    Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                          seed.data(), seed.size()));
    if (!key) throw std::runtime_error("Ed25519 key construction failed");
    ByteArray<32> out{};
    size_t len = out.size();
    if (!EVP_PKEY_get_raw_public_key(key.get(), out.data(), &len) ||
        len != out.size()) {
        throw std::runtime_error("Ed25519 public key extraction failed");
    }
    return out;
}

Bytes ed25519_sign(const ByteArray<32>& seed, std::span<const uint8_t> message) {
    Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                          seed.data(), seed.size()));
    MdCtx ctx(EVP_MD_CTX_new());
    if (!key || !ctx ||
        !EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get())) {
        throw std::runtime_error("Ed25519 signing init failed");
    }
    Bytes signature(64);
    size_t len = signature.size();
    if (!EVP_DigestSign(ctx.get(), signature.data(), &len, message.data(),
                        message.size()) ||
        len != signature.size()) {
        throw std::runtime_error("Ed25519 signing failed");
    }
    return signature;
}

bool ed25519_verify(const ByteArray<32>& public_key,
                    std::span<const uint8_t> message,
                    std::span<const uint8_t> signature) {
    if (signature.size() != 64) return false;
    Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                         public_key.data(), public_key.size()));
    MdCtx ctx(EVP_MD_CTX_new());
    if (!key || !ctx ||
        !EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr,
                              key.get())) {
        throw std::runtime_error("Ed25519 verification init failed");
    }
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                            message.data(), message.size()) == 1;
}

Bytes serialize_export(const ExportHeader& header,
                       const std::vector<DiagnosisKey>& keys) {
    if (header.region.size() > 255) {
        throw ValidityError("region name too long");
    }
    Bytes out;
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    append_u16(out, kVersion);
    out.push_back(static_cast<uint8_t>(header.region.size()));
    out.insert(out.end(), header.region.begin(), header.region.end());
    append_u32(out, header.batch_num);
    append_u32(out, header.batch_size);
    append_u64(out, header.start_s);
    append_u64(out, header.end_s);
    append_u32(out, static_cast<uint32_t>(keys.size()));
    for (const DiagnosisKey& key : keys) {
        out.insert(out.end(), key.key_bytes.begin(), key.key_bytes.end());
        append_u32(out, key.rolling_start_interval);
        append_u32(out, key.rolling_period);
        append_i32(out, key.transmission_risk);
    }
    return out;
}

ExportContent parse_export(std::span<const uint8_t> bytes) {
    ByteReader reader(bytes);
    Bytes magic = reader.take(sizeof(kMagic));
    if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("bad export magic");
    }
    uint16_t version = reader.u16();
    if (version != kVersion) {
        throw ParseError("unsupported export version");
    }
    ExportContent content;
    uint8_t region_len = reader.u8();
    Bytes region = reader.take(region_len);
    content.header.region.assign(region.begin(), region.end());
    content.header.batch_num = reader.u32();
    content.header.batch_size = reader.u32();
    content.header.start_s = reader.u64();
    content.header.end_s = reader.u64();
    if (content.header.end_s < content.header.start_s) {
        throw ParseError("export period end precedes start");
    }
    uint32_t count = reader.u32();
    content.keys.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        DiagnosisKey key;
        Bytes raw = reader.take(key.key_bytes.size());
        std::memcpy(key.key_bytes.data(), raw.data(), key.key_bytes.size());
        key.rolling_start_interval = reader.u32();
        key.rolling_period = reader.u32();
        key.transmission_risk = reader.i32();
        content.keys.push_back(key);
    }
    if (reader.remaining() != 0) {
        throw ParseError("trailing bytes after export body");
    }
    return content;
}

VerifiedBatch verify_and_parse_export(std::span<const uint8_t> bytes,
                                      std::span<const uint8_t> signature,
                                      const ByteArray<32>& public_key) {
    if (!ed25519_verify(public_key, bytes, signature)) {
        throw IntegrityError("export signature does not verify");
    }
    ExportContent content = parse_export(bytes);
    VerifiedBatch batch;
    batch.keys = std::move(content.keys);
    batch.batch_num = content.header.batch_num;
    batch.verified = true;
    return batch;
}

Bytes serialize_signature(const Bytes& signature,
                          const std::string& key_version) {
    if (key_version.size() > 255) {
        throw ValidityError("key version id too long");
    }
    Bytes out;
    out.push_back(static_cast<uint8_t>(key_version.size()));
    out.insert(out.end(), key_version.begin(), key_version.end());
    out.insert(out.end(), signature.begin(), signature.end());
    return out;
}

std::pair<Bytes, std::string> parse_signature(std::span<const uint8_t> bytes) {
    ByteReader reader(bytes);
    uint8_t len = reader.u8();
    Bytes version = reader.take(len);
    Bytes signature = reader.take(reader.remaining());
    if (signature.size() != 64) {
        throw ParseError("signature must be 64 bytes");
    }
    return {signature, std::string(version.begin(), version.end())};
}

KeyServer::KeyServer(uint64_t master_seed, KeyServerConfig config)
    : config_(std::move(config)),
      pin_rng_(make_stream(master_seed, "server-pin")),
      master_seed_(master_seed) {
    Rng key_rng = make_stream(master_seed, "server-signing-key");
    fill_random(key_rng, signing_seed_);
    public_key_ = ed25519_public_key(signing_seed_);
}

Pin KeyServer::issue_pin(const std::string& case_id, int64_t now_ms) {
    std::string digits;
    do {
        uint64_t n = uniform_u64(pin_rng_, 1'000'000);
        digits.resize(6);
        for (int i = 5; i >= 0; --i) {
            digits[static_cast<size_t>(i)] =
                static_cast<char>('0' + n % 10);
            n /= 10;
        }
    } while (pins_.count(digits));
    Pin pin{digits, case_id, now_ms + config_.pin_expiry_ms, false};
    pins_[digits] = pin;
    return pin;
}

SubmitResult KeyServer::submit_keys(
    const std::string& pin_digits,
    const std::vector<TemporaryExposureKey>& teks, int64_t now_ms,
    int32_t transmission_risk) {
    auto it = pins_.find(pin_digits);
    if (it == pins_.end()) {
        return {SubmitStatus::RejectedAuth, "unknown PIN", 0};
    }
    Pin& pin = it->second;
    if (pin.used) {
        return {SubmitStatus::RejectedAuth, "PIN already used", 0};
    }
    if (now_ms > pin.expiry_ms) {
        return {SubmitStatus::RejectedAuth, "PIN expired", 0};
    }
    if (teks.empty()) {
        return {SubmitStatus::RejectedFormat, "no keys", 0};
    }
    if (teks.size() > config_.max_keys_per_submission) {
        return {SubmitStatus::RejectedFormat, "too many keys", 0};
    }
    for (const TemporaryExposureKey& tek : teks) {
        if (tek.rolling_period == 0 || tek.rolling_period > kIntervalsPerDay) {
            return {SubmitStatus::RejectedFormat, "bad rolling period", 0};
        }
        if (tek.rolling_start_interval % kIntervalsPerDay != 0) {
            return {SubmitStatus::RejectedFormat,
                    "key start is not day aligned", 0};
        }
    }
    pin.used = true;
    for (const TemporaryExposureKey& tek : teks) {
        pending_.push_back({tek.key_bytes, tek.rolling_start_interval,
                            tek.rolling_period, transmission_risk});
    }
    return {SubmitStatus::Accepted, "", teks.size()};
}

ExportFile KeyServer::publish_batch(int64_t now_ms) {
    ExportHeader header;
    header.region = config_.region;
    header.batch_num = static_cast<uint32_t>(batches_.size() + 1);
    header.batch_size = 1;
    header.start_s = last_publish_end_ms_ / 1000;
    header.end_s = static_cast<uint64_t>(now_ms) / 1000;

    // Fisher-Yates with a batch-specific stream, so the upload order is not
    // recoverable from the file and republishing from the same state is
    // byte-identical.
    std::vector<DiagnosisKey> keys = pending_;
    Rng shuffle_rng = make_stream(master_seed_, "shuffle", header.batch_num);
    for (size_t i = keys.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform_u64(shuffle_rng, i));
        std::swap(keys[i - 1], keys[j]);
    }

    ExportFile file;
    file.bytes = serialize_export(header, keys);
    file.signature = ed25519_sign(signing_seed_, file.bytes);
    file.batch_num = header.batch_num;

    pending_.clear();
    last_publish_end_ms_ = static_cast<uint64_t>(now_ms);
    batches_.push_back(file);
    return file;
}

std::vector<ExportFile> KeyServer::download_batches(
    uint32_t since_batch_num) const {
    std::vector<ExportFile> out;
    for (const ExportFile& batch : batches_) {
        if (batch.batch_num > since_batch_num) {
            out.push_back(batch);
        }
    }
    return out;
}

}  // namespace gaensim
