#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gaensim/bytes.hpp"
#include "gaensim/crypto.hpp"
#include "gaensim/rng.hpp"

namespace gaensim {

struct Pin {
    std::string digits;  // exactly 6 decimal digits
    std::string case_id;
    int64_t expiry_ms = 0;
    bool used = false;
};

enum class SubmitStatus { Accepted, RejectedAuth, RejectedFormat };

struct SubmitResult {
    SubmitStatus status = SubmitStatus::RejectedAuth;
    std::string reason;
    size_t stored = 0;

    bool accepted() const { return status == SubmitStatus::Accepted; }
};

struct ExportHeader {
    std::string region;
    uint32_t batch_num = 0;
    uint32_t batch_size = 1;
    uint64_t start_s = 0;
    uint64_t end_s = 0;
};

struct ExportContent {
    ExportHeader header;
    std::vector<DiagnosisKey> keys;
};

struct ExportFile {
    Bytes bytes;
    Bytes signature;
    uint32_t batch_num = 0;
};

/// Output of verify_and_parse_export; the only object the exposure module
/// accepts keys from.
struct VerifiedBatch {
    std::vector<DiagnosisKey> keys;
    uint32_t batch_num = 0;
    bool verified = false;
};

Bytes serialize_export(const ExportHeader& header,
                       const std::vector<DiagnosisKey>& keys);

/// Decodes the framing without any integrity check. Throws ParseError on
/// truncated or malformed bytes.
ExportContent parse_export(std::span<const uint8_t> bytes);

/// Checks the Ed25519 signature over the exact byte stream first, then
/// parses. Throws IntegrityError if the signature does not match.
VerifiedBatch verify_and_parse_export(std::span<const uint8_t> bytes,
                                      std::span<const uint8_t> signature,
                                      const ByteArray<32>& public_key);

// Detached signature sidecar framing (length-prefixed key version id
// followed by the 64 signature bytes).
Bytes serialize_signature(const Bytes& signature, const std::string& key_version);
std::pair<Bytes, std::string> parse_signature(std::span<const uint8_t> bytes);

struct KeyServerConfig {
    std::string region = "US-VA";
    int64_t pin_expiry_ms = 86'400'000;
    size_t max_keys_per_submission = 15;
    std::string key_version = "v1";
};

class KeyServer {
  public:
    KeyServer(uint64_t master_seed, KeyServerConfig config = {});

    Pin issue_pin(const std::string& case_id, int64_t now_ms);

    SubmitResult submit_keys(const std::string& pin_digits,
                             const std::vector<TemporaryExposureKey>& teks,
                             int64_t now_ms,
                             int32_t transmission_risk = 0);

    /// Serializes every pending submission, shuffled, as one signed batch
    /// covering (previous end, now].
    ExportFile publish_batch(int64_t now_ms);

    std::vector<ExportFile> download_batches(uint32_t since_batch_num) const;

    const ByteArray<32>& public_key() const { return public_key_; }
    size_t pending_key_count() const { return pending_.size(); }
    size_t issued_pin_count() const { return pins_.size(); }

  private:
    KeyServerConfig config_;
    Rng pin_rng_;
    uint64_t master_seed_;
    ByteArray<32> signing_seed_{};
    ByteArray<32> public_key_{};
    std::map<std::string, Pin> pins_;
    std::vector<DiagnosisKey> pending_;
    std::vector<ExportFile> batches_;
    uint64_t last_publish_end_ms_ = 0;
};

// Ed25519 over raw 32-byte seeds, exposed for tests and file tooling.
ByteArray<32> ed25519_public_key(const ByteArray<32>& seed);
Bytes ed25519_sign(const ByteArray<32>& seed, std::span<const uint8_t> message);
bool ed25519_verify(const ByteArray<32>& public_key,
                    std::span<const uint8_t> message,
                    std::span<const uint8_t> signature);

}  // namespace gaensim
