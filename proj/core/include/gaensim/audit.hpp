#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gaensim/bytes.hpp"

namespace gaensim {

struct CaptureRecord {
    std::optional<double> timestamp_s;
    ByteArray<6> address{};
    ByteArray<20> payload{};
};

struct ParsedCapture {
    std::vector<CaptureRecord> records;
    std::vector<size_t> malformed_lines;  // 1-based line numbers
};

/// One record per well-formed line: optional leading numeric timestamp,
/// colon-hex address, 40 hex chars of payload. Malformed lines are skipped
/// and reported; zero well-formed lines is an error.
ParsedCapture parse_capture(std::istream& in);
ParsedCapture parse_capture_text(std::string_view text);

std::string format_capture(const std::vector<CaptureRecord>& records);

struct SyncViolation {
    enum class Kind { AddressWithMultiplePayloads, PayloadWithMultipleAddresses };
    Kind kind{};
    std::string key_hex;
    std::vector<std::string> values_hex;
};

/// Empty iff the address <-> payload relation is a bijection.
std::vector<SyncViolation> check_sync(const std::vector<CaptureRecord>& records);

struct IntervalStats {
    size_t rotation_count = 0;
    size_t gap_count = 0;
    double min_s = 0.0;
    double mean_s = 0.0;
    double max_s = 0.0;
    bool bounds_ok = false;  // every gap within [600, 1200] s
};

/// Gaps between first appearances of consecutive identifier pairs, treating
/// the input as a single source. Requires timestamps and at least two
/// rotations.
IntervalStats interval_stats(const std::vector<CaptureRecord>& records);

struct AuditReport {
    size_t record_count = 0;
    size_t distinct_pairs = 0;
    size_t malformed_count = 0;
    std::vector<SyncViolation> violations;
    std::optional<IntervalStats> intervals;

    bool clean() const {
        return violations.empty() && (!intervals || intervals->bounds_ok);
    }
};

AuditReport audit_report(std::istream& in);

}  // namespace gaensim
