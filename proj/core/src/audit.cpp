#include "gaensim/audit.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

bool is_hex40(std::string_view s) {
    if (s.size() != 40) return false;
    for (char c : s) {
        bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') ||
                  (c >= 'A' && c <= 'F');
        if (!ok) return false;
    }
    return true;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_record(std::string_view line, CaptureRecord& record) {
    std::vector<std::string_view> fields = split_ws(line);
    if (fields.size() < 2 || fields.size() > 3) return false;

    size_t base = 0;
    if (fields.size() == 3) {
        double t = 0.0;
        const char* first = fields[0].data();
        const char* last = first + fields[0].size();
        auto [p, ec] = std::from_chars(first, last, t);
        if (ec != std::errc() || p != last) return false;
        record.timestamp_s = t;
        base = 1;
    } else {
        record.timestamp_s.reset();
    }

    try {
        record.address = parse_mac(fields[base]);
    } catch (const ParseError&) {
        return false;
    }
    if (!is_hex40(fields[base + 1])) return false;
    Bytes payload = from_hex(fields[base + 1]);
    std::copy(payload.begin(), payload.end(), record.payload.begin());
    return true;
}

}  // namespace

ParsedCapture parse_capture(std::istream& in) {
    ParsedCapture out;
    std::string line;
    size_t line_no = 0;
    bool any_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        while (!view.empty() && (view.back() == '\r' || view.back() == '\n')) {
            view.remove_suffix(1);
        }
        if (view.empty() || view[0] == '#') continue;
        any_content = true;
        CaptureRecord record;
        if (parse_record(view, record)) {
            out.records.push_back(record);
        } else {
            out.malformed_lines.push_back(line_no);
        }
    }
    if (out.records.empty()) {
        throw ParseError(any_content ? "no well-formed capture lines"
                                     : "empty capture input");
    }
    return out;
}

ParsedCapture parse_capture_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_capture(in);
}

std::string format_capture(const std::vector<CaptureRecord>& records) {
    std::string out;
    char buf[32];
    for (const CaptureRecord& record : records) {
        if (record.timestamp_s) {
            std::snprintf(buf, sizeof(buf), "%.3f ", *record.timestamp_s);
            out += buf;
        }
        out += format_mac(record.address);
        out += ' ';
        out += to_hex(record.payload);
        out += '\n';
    }
    return out;
}

std::vector<SyncViolation> check_sync(
    const std::vector<CaptureRecord>& records) {
    std::map<std::string, std::set<std::string>> by_address;
    std::map<std::string, std::set<std::string>> by_payload;
    for (const CaptureRecord& record : records) {
        std::string address = to_hex(record.address);
        std::string payload = to_hex(record.payload);
        by_address[address].insert(payload);
        by_payload[payload].insert(address);
    }

    std::vector<SyncViolation> out;
    for (const auto& [address, payloads] : by_address) {
        if (payloads.size() > 1) {
            out.push_back({SyncViolation::Kind::AddressWithMultiplePayloads,
                           address,
                           {payloads.begin(), payloads.end()}});
        }
    }
    for (const auto& [payload, addresses] : by_payload) {
        if (addresses.size() > 1) {
            out.push_back({SyncViolation::Kind::PayloadWithMultipleAddresses,
                           payload,
                           {addresses.begin(), addresses.end()}});
        }
    }
    return out;
}

IntervalStats interval_stats(const std::vector<CaptureRecord>& records) {
    std::vector<std::pair<double, std::string>> timed;
    for (const CaptureRecord& record : records) {
        if (!record.timestamp_s) continue;
        std::string pair = to_hex(record.address) + to_hex(record.payload);
        timed.emplace_back(*record.timestamp_s, std::move(pair));
    }
    if (timed.empty()) {
        throw InsufficientDataError("no timestamped capture records");
    }
    std::stable_sort(timed.begin(), timed.end(),
                     [](const auto& a, const auto& b) {
                         return a.first < b.first;
                     });

    std::vector<double> first_seen;
    std::set<std::string> seen;
    for (const auto& [t, pair] : timed) {
        if (seen.insert(pair).second) {
            first_seen.push_back(t);
        }
    }
    if (first_seen.size() < 2) {
        throw InsufficientDataError("need at least two rotations");
    }

    IntervalStats stats;
    stats.rotation_count = first_seen.size();
    stats.gap_count = first_seen.size() - 1;
    stats.bounds_ok = true;
    double sum = 0.0;
    for (size_t i = 1; i < first_seen.size(); ++i) {
        double gap = first_seen[i] - first_seen[i - 1];
        if (i == 1) {
            stats.min_s = gap;
            stats.max_s = gap;
        } else {
            stats.min_s = std::min(stats.min_s, gap);
            stats.max_s = std::max(stats.max_s, gap);
        }
        sum += gap;
        if (gap < 600.0 || gap > 1200.0) stats.bounds_ok = false;
    }
    stats.mean_s = sum / static_cast<double>(stats.gap_count);
    return stats;
}

AuditReport audit_report(std::istream& in) {
    ParsedCapture parsed = parse_capture(in);

    AuditReport report;
    report.record_count = parsed.records.size();
    report.malformed_count = parsed.malformed_lines.size();

    std::set<std::string> pairs;
    for (const CaptureRecord& record : parsed.records) {
        pairs.insert(to_hex(record.address) + to_hex(record.payload));
    }
    report.distinct_pairs = pairs.size();
    report.violations = check_sync(parsed.records);

    try {
        report.intervals = interval_stats(parsed.records);
    } catch (const InsufficientDataError&) {
        report.intervals.reset();
    }
    return report;
}

}  // namespace gaensim
