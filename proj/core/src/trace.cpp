#include "gaensim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "gaensim/errors.hpp"

namespace gaensim {

namespace {

int type_rank(const std::string& type) {
    if (type == "rotate" || type == "tekroll" || type == "addrswap") return 0;
    if (type == "toggle" || type == "infect" || type == "move") return 1;
    if (type == "scan") return 2;
    if (type == "recv") return 3;
    return 4;
}

std::string format_time(int64_t time_ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%03lld",
                  static_cast<long long>(time_ms / 1000),
                  static_cast<long long>(time_ms % 1000));
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

void TraceLog::sort() {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const TraceEvent& a, const TraceEvent& b) {
                         if (a.time_ms != b.time_ms) return a.time_ms < b.time_ms;
                         return type_rank(a.event_type) < type_rank(b.event_type);
                     });
}

void TraceLog::write_csv(std::ostream& out) const {
    out << "event_type,time,src,dst,address_hex,payload_hex,attenuation_db\n";
    char att[32];
    for (const TraceEvent& e : events_) {
        out << e.event_type << ',' << format_time(e.time_ms) << ',' << e.src
            << ',' << e.dst << ',' << e.address_hex << ',' << e.payload_hex
            << ',';
        if (e.attenuation_db) {
            std::snprintf(att, sizeof(att), "%.2f", *e.attenuation_db);
            out << att;
        }
        out << '\n';
    }
}

std::string TraceLog::to_csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
}

TraceLog TraceLog::from_csv(std::istream& in) {
    TraceLog log;
    std::string line;
    bool first = true;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("event_type,", 0) == 0) continue;
        }
        std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 7) {
            throw ParseError("trace line " + std::to_string(line_no) +
                             ": expected 7 fields");
        }
        TraceEvent e;
        e.event_type = fields[0];
        double seconds = 0.0;
        const std::string& t = fields[1];
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), seconds);
        if (ec != std::errc() || p != t.data() + t.size()) {
            throw ParseError("trace line " + std::to_string(line_no) +
                             ": bad time");
        }
        e.time_ms = static_cast<int64_t>(seconds * 1000.0 + 0.5);
        e.src = fields[2];
        e.dst = fields[3];
        e.address_hex = fields[4];
        e.payload_hex = fields[5];
        if (!fields[6].empty()) {
            double att = 0.0;
            const std::string& a = fields[6];
            auto [pa, eca] = std::from_chars(a.data(), a.data() + a.size(), att);
            if (eca != std::errc() || pa != a.data() + a.size()) {
                throw ParseError("trace line " + std::to_string(line_no) +
                                 ": bad attenuation");
            }
            e.attenuation_db = att;
        }
        log.add(std::move(e));
    }
    return log;
}

}  // namespace gaensim
