#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gaensim {

struct TraceEvent {
    std::string event_type;  // rotate|tekroll|addrswap|scan|recv|toggle|infect|notify
    int64_t time_ms = 0;
    std::string src;
    std::string dst;
    std::string address_hex;  // colon hex, empty when not applicable
    std::string payload_hex;  // plain hex, empty when not applicable
    std::optional<double> attenuation_db;
};

class TraceLog {
  public:
    void add(TraceEvent event) { events_.push_back(std::move(event)); }
    void sort();

    const std::vector<TraceEvent>& events() const { return events_; }
    size_t size() const { return events_.size(); }

    std::string to_csv() const;
    void write_csv(std::ostream& out) const;

    static TraceLog from_csv(std::istream& in);

  private:
    std::vector<TraceEvent> events_;
};

}  // namespace gaensim
