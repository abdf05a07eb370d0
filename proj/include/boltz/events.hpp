#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "boltz/text.hpp"

namespace boltz {

enum class EventKind { Collision, Lift, Refresh, Boundary };

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::Collision: return "collision";
    case EventKind::Lift: return "lift";
    case EventKind::Refresh: return "refresh";
    case EventKind::Boundary: return "boundary";
    }
    return "?";
}

struct EventRecord {
    double time = 0;
    EventKind kind = EventKind::Collision;
    int first = -1;
    int second = -1;
    double diagnostic = 0;
};

/// Append-only event record; a null log pointer disables logging.
struct EventLog {
    std::vector<EventRecord> records;

    void add(double time, EventKind kind, int first, int second = -1, double diagnostic = 0)
    {
        records.push_back({time, kind, first, second, diagnostic});
    }

    /// CSV with columns time,kind,particles,diagnostic.
    void write_csv(std::ostream& os) const
    {
        os << "time,kind,particles,diagnostic\n";
        for (const auto& r : records) {
            os << format_double(r.time) << ',' << to_string(r.kind) << ',' << r.first;
            if (r.second >= 0) os << ' ' << r.second;
            os << ',' << format_double(r.diagnostic) << '\n';
        }
    }
};

}  // namespace boltz
