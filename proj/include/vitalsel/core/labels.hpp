#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

enum class Activity : std::uint8_t { Normal = 0, Reading = 1, Guided = 2, Apnea = 3 };
enum class Position : std::uint8_t { Sitting = 0, Lying = 1 };
enum class Channel : std::uint8_t { Chest = 0, Respiration = 1, Cardiac = 2 };

inline constexpr std::array<Activity, 4> kAllActivities{Activity::Normal, Activity::Reading, Activity::Guided, Activity::Apnea};
inline constexpr std::array<Position, 2> kAllPositions{Position::Sitting, Position::Lying};
inline constexpr std::array<Channel, 3> kAllChannels{Channel::Chest, Channel::Respiration, Channel::Cardiac};

inline constexpr std::string_view to_string(Activity a)
{
    switch (a) {
    case Activity::Normal: return "normal";
    case Activity::Reading: return "reading";
    case Activity::Guided: return "guided";
    case Activity::Apnea: return "apnea";
    }
    return "?";
}

inline constexpr std::string_view to_string(Position p)
{
    return p == Position::Sitting ? "sitting" : "lying";
}

inline constexpr std::string_view to_string(Channel c)
{
    switch (c) {
    case Channel::Chest: return "chest";
    case Channel::Respiration: return "respiration";
    case Channel::Cardiac: return "cardiac";
    }
    return "?";
}

inline Activity parse_activity(std::string_view s)
{
    for (auto a : kAllActivities) {
        if (to_string(a) == s) {
            return a;
        }
    }
    throw DataError("unknown activity '" + std::string(s) + "'");
}

inline Position parse_position(std::string_view s)
{
    for (auto p : kAllPositions) {
        if (to_string(p) == s) {
            return p;
        }
    }
    throw DataError("unknown position '" + std::string(s) + "'");
}

// Labels carried by every record, window and feature row.
struct RowLabels {
    int subject = 0;
    Activity activity = Activity::Normal;
    Position position = Position::Sitting;

    friend bool operator==(const RowLabels&, const RowLabels&) = default;
};

} // namespace vitalsel
