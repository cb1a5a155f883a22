#include "gsr/athlete.hpp"

#include <algorithm>

namespace gsr {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::player: return "player";
    case Role::goalkeeper: return "goalkeeper";
    case Role::referee: return "referee";
    case Role::unknown: break;
  }
  return "unknown";
}

std::string_view to_string(Team team) { return team == Team::left ? "left" : "right"; }

Role parse_role(std::string_view s) {
  if (s == "player") return Role::player;
  if (s == "goalkeeper") return Role::goalkeeper;
  if (s == "referee") return Role::referee;
  return Role::unknown;
}

std::optional<Team> parse_team(std::string_view s) {
  if (s == "left") return Team::left;
  if (s == "right") return Team::right;
  return std::nullopt;
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace gsr
