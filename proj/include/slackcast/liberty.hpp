#pragma once

#include <array>
#include <map>
#include <string>

#include <json.hpp>

#include "slackcast/netlist.hpp"

namespace slackcast {

/// Linear-delay cell library: one propagation delay per gate type, a
/// flop model, and PVT corners expressed as multiplicative delay scales.
/// Immutable after load; safe to share across threads.
struct CellLibrary {
  std::string name;
  std::array<double, kAllGateTypes.size()> delay{};  // ps, indexed by GateType
  double clk_to_q = 0.0;
  double setup = 0.0;
  std::map<std::string, double> corners;

  double gate_delay(GateType type) const { return delay[static_cast<std::size_t>(type)]; }

  /// Throws UnknownCorner.
  double scale(const std::string& corner) const;

  /// Checks that delays are positive and a "typ" corner with scale 1.0
  /// exists. Throws InvalidLibrary.
  void validate() const;

  /// The shipped 45 nm-like library.
  static CellLibrary default_library();
};

nlohmann::json to_json(const CellLibrary& lib);
CellLibrary library_from_json(const nlohmann::json& j);
CellLibrary load_library(const std::string& path);
void save_library(const CellLibrary& lib, const std::string& path);

}  // namespace slackcast
