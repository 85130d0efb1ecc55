#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slackcast/liberty.hpp"
#include "slackcast/netlist.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast {

struct TimingConstraint {
  double clock_period = 1000.0;  // ps
};

/// Worst path into one endpoint. slack == required - arrival exactly.
struct PathRecord {
  std::string startpoint;
  PointKind start_kind = PointKind::Input;
  std::string endpoint;
  PointKind end_kind = PointKind::Output;
  std::vector<std::uint32_t> gates;  // launch to capture
  double arrival = 0.0;
  double required = 0.0;
  double slack = 0.0;
};

/// One worst path per timed endpoint, ascending by slack (ties by endpoint
/// name, then startpoint name). Endpoints fed only by constants are
/// untimed and omitted.
struct TimingReport {
  TimingConstraint constraint;
  std::string corner;
  std::vector<PathRecord> paths;
  double wns = 0.0;
  double tns = 0.0;
};

/// Forward topological arrival propagation with zero wire delay. A
/// netlist with no timed endpoint yields wns = clock period, tns = 0.
TimingReport run_sta(const Netlist& netlist, const CellLibrary& lib, const std::string& corner,
                     TimingConstraint constraint);

/// The n worst endpoint paths (all of them when fewer exist).
std::vector<PathRecord> critical_paths(const TimingReport& report, std::size_t n);

struct TimingLabel {
  double wns = 0.0;
  double tns = 0.0;
};

/// parse -> elaborate -> run_sta.
TimingLabel label(const verilog::SourceModule& module, const CellLibrary& lib,
                  const std::string& corner, TimingConstraint constraint);

/// Report JSON; times are rounded to integer picoseconds.
nlohmann::json to_json(const TimingReport& report);

}  // namespace slackcast
