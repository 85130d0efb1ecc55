#include "slackcast/sta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slackcast/elaborate.hpp"
#include "slackcast/error.hpp"

namespace slackcast {

namespace {

constexpr double kUntimed = -std::numeric_limits<double>::infinity();

bool path_order(const PathRecord& a, const PathRecord& b) {
  if (a.slack != b.slack) return a.slack < b.slack;
  if (a.endpoint != b.endpoint) return a.endpoint < b.endpoint;
  return a.startpoint < b.startpoint;
}

}  // namespace

TimingReport run_sta(const Netlist& n, const CellLibrary& lib, const std::string& corner,
                     TimingConstraint constraint) {
  const double scale = lib.scale(corner);
  if (!(constraint.clock_period > 0.0))
    throw Error(ErrorCode::BadConfig, "clock period must be positive");

  const std::size_t nets = n.net_count();
  std::vector<double> arrival(nets, kUntimed);
  std::vector<std::int64_t> via_gate(nets, -1);   // driving gate on the worst path
  std::vector<std::int64_t> source_of(nets, -1);  // start index: inputs, then flops
  for (std::size_t i = 0; i < n.inputs.size(); ++i) {
    arrival[n.inputs[i].net] = 0.0;
    source_of[n.inputs[i].net] = static_cast<std::int64_t>(i);
  }
  const double launch = lib.clk_to_q * scale;
  for (std::size_t i = 0; i < n.flops.size(); ++i) {
    arrival[n.flops[i].q] = launch;
    source_of[n.flops[i].q] = static_cast<std::int64_t>(n.inputs.size() + i);
  }

  for (std::size_t gi : topological_order(n)) {
    const Gate& g = n.gates[gi];
    double worst = kUntimed;
    for (NetId in : g.inputs()) worst = std::max(worst, arrival[in]);
    if (worst == kUntimed) continue;
    arrival[g.out] = worst + lib.gate_delay(g.type) * scale;
    via_gate[g.out] = static_cast<std::int64_t>(gi);
  }

  auto trace = [&](NetId net, PathRecord& rec) {
    std::vector<std::uint32_t> gates;
    while (via_gate[net] >= 0) {
      const Gate& g = n.gates[static_cast<std::size_t>(via_gate[net])];
      gates.push_back(g.id);
      NetId best = g.in[0];
      double best_arrival = kUntimed;
      for (NetId in : g.inputs()) {
        if (arrival[in] > best_arrival) {
          best_arrival = arrival[in];
          best = in;
        }
      }
      net = best;
    }
    std::reverse(gates.begin(), gates.end());
    rec.gates = std::move(gates);
    auto src = static_cast<std::size_t>(source_of[net]);
    if (src < n.inputs.size()) {
      rec.startpoint = n.inputs[src].name;
      rec.start_kind = PointKind::Input;
    } else {
      rec.startpoint = n.flops[src - n.inputs.size()].name + "/Q";
      rec.start_kind = PointKind::Register;
    }
  };

  TimingReport report;
  report.constraint = constraint;
  report.corner = corner;
  auto add_endpoint = [&](NetId net, std::string name, PointKind kind, double required) {
    if (arrival[net] == kUntimed) return;
    PathRecord rec;
    rec.endpoint = std::move(name);
    rec.end_kind = kind;
    rec.arrival = arrival[net];
    rec.required = required;
    rec.slack = required - rec.arrival;
    trace(net, rec);
    report.paths.push_back(std::move(rec));
  };
  for (const auto& p : n.outputs) add_endpoint(p.net, p.name, PointKind::Output, constraint.clock_period);
  const double capture = constraint.clock_period - lib.setup * scale;
  for (const auto& f : n.flops) add_endpoint(f.d, f.name + "/D", PointKind::Register, capture);

  std::sort(report.paths.begin(), report.paths.end(), path_order);
  if (report.paths.empty()) {
    report.wns = constraint.clock_period;
    report.tns = 0.0;
    return report;
  }
  report.wns = report.paths.front().slack;
  report.tns = 0.0;
  for (const auto& p : report.paths)
    if (p.slack < 0.0) report.tns += p.slack;
  return report;
}

std::vector<PathRecord> critical_paths(const TimingReport& report, std::size_t n) {
  std::vector<PathRecord> out = report.paths;
  std::sort(out.begin(), out.end(), path_order);
  if (out.size() > n) out.resize(n);
  return out;
}

TimingLabel label(const verilog::SourceModule& module, const CellLibrary& lib,
                  const std::string& corner, TimingConstraint constraint) {
  auto report = run_sta(elaborate(verilog::parse(module.source_text)), lib, corner, constraint);
  return {report.wns, report.tns};
}

nlohmann::json to_json(const TimingReport& report) {
  auto ps = [](double v) { return static_cast<long long>(std::llround(v)); };
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : report.paths) {
    paths.push_back({{"startpoint", p.startpoint},
                     {"start_kind", std::string(to_string(p.start_kind))},
                     {"endpoint", p.endpoint},
                     {"end_kind", std::string(to_string(p.end_kind))},
                     {"gates", p.gates},
                     {"arrival_ps", ps(p.arrival)},
                     {"required_ps", ps(p.required)},
                     {"slack_ps", ps(p.slack)}});
  }
  return {{"clock_period_ps", ps(report.constraint.clock_period)},
          {"corner", report.corner},
          {"paths", paths},
          {"wns_ps", ps(report.wns)},
          {"tns_ps", ps(report.tns)}};
}

}  // namespace slackcast
