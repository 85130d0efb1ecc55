#pragma once

// Exhaustive path enumeration, used as the independent oracle for run_sta.
// Walks every startpoint-to-endpoint path through the gate graph by DFS
// and keeps the worst arrival per endpoint.

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "slackcast/liberty.hpp"
#include "slackcast/netlist.hpp"

namespace slackcast::testing {

struct EnumeratedTiming {
  std::map<std::string, double> endpoint_slack;
  double wns = 0.0;
  double tns = 0.0;
  std::size_t paths = 0;
};

inline EnumeratedTiming enumerate_paths(const Netlist& n, const CellLibrary& lib, const std::string& corner,
                                        double clock) {
  const double scale = lib.corners.at(corner);
  std::vector<std::vector<std::size_t>> fanout(n.net_count());
  for (std::size_t i = 0; i < n.gates.size(); ++i)
    for (NetId in : n.gates[i].inputs()) fanout[in].push_back(i);

  // sinks[net] lists (endpoint name, required time) for endpoints on that net.
  std::vector<std::vector<std::pair<std::string, double>>> sinks(n.net_count());
  for (const auto& p : n.outputs) sinks[p.net].emplace_back(p.name, clock);
  for (const auto& f : n.flops) sinks[f.d].emplace_back(f.name + "/D", clock - lib.setup * scale);

  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::map<std::string, std::pair<double, double>> worst;  // endpoint -> (arrival, required)
  EnumeratedTiming out;

  auto walk = [&](auto&& self, NetId net, double arrival) -> void {
    for (const auto& [name, required] : sinks[net]) {
      ++out.paths;
      auto [it, fresh] = worst.try_emplace(name, neg_inf, required);
      it->second.first = std::max(it->second.first, arrival);
    }
    for (std::size_t gi : fanout[net]) {
      const Gate& g = n.gates[gi];
      self(self, g.out, arrival + lib.delay[static_cast<std::size_t>(g.type)] * scale);
    }
  };
  for (const auto& p : n.inputs) walk(walk, p.net, 0.0);
  for (const auto& f : n.flops) walk(walk, f.q, lib.clk_to_q * scale);

  if (worst.empty()) {
    out.wns = clock;
    return out;
  }
  std::vector<double> slacks;
  for (const auto& [name, ar] : worst) {
    double slack = ar.second - ar.first;
    out.endpoint_slack[name] = slack;
    slacks.push_back(slack);
  }
  // Summed most-negative first so the float result is order-stable.
  std::sort(slacks.begin(), slacks.end());
  out.wns = slacks.front();
  for (double s : slacks)
    if (s < 0.0) out.tns += s;
  return out;
}

}  // namespace slackcast::testing
