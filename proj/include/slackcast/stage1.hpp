#pragma once

// Stage-1 surrogate: a tool-free, library-free timing sketch computed from
// the AST alone, and the structural-timing fingerprint derived from it.
//
// This target links only the frontend and must never see the cell library
// or the timing engine; an architecture test scans for that.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slackcast/netlist.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast::stage1 {

/// Nominal conversion from unit-delay levels to picoseconds.
inline constexpr double kPsPerLevel = 30.0;

struct ApproxPath {
  std::string endpoint;
  PointKind start_kind = PointKind::Input;
  PointKind end_kind = PointKind::Output;
  int depth = 0;  // levels
  double arrival_ps = 0.0;
  double slack_ps = 0.0;
};

struct ApproxReport {
  double clock_period = 0.0;
  std::vector<ApproxPath> paths;  // ascending by slack, ties by endpoint name
  int violating = 0;
  double wns = 0.0;
  double tns = 0.0;
  // Estimated gate census by GateType, from the same unit-level pass.
  std::array<int, kAllGateTypes.size()> census{};
};

/// Unit-delay level analysis of the module's bit-level operator graph.
/// Required time is the bare clock period at every endpoint (no library,
/// so no setup or clock-to-Q). Endpoints fed only by constants are omitted.
ApproxReport approx_report(const verilog::Ast& ast, double clock_period);

inline constexpr std::size_t kFeatureDim = 34;
inline constexpr int kLayoutVersion = 1;
using FeatureVector = std::array<double, kFeatureDim>;

/// Raw feature layout (stable; bump kLayoutVersion on any change):
///   [0..8]   estimated gate counts: INV BUF AND2 OR2 XOR2 NAND2 NOR2 XNOR2 MUX2
///   [9]      flop bits
///   [10..11] primary input bits (clock excluded), primary output bits
///   [12]     critical depth in levels
///   [13..17] top-5 approximate endpoint arrivals, ps, descending, zero padded
///   [18]     approximate violating endpoint count
///   [19..26] endpoint depth histogram, bins 0,1,2,3,4-5,6-8,9-16,17+
///   [27..28] endpoint counts: register, output
///   [29..32] worst-path types: in->reg, reg->reg, reg->out, in->out
///   [33]     operator count
FeatureVector extract_phi(const verilog::Ast& ast, const ApproxReport& report);

struct Fingerprint {
  FeatureVector s{};    // unit l2 norm
  FeatureVector phi{};  // raw features
};

/// s = phi / |phi|. A zero vector maps to the last basis vector. Throws
/// NonFiniteFeature.
Fingerprint fingerprint(const FeatureVector& phi);

/// parse -> approx_report -> extract_phi -> fingerprint.
Fingerprint fingerprint_source(std::string_view source, double clock_period);

/// Raw lexical statistics (token counts by class) in the same 34-slot
/// shape, used by the regression-only ablation that bypasses Stage 1.
FeatureVector token_statistics(std::string_view source);

nlohmann::json to_json(const ApproxReport& report);
nlohmann::json to_json(const Fingerprint& fp);

}  // namespace slackcast::stage1
