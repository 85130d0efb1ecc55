#pragma once

#include "slackcast/netlist.hpp"
#include "slackcast/verilog.hpp"

namespace slackcast {

/// Lowers a parsed module to 2-input gates with constant folding and
/// double-inverter elimination. Regs become one flop per bit; primary
/// inputs exclude the clock. Throws CombinationalLoop, WidthMismatch,
/// UndrivenNet.
Netlist elaborate(const verilog::Ast& ast);

}  // namespace slackcast
