#include "slackcast/liberty.hpp"

#include <cmath>
#include <fstream>

#include "slackcast/error.hpp"

namespace slackcast {

double CellLibrary::scale(const std::string& corner) const {
  auto it = corners.find(corner);
  if (it == corners.end())
    throw Error(ErrorCode::UnknownCorner, "library '" + name + "' has no corner '" + corner + "'");
  return it->second;
}

void CellLibrary::validate() const {
  for (auto t : kAllGateTypes) {
    double d = gate_delay(t);
    if (!(d > 0.0) || !std::isfinite(d))
      throw Error(ErrorCode::InvalidLibrary,
                  "delay for " + std::string(to_string(t)) + " must be positive");
  }
  if (!(clk_to_q > 0.0) || !(setup > 0.0))
    throw Error(ErrorCode::InvalidLibrary, "dff clk_to_q and setup must be positive");
  for (const auto& [corner, s] : corners)
    if (!(s > 0.0) || !std::isfinite(s))
      throw Error(ErrorCode::InvalidLibrary, "corner '" + corner + "' needs a positive scale");
  auto typ = corners.find("typ");
  if (typ == corners.end() || typ->second != 1.0)
    throw Error(ErrorCode::InvalidLibrary, "library must define corner 'typ' with scale 1.0");
}

CellLibrary CellLibrary::default_library() {
  CellLibrary lib;
  lib.name = "lib45-like";
  auto set = [&](GateType t, double d) { lib.delay[static_cast<std::size_t>(t)] = d; };
  set(GateType::INV, 10);
  set(GateType::BUF, 12);
  set(GateType::AND2, 32);
  set(GateType::OR2, 32);
  set(GateType::NAND2, 25);
  set(GateType::NOR2, 25);
  set(GateType::XOR2, 45);
  set(GateType::XNOR2, 45);
  set(GateType::MUX2, 40);
  lib.clk_to_q = 30;
  lib.setup = 20;
  lib.corners = {{"typ", 1.0}, {"slow", 1.35}};
  return lib;
}

nlohmann::json to_json(const CellLibrary& lib) {
  nlohmann::json gates = nlohmann::json::object();
  for (auto t : kAllGateTypes) gates[std::string(to_string(t))] = {{"delay", lib.gate_delay(t)}};
  nlohmann::json corners = nlohmann::json::object();
  for (const auto& [c, s] : lib.corners) corners[c] = s;
  return {{"name", lib.name},
          {"unit", "ps"},
          {"gates", gates},
          {"dff", {{"clk_to_q", lib.clk_to_q}, {"setup", lib.setup}}},
          {"corners", corners}};
}

CellLibrary library_from_json(const nlohmann::json& j) {
  CellLibrary lib;
  try {
    lib.name = j.at("name").get<std::string>();
    if (j.value("unit", std::string("ps")) != "ps")
      throw Error(ErrorCode::InvalidLibrary, "only unit \"ps\" is supported");
    const auto& gates = j.at("gates");
    for (auto t : kAllGateTypes) {
      auto key = std::string(to_string(t));
      if (!gates.contains(key))
        throw Error(ErrorCode::InvalidLibrary, "library has no delay for " + key);
      lib.delay[static_cast<std::size_t>(t)] = gates.at(key).at("delay").get<double>();
    }
    lib.clk_to_q = j.at("dff").at("clk_to_q").get<double>();
    lib.setup = j.at("dff").at("setup").get<double>();
    for (const auto& [c, s] : j.at("corners").items()) lib.corners[c] = s.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidLibrary, std::string("malformed library: ") + e.what());
  }
  lib.validate();
  return lib;
}

CellLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open library '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidLibrary, "library '" + path + "' is not valid JSON");
  }
  return library_from_json(j);
}

void save_library(const CellLibrary& lib, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << to_json(lib).dump(2) << '\n';
}

}  // namespace slackcast
