#include <fstream>
#include <sstream>

#include "slackcast/bank.hpp"
#include "slackcast/error.hpp"
#include "slackcast/model.hpp"

namespace slackcast::model {

namespace {

std::vector<double> to_vector(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec from_vector(const nlohmann::json& j, std::size_t expected, const char* what) {
  auto values = j.get<std::vector<double>>();
  if (values.size() != expected)
    throw Error(ErrorCode::FormatError, std::string(what) + " has " + std::to_string(values.size()) + " values, expected " +
                                            std::to_string(expected));
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json to_json(const Model& m) {
  nlohmann::json injections = nlohmann::json::array();
  for (const auto& inj : m.steering.injections) injections.push_back({{"block", inj.block}, {"share", inj.share}});
  return {
      {"version", kCheckpointVersion},
      {"layout_version", stage1::kLayoutVersion},
      {"shape", {{"d_h", m.shape.d_h}, {"blocks", m.shape.blocks}, {"hidden", m.shape.hidden}}},
      {"normalizer", {{"mean", to_vector(m.in_mean)}, {"scale", to_vector(m.in_scale)}}},
      {"encoder", to_vector(m.encoder)},
      {"head", to_vector(m.head)},
      {"gamma", to_vector(m.gamma)},
      {"steering",
       {{"k", m.steering.k},
        {"gamma_mode", m.steering.mode == GammaMode::Scalar ? "scalar" : "diagonal"},
        {"gamma0", m.steering.gamma0},
        {"injections", injections}}},
      {"steered", m.steered},
      {"bank_checksum", retrieval::hex64(m.bank_checksum)},
      {"checksums",
       {{"encoder", retrieval::hex64(m.encoder_checksum())},
        {"head", retrieval::hex64(m.head_checksum())},
        {"gamma", retrieval::hex64(m.gamma_checksum())}}},
  };
}

Model model_from_json(const nlohmann::json& j) {
  Model m;
  try {
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorCode::FormatError, "unsupported checkpoint version");
    if (j.at("layout_version").get<int>() != stage1::kLayoutVersion)
      throw Error(ErrorCode::FormatError, "checkpoint was trained on a different feature layout");
    const auto& s = j.at("shape");
    m.shape = {s.at("d_h").get<int>(), s.at("blocks").get<int>(), s.at("hidden").get<int>()};
    if (m.shape.d_h < 1 || m.shape.blocks < 1 || m.shape.hidden < 1)
      throw Error(ErrorCode::FormatError, "checkpoint shape must be positive");
    m.in_mean = from_vector(j.at("normalizer").at("mean"), kInputDim, "normalizer mean");
    m.in_scale = from_vector(j.at("normalizer").at("scale"), kInputDim, "normalizer scale");
    m.encoder = from_vector(j.at("encoder"), m.shape.encoder_size(), "encoder");
    m.head = from_vector(j.at("head"), m.shape.head_size(), "head");
    m.gamma = from_vector(j.at("gamma"), static_cast<std::size_t>(m.shape.d_h), "gamma");
    const auto& st = j.at("steering");
    m.steering.k = st.at("k").get<std::size_t>();
    auto mode = st.at("gamma_mode").get<std::string>();
    if (mode != "scalar" && mode != "diagonal") throw Error(ErrorCode::FormatError, "unknown gamma mode " + mode);
    m.steering.mode = mode == "scalar" ? GammaMode::Scalar : GammaMode::Diagonal;
    m.steering.gamma0 = st.at("gamma0").get<double>();
    m.steering.injections.clear();
    for (const auto& inj : st.at("injections"))
      m.steering.injections.push_back({inj.at("block").get<int>(), inj.at("share").get<double>()});
    m.steered = j.at("steered").get<bool>();
    m.bank_checksum = retrieval::parse_hex64(j.at("bank_checksum").get<std::string>());
    const auto& sums = j.at("checksums");
    if (retrieval::parse_hex64(sums.at("encoder").get<std::string>()) != m.encoder_checksum() ||
        retrieval::parse_hex64(sums.at("head").get<std::string>()) != m.head_checksum() ||
        retrieval::parse_hex64(sums.at("gamma").get<std::string>()) != m.gamma_checksum())
      throw Error(ErrorCode::ChecksumMismatch, "checkpoint weights do not match their checksums");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed checkpoint: ") + e.what());
  }
  try {
    m.steering.validate(m.shape.blocks);
  } catch (const Error& e) {
    throw Error(ErrorCode::FormatError, std::string("checkpoint steering config: ") + e.what());
  }
  return m;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << to_json(model).dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace slackcast::model
