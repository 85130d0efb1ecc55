#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "slackcast/corpus.hpp"
#include "slackcast/elaborate.hpp"
#include "slackcast/error.hpp"
#include "slackcast/parallel.hpp"

namespace slackcast::corpus {

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::TinyComb: return "tiny-comb";
    case Tier::StructuredComb: return "structured-comb";
    case Tier::ElementalSeq: return "elemental-seq";
    case Tier::CounterShift: return "counter-shift";
    case Tier::FsmComposite: return "fsm-composite";
  }
  return "?";
}

Tier tier_from_string(std::string_view name) {
  for (Tier t : kAllTiers)
    if (to_string(t) == name) return t;
  throw Error(ErrorCode::FormatError, "unknown tier '" + std::string(name) + "'");
}

int gate_bin(int gates) {
  if (gates <= 0) return -1;
  if (gates <= 10) return 0;
  if (gates <= 50) return 1;
  if (gates <= 100) return 2;
  if (gates <= 200) return 3;
  return 4;
}

std::string_view gate_bin_label(int bin) {
  static constexpr std::array<std::string_view, kGateBins> labels = {"1-10", "11-50", "51-100", "101-200", "201+"};
  return bin >= 0 && bin < kGateBins ? labels[static_cast<std::size_t>(bin)] : "none";
}

bool feasible(Tier tier, int bin) {
  if (bin < 0 || bin >= kGateBins) return false;
  switch (tier) {
    case Tier::TinyComb: return bin <= 1;
    case Tier::FsmComposite: return bin >= 1;
    default: return true;
  }
}

void GenSpec::validate() const {
  for (const auto* mix : {&tier_mix, &bin_mix}) {
    double total = 0;
    for (double v : *mix) {
      if (!(v >= 0)) throw Error(ErrorCode::BadConfig, "mix shares must be nonnegative");
      total += v;
    }
    if (std::abs(total - 100.0) > 1e-6) throw Error(ErrorCode::BadConfig, "mix shares must sum to 100");
  }
}

std::array<std::array<std::size_t, kGateBins>, 5> plan_quotas(const GenSpec& spec) {
  spec.validate();
  // Iterative proportional fitting of the joint share table inside the mask.
  std::array<std::array<double, kGateBins>, 5> q{};
  for (std::size_t t = 0; t < 5; ++t)
    for (int b = 0; b < kGateBins; ++b)
      q[t][static_cast<std::size_t>(b)] = feasible(kAllTiers[t], b) && spec.tier_mix[t] > 0 && spec.bin_mix[static_cast<std::size_t>(b)] > 0 ? 1.0 : 0.0;
  double err = 0;
  for (int it = 0; it < 2000; ++it) {
    for (std::size_t t = 0; t < 5; ++t) {
      double row = std::accumulate(q[t].begin(), q[t].end(), 0.0);
      if (row > 0)
        for (auto& v : q[t]) v *= spec.tier_mix[t] / row;
    }
    for (std::size_t b = 0; b < kGateBins; ++b) {
      double col = 0;
      for (std::size_t t = 0; t < 5; ++t) col += q[t][b];
      if (col > 0)
        for (std::size_t t = 0; t < 5; ++t) q[t][b] *= spec.bin_mix[b] / col;
    }
    err = 0;
    for (std::size_t t = 0; t < 5; ++t)
      err = std::max(err, std::abs(std::accumulate(q[t].begin(), q[t].end(), 0.0) - spec.tier_mix[t]));
    for (std::size_t b = 0; b < kGateBins; ++b) {
      double col = 0;
      for (std::size_t t = 0; t < 5; ++t) col += q[t][b];
      err = std::max(err, std::abs(col - spec.bin_mix[b]));
    }
    if (err < 1e-9) break;
  }
  if (err > 0.01)
    throw Error(ErrorCode::InfeasibleSpec,
                "tier and gate-bin mixes cannot be met by the available templates (marginal error " +
                    std::to_string(err) + " points)");

  // Largest remainder over all cells.
  std::array<std::array<std::size_t, kGateBins>, 5> counts{};
  std::vector<std::pair<double, std::size_t>> rest;
  std::size_t assigned = 0;
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t b = 0; b < kGateBins; ++b) {
      double exact = q[t][b] / 100.0 * static_cast<double>(spec.count);
      counts[t][b] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[t][b];
      if (q[t][b] > 0) rest.push_back({exact - std::floor(exact), t * kGateBins + b});
    }
  std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < spec.count && i < rest.size(); ++i, ++assigned)
    ++counts[rest[i].second / kGateBins][rest[i].second % kGateBins];
  return counts;
}

namespace {

using Rng = std::mt19937_64;

int rint(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, std::max(lo, hi))(rng); }
double runit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
bool chance(Rng& rng, double p) { return runit(rng) < p; }

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rint(rng, 0, static_cast<int>(v.size()) - 1))];
}

std::string range(int w) { return w == 1 ? "" : "[" + std::to_string(w - 1) + ":0] "; }
std::string lit(int w, std::uint64_t v) {
  if (w < 64) v &= (std::uint64_t{1} << w) - 1;
  return std::to_string(w) + "'d" + std::to_string(v);
}
std::uint64_t rand_value(Rng& rng, int w) {
  std::uint64_t v = rng();
  return w >= 64 ? v : v & ((std::uint64_t{1} << w) - 1);
}
std::string bit(const std::string& name, int w, int i) { return w == 1 ? name : name + "[" + std::to_string(i) + "]"; }

class Builder {
 public:
  std::string in(int w) {
    auto n = fresh("i");
    ports_.push_back("input " + range(w) + n);
    signals_.push_back({n, w});
    return n;
  }
  std::string out(int w) {
    auto n = fresh("o");
    ports_.push_back("output " + range(w) + n);
    return n;
  }
  std::string out_reg(int w) {
    clock();
    auto n = fresh("q");
    ports_.push_back("output reg " + range(w) + n);
    signals_.push_back({n, w});
    return n;
  }
  std::string reg(int w) {
    clock();
    auto n = fresh("r");
    decls_.push_back("reg " + range(w) + n + ";");
    signals_.push_back({n, w});
    return n;
  }
  std::string wire(int w, const std::string& expr) {
    auto n = fresh("w");
    decls_.push_back("wire " + range(w) + n + ";");
    assign(n, expr);
    return n;
  }
  void assign(const std::string& target, const std::string& expr) {
    assigns_.push_back("assign " + target + " = " + expr + ";");
  }
  void seq(const std::string& line) { seq_.push_back(line); }
  // Inputs and registers, readable anywhere.
  const std::vector<std::pair<std::string, int>>& signals() const { return signals_; }
  void clock() {
    if (clk_) return;
    clk_ = true;
    ports_.insert(ports_.begin(), "input clk");
  }
  std::string str(const std::string& name) const {
    std::ostringstream s;
    s << "module " << name << " (\n";
    for (std::size_t i = 0; i < ports_.size(); ++i) s << "  " << ports_[i] << (i + 1 < ports_.size() ? ",\n" : "\n");
    s << ");\n";
    for (const auto& d : decls_) s << "  " << d << "\n";
    for (const auto& a : assigns_) s << "  " << a << "\n";
    if (!seq_.empty()) {
      s << "  always @(posedge clk) begin\n";
      for (const auto& l : seq_) s << "    " << l << "\n";
      s << "  end\n";
    }
    s << "endmodule\n";
    return s.str();
  }

 private:
  std::string fresh(const char* prefix) { return prefix + std::to_string(next_++); }
  std::vector<std::string> ports_, decls_, assigns_, seq_;
  std::vector<std::pair<std::string, int>> signals_;
  bool clk_ = false;
  int next_ = 0;
};

// Random single-bit expression with exactly `ops` operator nodes.
std::string tree(Rng& rng, const std::vector<std::string>& leaves, int ops) {
  if (ops <= 0) return pick(rng, leaves);
  int r = rint(rng, 0, 11);
  if (r == 0) {
    std::string inner = tree(rng, leaves, ops - 1);
    if (inner[0] != '~') return "~" + (inner[0] == '(' ? inner : "(" + inner + ")");
  }
  if (r <= 2 && ops >= 1) {
    int rest = ops - 1;
    int c = rint(rng, 0, rest / 3);
    int a = rint(rng, 0, rest - c);
    return "(" + tree(rng, leaves, c) + " ? " + tree(rng, leaves, a) + " : " + tree(rng, leaves, rest - c - a) + ")";
  }
  static const std::vector<std::string> ops2 = {"&", "|", "^"};
  int a = rint(rng, 0, ops - 1);
  std::string e = "(" + tree(rng, leaves, a) + " " + pick(rng, ops2) + " " + tree(rng, leaves, ops - 1 - a) + ")";
  return r <= 4 ? "~" + e : e;
}

struct Made {
  std::string source;
  std::string domain;
};

using Template = std::function<Made(Rng&, double)>;

// Optional status outputs: small random trees over bits of existing inputs
// and registers.
Made finish(Rng& rng, Builder& b, double size, const std::string& name, const std::string& domain) {
  const auto& sig = b.signals();
  std::vector<std::pair<std::string, int>> usable;
  for (const auto& s : sig)
    if (s.first != "clk") usable.push_back(s);
  if (!usable.empty() && chance(rng, 0.7)) {
    int outs = size > 40 ? rint(rng, 1, 3) : 1;
    std::vector<std::string> bits;
    for (const auto& [sname, w] : usable)
      for (int i = 0; i < std::min(w, 8); ++i) bits.push_back(bit(sname, w, i));
    for (int o = 0; o < outs; ++o) {
      std::shuffle(bits.begin(), bits.end(), rng);
      std::vector<std::string> leaves(bits.begin(), bits.begin() + std::min<std::ptrdiff_t>(rint(rng, 2, 4), std::ssize(bits)));
      int ops = rint(rng, 1, std::clamp(static_cast<int>(size / 12), 1, 6));
      b.assign(b.out(1), tree(rng, leaves, ops));
    }
  }
  return {b.str(name), domain};
}

Made tiny_comb(Rng& rng, double size) {
  Builder b;
  int g = std::max(1, static_cast<int>(std::lround(size)));
  std::vector<std::string> leaves;
  int singles = rint(rng, 1, std::clamp(g / 2 + 1, 2, 6));
  for (int i = 0; i < singles; ++i) leaves.push_back(b.in(1));
  if (g > 3 && chance(rng, 0.6)) {
    int w = rint(rng, 2, std::clamp(g / 2, 2, 8));
    auto bus = b.in(w);
    for (int i = 0; i < w; ++i) leaves.push_back(bus + "[" + std::to_string(i) + "]");
  }
  if (leaves.size() < 2) leaves.push_back(b.in(1));
  int outs = rint(rng, 1, std::min(3, g));
  int left = g;
  for (int o = 0; o < outs; ++o) {
    int share = o + 1 == outs ? left : rint(rng, 1, std::max(1, left - (outs - o - 1)));
    left -= share;
    if (share >= 4 && chance(rng, 0.4)) {
      int part = rint(rng, 1, share / 2);
      leaves.push_back(b.wire(1, tree(rng, leaves, part)));
      share -= part;
    }
    b.assign(b.out(1), tree(rng, leaves, share));
  }
  return {b.str("tiny"), "logic"};
}

// Word-level operand chain; returns the final word and the estimated cost.
std::string word_chain(Rng& rng, Builder& b, std::vector<std::string>& words, int w, double budget, bool arith) {
  std::string cur = pick(rng, words);
  double cost = 0;
  int steps = 0;
  while (cost < budget || steps == 0) {
    std::string other = pick(rng, words);
    int r = rint(rng, 0, 9);
    std::string e;
    if (arith && r <= 3) {
      e = cur + (chance(rng, 0.7) ? " + " : " - ") + other;
      cost += 5.5 * w;
    } else if (r <= 5) {
      e = cur + " " + pick(rng, std::vector<std::string>{"&", "|", "^"}) + " " + other;
      cost += w;
    } else if (r <= 7) {
      std::string third = pick(rng, words);
      bool lt = chance(rng, 0.5);
      e = "(" + other + (lt ? " < " : " == ") + third + ") ? " + cur + " : " + other;
      cost += (lt ? 4.0 : 2.0) * w + w;
    } else if (r == 8) {
      e = "~" + cur;
      cost += w;
    } else {
      e = cur + " + " + lit(w, rand_value(rng, w) | 1);
      cost += 3.0 * w;
    }
    cur = b.wire(w, e);
    words.push_back(cur);
    ++steps;
  }
  return cur;
}

int width_for(Rng& rng, double size, double per_bit, int lo = 1, int hi = 64) {
  double w = size / per_bit * std::exp(std::uniform_real_distribution<double>(-0.3, 0.3)(rng));
  return std::clamp(static_cast<int>(std::lround(w)), lo, hi);
}

std::string lowest_set(Builder& b, const std::string& x, int w) {
  return b.wire(w, x + " & ~(" + x + " - " + lit(w, 1) + ")");
}

Made structured_comb(Rng& rng, double size) {
  Builder b;
  double r = runit(rng);
  if (r < 0.08) {
    int w = width_for(rng, size, 4.0, 2, 64);
    auto req = b.in(w);
    std::string gnt;
    if (chance(rng, 0.5)) {
      gnt = lowest_set(b, req, w);
    } else {
      auto mask = b.in(w);
      auto masked = b.wire(w, req + " & " + mask);
      auto lo_req = lowest_set(b, req, w), lo_masked = lowest_set(b, masked, w);
      gnt = b.wire(w, "(" + masked + " == " + lit(w, 0) + ") ? " + lo_req + " : " + lo_masked);
    }
    b.assign(b.out(w), gnt);
    return finish(rng, b, size, "arb", "arbiter");
  }
  if (r < 0.14) {
    int cw = pick(rng, std::vector<int>{5, 8, 16, 32});
    std::uint64_t poly = rand_value(rng, cw) | 1;
    int steps = std::clamp(static_cast<int>(std::lround(size / (cw * 0.6 + 1))), 1, 64);
    auto c = b.in(cw);
    auto d = b.in(steps);
    std::string cur = c;
    for (int i = 0; i < steps; ++i) {
      auto fb = b.wire(1, bit(cur, cw, cw - 1) + " ^ " + bit(d, steps, i));
      cur = b.wire(cw, "{" + cur + "[" + std::to_string(cw - 2) + ":0], 1'b0} ^ (" + fb + " ? " + lit(cw, poly) + " : " +
                           lit(cw, 0) + ")");
    }
    b.assign(b.out(cw), cur);
    return finish(rng, b, size, "crcstep", "crc");
  }
  if (r < 0.45) {
    int w = width_for(rng, size, 8.0 * rint(rng, 1, 3));
    std::vector<std::string> words;
    for (int i = 0, n = rint(rng, 2, 4); i < n; ++i) words.push_back(b.in(w));
    auto y = word_chain(rng, b, words, w, size * 0.9, true);
    b.assign(b.out(w), y);
    if (chance(rng, 0.3)) b.assign(b.out(1), "(" + y + " < " + words[0] + ")");
    return finish(rng, b, size, "arith", "arith");
  }
  if (r < 0.7) {
    int pairs = rint(rng, 1, 4);
    int w = width_for(rng, size, 4.0 * pairs, 1, 64);
    std::vector<std::string> flags;
    std::vector<std::string> words;
    for (int i = 0; i < pairs + 1; ++i) words.push_back(b.in(w));
    for (int i = 0; i < pairs; ++i) {
      auto& a = words[static_cast<std::size_t>(i)];
      auto& c = words[static_cast<std::size_t>(i + 1)];
      flags.push_back(b.wire(1, a + (chance(rng, 0.6) ? " < " : " == ") + c));
      if (chance(rng, 0.5)) {
        auto m = b.wire(w, flags.back() + " ? " + c + " : " + a);
        b.assign(b.out(w), m);
      }
    }
    b.assign(b.out(1), tree(rng, flags, static_cast<int>(flags.size()) - 1 + rint(rng, 0, 2)));
    return finish(rng, b, size, "cmp", "compare");
  }
  int sel = rint(rng, 1, 4);
  int inputs = rint(rng, 2, 1 << sel);
  int w = width_for(rng, size, static_cast<double>(inputs - 1), 1, 64);
  auto s = b.in(sel);
  std::vector<std::string> data;
  for (int i = 0; i < inputs; ++i) data.push_back(b.in(w));
  for (int level = 0; data.size() > 1; ++level) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i + 1 < data.size(); i += 2)
      next.push_back(b.wire(w, bit(s, sel, std::min(level, sel - 1)) + " ? " + data[i + 1] + " : " + data[i]));
    if (data.size() % 2) next.push_back(data.back());
    data = next;
  }
  std::string y = data[0];
  if (chance(rng, 0.5)) y = b.wire(w, y + " ^ " + b.in(w));
  b.assign(b.out(w), y);
  return finish(rng, b, size, "mux", "mux");
}

std::string reset_or(const std::string& rst, const std::string& target, const std::string& init, const std::string& rest) {
  if (rst.empty()) return rest;
  return "if (" + rst + ") " + target + " <= " + init + "; else " + rest;
}

Made elemental_seq(Rng& rng, double size) {
  Builder b;
  std::string rst = chance(rng, 0.5) ? b.in(1) : "";
  if (chance(rng, 0.5)) {
    int regs = rint(rng, 1, 4);
    int w = width_for(rng, size, (2.0 + (rst.empty() ? 0 : 1)) * regs);
    auto en = b.in(1);
    for (int i = 0; i < regs; ++i) {
      auto d = b.in(w);
      std::string src = d;
      if (chance(rng, 0.4)) src = b.wire(w, d + " " + pick(rng, std::vector<std::string>{"&", "|", "^"}) + " " + b.in(w));
      auto q = chance(rng, 0.5) ? b.out_reg(w) : b.reg(w);
      b.seq(reset_or(rst, q, lit(w, rand_value(rng, w)), "if (" + en + ") " + q + " <= " + src + ";"));
      if (q[0] == 'r') b.assign(b.out(w), chance(rng, 0.5) ? q : "~" + q);
    }
    return finish(rng, b, size, "store", "storage");
  }
  int stages = rint(rng, 1, 4);
  int w = width_for(rng, size, (rint(rng, 1, 6) + 0.5) * stages);
  std::vector<std::string> words;
  for (int i = 0, n = rint(rng, 2, 3); i < n; ++i) words.push_back(b.in(w));
  std::string cur = words[0];
  double per_stage = size / stages;
  for (int s = 0; s < stages; ++s) {
    std::vector<std::string> pool = words;
    pool.push_back(cur);
    auto comb = word_chain(rng, b, pool, w, per_stage * 0.8, s % 2 == 1);
    auto q = b.reg(w);
    b.seq(reset_or(rst, q, lit(w, 0), q + " <= " + comb + ";"));
    cur = q;
  }
  b.assign(b.out(w), cur);
  return finish(rng, b, size, "pipe", "pipeline");
}

Made counter_shift(Rng& rng, double size) {
  Builder b;
  double r = runit(rng);
  std::string rst = chance(rng, 0.6) ? b.in(1) : "";
  if (r < 0.12) {
    int cw = pick(rng, std::vector<int>{8, 16, 32});
    int units = std::clamp(static_cast<int>(std::lround(size / (cw * 1.5))), 1, 8);
    auto din = b.in(units);
    auto q = b.out_reg(cw);
    std::uint64_t poly = rand_value(rng, cw) | 1;
    std::string cur = q;
    for (int i = 0; i < units; ++i) {
      auto fb = b.wire(1, cur + "[" + std::to_string(cw - 1) + "] ^ " + bit(din, units, i));
      cur = b.wire(cw, "{" + cur + "[" + std::to_string(cw - 2) + ":0], 1'b0} ^ (" + fb + " ? " + lit(cw, poly) + " : " +
                           lit(cw, 0) + ")");
    }
    b.seq(reset_or(rst, q, lit(cw, rand_value(rng, cw)), q + " <= " + cur + ";"));
    return finish(rng, b, size, "lfsr", "crc");
  }
  int units = std::max(1, static_cast<int>(std::lround(size / rint(rng, 80, 200))));
  units = std::clamp(units, 1, 6);
  bool counting = r < 0.6;
  for (int u = 0; u < units; ++u) {
    double usize = size / units;
    if (counting) {
      int kind = rint(rng, 0, 3);
      int w = width_for(rng, usize, kind == 0 ? 2.5 : kind == 1 ? 7.0 : 5.0, 2, 64);
      auto q = chance(rng, 0.5) ? b.out_reg(w) : b.reg(w);
      auto en = b.in(1);
      std::string next;
      if (kind == 0) {
        next = q + " + " + lit(w, 1);
      } else if (kind == 1) {
        auto up = b.in(1);
        next = up + " ? " + q + " + " + lit(w, 1) + " : " + q + " - " + lit(w, 1);
      } else if (kind == 2) {
        std::uint64_t top = rand_value(rng, w) | 1;
        next = "(" + q + " == " + lit(w, top) + ") ? " + lit(w, 0) + " : " + q + " + " + lit(w, 1);
      } else {
        auto load = b.in(1);
        auto d = b.in(w);
        next = load + " ? " + d + " : " + q + " + " + lit(w, rint(rng, 1, 7));
      }
      b.seq(reset_or(rst, q, lit(w, chance(rng, 0.5) ? 0 : rand_value(rng, w)), "if (" + en + ") " + q + " <= " + next + ";"));
      if (q[0] == 'r') b.assign(b.out(1), q + " == " + lit(w, rand_value(rng, w)));
    } else {
      int kind = rint(rng, 0, 3);
      int w = width_for(rng, usize, kind == 3 ? 3.0 : 2.0, 2, 64);
      auto q = chance(rng, 0.6) ? b.out_reg(w) : b.reg(w);
      std::string low = q + "[" + std::to_string(w - 2) + ":0]";
      std::string top = q + "[" + std::to_string(w - 1) + "]";
      std::string next;
      if (kind == 0) {
        next = "{" + low + ", " + b.in(1) + "}";
      } else if (kind == 1) {
        next = "{" + low + ", " + (chance(rng, 0.5) ? top : "~" + top) + "}";
      } else if (kind == 2) {
        auto load = b.in(1);
        auto d = b.in(w);
        next = load + " ? " + d + " : {" + low + ", " + b.in(1) + "}";
      } else {
        // Rotate by a variable amount, one mux layer per select bit.
        int sb = std::clamp(static_cast<int>(std::ceil(std::log2(w))), 1, 6);
        auto amt = b.in(sb);
        std::string cur = q;
        for (int i = 0; i < sb && (1 << i) < w; ++i) {
          int s = 1 << i;
          std::string rot = "{" + cur + "[" + std::to_string(w - 1 - s) + ":0], " + cur + "[" + std::to_string(w - 1) +
                            ":" + std::to_string(w - s) + "]}";
          cur = b.wire(w, bit(amt, sb, i) + " ? " + rot + " : " + cur);
        }
        next = cur;
      }
      auto en = b.in(1);
      b.seq(reset_or(rst, q, lit(w, rand_value(rng, w)), "if (" + en + ") " + q + " <= " + next + ";"));
      if (q[0] == 'r') b.assign(b.out(w), q);
    }
  }
  return finish(rng, b, size, "cnt", counting ? "counter" : "shift");
}

Made fsm_composite(Rng& rng, double size) {
  Builder b;
  bool arbiter = chance(rng, 0.1);
  auto rst = b.in(1);
  int states = arbiter ? 2 : rint(rng, 2, 8);
  int sw = std::max(1, static_cast<int>(std::ceil(std::log2(states))));
  if (!arbiter && chance(rng, 0.3)) ++sw;
  auto state = b.reg(sw);
  // State codes: a random injection into the encoding space.
  std::vector<std::uint64_t> all(std::size_t{1} << sw);
  std::iota(all.begin(), all.end(), std::uint64_t{0});
  std::shuffle(all.begin(), all.end(), rng);
  auto code = [&](int s) { return all[static_cast<std::size_t>(s)]; };
  auto go = b.in(1);
  std::vector<std::string> conds{go};
  std::string body;
  if (arbiter) {
    int w = width_for(rng, std::max(size - 10.0, 8.0), 9.0, 2, 64);
    auto req = b.in(w);
    auto mask = b.reg(w);
    auto masked = b.wire(w, req + " & " + mask);
    auto lo_req = lowest_set(b, req, w), lo_masked = lowest_set(b, masked, w);
    auto gnt = chance(rng, 0.35) ? lo_req : b.wire(w, "(" + masked + " == " + lit(w, 0) + ") ? " + lo_req + " : " + lo_masked);
    auto g = b.out_reg(w);
    b.seq("if (" + rst + ") begin " + state + " <= " + lit(sw, 0) + "; " + mask + " <= " + lit(w, 0) + "; " + g +
          " <= " + lit(w, 0) + "; end else begin");
    b.seq("  case (" + state + ")");
    b.seq("    " + lit(sw, 0) + ": if (" + go + ") " + state + " <= " + lit(sw, 1) + ";");
    b.seq("    default: begin " + g + " <= " + gnt + "; " + mask + " <= ~(" + gnt + " - " + lit(w, 1) + ") ^ " + gnt +
          "; if (" + req + " == " + lit(w, 0) + ") " + state + " <= " + lit(sw, 0) + "; end");
    b.seq("  endcase");
    b.seq("end");
    return finish(rng, b, size, "rrarb", "arbiter");
  }
  int units = std::clamp(static_cast<int>(std::lround(size / 150.0)), 1, 5);
  int w = width_for(rng, std::max(size - 6.0 * states, 4.0) / units, rint(rng, 6, 10), 2, 64);
  std::vector<std::string> regs, inputs;
  for (int u = 0; u < units; ++u) {
    regs.push_back(chance(rng, 0.5) ? b.out_reg(w) : b.reg(w));
    inputs.push_back(b.in(w));
  }
  auto limit = b.in(w);
  conds.push_back(b.wire(1, regs[0] + " == " + limit));
  if (chance(rng, 0.6)) conds.push_back(b.wire(1, inputs[0] + " < " + regs[0]));
  conds.push_back(b.in(1));
  std::string reset = "if (" + rst + ") begin " + state + " <= " + lit(sw, code(0)) + ";";
  for (const auto& r : regs) reset += " " + r + " <= " + lit(w, 0) + ";";
  b.seq(reset + " end else begin");
  b.seq("  case (" + state + ")");
  for (int s = 0; s < states; ++s) {
    std::string item = "    " + lit(sw, code(s)) + ": begin";
    int nxt = s + 1 < states ? s + 1 : 0;
    item += " if (" + pick(rng, conds) + ") " + state + " <= " + lit(sw, code(nxt)) + ";";
    if (chance(rng, 0.4) && states > 2)
      item += " else if (" + pick(rng, conds) + ") " + state + " <= " + lit(sw, code(rint(rng, 0, states - 1))) + ";";
    for (std::size_t u = 0; u < regs.size(); ++u) {
      int r = rint(rng, 0, 4);
      const auto& q = regs[u];
      const auto& x = inputs[u];
      if (r == 0) item += " " + q + " <= " + q + " + " + x + ";";
      else if (r == 1) item += " " + q + " <= " + q + " + " + lit(w, 1) + ";";
      else if (r == 2) item += " " + q + " <= " + x + ";";
      else if (r == 3) item += " " + q + " <= " + q + " ^ " + x + ";";
    }
    item += " end";
    b.seq(item);
  }
  if (states < (1 << sw) || chance(rng, 0.5)) b.seq("    default: " + state + " <= " + lit(sw, code(0)) + ";");
  b.seq("  endcase");
  b.seq("end");
  b.assign(b.out(1), state + " == " + lit(sw, code(rint(rng, 0, states - 1))));
  if (chance(rng, 0.5)) b.assign(b.out(1), "(" + state + " == " + lit(sw, code(0)) + ") & " + go);
  for (const auto& r : regs)
    if (r[0] == 'r') b.assign(b.out(w), r);
  return finish(rng, b, size, "fsm", "fsm");
}

Template template_for(Tier t) {
  switch (t) {
    case Tier::TinyComb: return tiny_comb;
    case Tier::StructuredComb: return structured_comb;
    case Tier::ElementalSeq: return elemental_seq;
    case Tier::CounterShift: return counter_shift;
    case Tier::FsmComposite: return fsm_composite;
  }
  return tiny_comb;
}

double target_size(Rng& rng, int bin) {
  static constexpr std::array<std::pair<double, double>, kGateBins> bounds = {
      {{1, 10}, {11, 50}, {51, 100}, {101, 200}, {201, 2000}}};
  auto [lo, hi] = bounds[static_cast<std::size_t>(bin)];
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + index + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr int kAttempts = 80;

GeneratedModule make_module(Tier tier, int bin, std::uint64_t seed, std::size_t index) {
  Rng rng(mix_seed(seed, index));
  char id[16];
  std::snprintf(id, sizeof id, "g%06zu", index);
  double target = target_size(rng, bin);
  double knob = target;
  auto tmpl = template_for(tier);
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Made made = tmpl(rng, knob);
    std::string name = std::string(made.domain) + "_" + id;
    auto at = made.source.find(' ');
    auto paren = made.source.find(' ', at + 1);
    made.source = made.source.substr(0, at + 1) + name + made.source.substr(paren);
    int gates = static_cast<int>(elaborate(verilog::parse(made.source)).gates.size());
    if (gate_bin(gates) == bin) {
      GeneratedModule m;
      m.module = verilog::make_source_module(id, made.source);
      m.tier = tier;
      m.domain = made.domain;
      m.gates = gates;
      return m;
    }
    double ratio = gates > 0 ? target / gates : 2.0;
    knob = std::clamp(knob * std::clamp(ratio, 0.5, 2.0), 0.5, 4000.0);
    if (attempt % 10 == 9) knob = target = target_size(rng, bin);
  }
  throw Error(ErrorCode::InfeasibleSpec, std::string("template ") + std::string(to_string(tier)) +
                                             " could not reach gate bin " + std::string(gate_bin_label(bin)));
}

}  // namespace

std::vector<GeneratedModule> generate(const GenSpec& spec, unsigned jobs) {
  auto quotas = plan_quotas(spec);
  std::vector<std::pair<Tier, int>> cells;
  for (std::size_t t = 0; t < 5; ++t)
    for (int b = 0; b < kGateBins; ++b)
      cells.insert(cells.end(), quotas[t][static_cast<std::size_t>(b)], {kAllTiers[t], b});
  Rng rng(mix_seed(spec.seed, ~std::uint64_t{0}));
  std::shuffle(cells.begin(), cells.end(), rng);
  std::vector<GeneratedModule> out(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) { out[i] = make_module(cells[i].first, cells[i].second, spec.seed, i); });
  return out;
}

}  // namespace slackcast::corpus
