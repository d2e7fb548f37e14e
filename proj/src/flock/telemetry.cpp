#include "flock/telemetry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace flock {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_u64(const std::string& s, std::size_t line, int base = 10) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    parse_fail(line, "bad integer '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s, std::size_t line) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    parse_fail(line, "bad number '" + s + "'");
  }
  return v;
}

ComponentId parse_component(const std::string& s, std::size_t line, const Topology& topo) {
  std::uint64_t v = parse_u64(s, line);
  if (v >= kNoComponent || !topo.exists(static_cast<ComponentId>(v))) {
    parse_fail(line, "unknown component id " + s);
  }
  return static_cast<ComponentId>(v);
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  char hex[17];
  auto res = std::to_chars(hex, hex + 16, trace.header.topo_checksum, 16);
  out << "# flock trace\n";
  out << "topo_checksum " << std::string(hex, res.ptr) << '\n';
  out << "seed " << trace.header.seed << '\n';
  out << "scenario " << trace.header.scenario << '\n';
  for (const auto& f : trace.truth.failures) {
    out << "fail " << f.id << ' ' << format_double(f.drop_rate);
    if (f.parent != kNoComponent) out << " parent=" << f.parent;
    out << '\n';
  }
  std::string line;
  for (const auto& r : trace.records) {
    line.clear();
    line += "flow ";
    line += std::to_string(r.src);
    line += ' ';
    line += std::to_string(r.dst);
    line += ' ';
    line += std::to_string(r.packets_sent);
    line += ' ';
    line += std::to_string(r.bad_packets);
    line += r.kind == FlowKind::ActiveProbe ? " probe" : " app";
    if (r.rtt_ms) {
      line += " rtt=";
      line += format_double(*r.rtt_ms);
    }
    if (r.path) {
      line += " path=";
      for (auto c : *r.path) {
        line += ' ';
        line += std::to_string(c);
      }
    }
    line += '\n';
    out << line;
  }
}

void save_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write trace file " + path);
  write_trace(out, trace);
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

Trace parse_trace(std::istream& in, const Topology& topo) {
  Trace trace;
  Router router(topo);
  bool have_checksum = false;
  std::string line;
  std::vector<std::string> tok;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    tok.clear();
    {
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tok.emplace_back(line, i, j - i);
        i = j;
      }
    }
    if (tok.empty()) continue;
    const std::string& word = tok[0];
    if (word == "topo_checksum") {
      if (tok.size() != 2) parse_fail(line_no, "topo_checksum expects one value");
      trace.header.topo_checksum = parse_u64(tok[1], line_no, 16);
      have_checksum = true;
      if (trace.header.topo_checksum != topo.checksum()) {
        parse_fail(line_no, "trace was generated for a different topology");
      }
    } else if (word == "seed") {
      if (tok.size() != 2) parse_fail(line_no, "seed expects one value");
      trace.header.seed = parse_u64(tok[1], line_no);
    } else if (word == "scenario") {
      if (tok.size() != 2) parse_fail(line_no, "scenario expects one tag");
      trace.header.scenario = tok[1];
    } else if (word == "fail") {
      if (tok.size() < 3 || tok.size() > 4) parse_fail(line_no, "fail expects <id> <rate> [parent=<id>]");
      FailedComponent f;
      f.id = parse_component(tok[1], line_no, topo);
      f.drop_rate = parse_real(tok[2], line_no);
      if (!(f.drop_rate >= 0.0 && f.drop_rate <= 1.0)) parse_fail(line_no, "drop rate outside [0,1]");
      if (tok.size() == 4) {
        if (tok[3].rfind("parent=", 0) != 0) parse_fail(line_no, "unexpected token '" + tok[3] + "'");
        f.parent = parse_component(tok[3].substr(7), line_no, topo);
        if (!topo.is_device(f.parent) || !topo.is_link(f.id)) {
          parse_fail(line_no, "parent must be a device and the failed component a link");
        }
      }
      trace.truth.failures.push_back(f);
    } else if (word == "flow") {
      if (tok.size() < 6) parse_fail(line_no, "flow expects <src> <dst> <t> <r> <probe|app>");
      FlowRecord r;
      r.src = parse_component(tok[1], line_no, topo);
      r.dst = parse_component(tok[2], line_no, topo);
      r.packets_sent = parse_u64(tok[3], line_no);
      r.bad_packets = parse_u64(tok[4], line_no);
      if (r.bad_packets > r.packets_sent) parse_fail(line_no, "bad packets exceed packets sent (r > t)");
      if (tok[5] == "probe") {
        r.kind = FlowKind::ActiveProbe;
      } else if (tok[5] == "app") {
        r.kind = FlowKind::Application;
      } else {
        parse_fail(line_no, "flow kind must be probe or app");
      }
      if (!topo.is_host(r.src)) parse_fail(line_no, "flow source must be a host");
      if (!topo.is_device(r.dst) || r.dst == r.src) parse_fail(line_no, "bad flow destination");
      if (r.kind == FlowKind::Application && !topo.is_host(r.dst)) {
        parse_fail(line_no, "application flow destination must be a host");
      }
      std::size_t i = 6;
      if (i < tok.size() && tok[i].rfind("rtt=", 0) == 0) {
        double v = parse_real(tok[i].substr(4), line_no);
        if (!(v >= 0.0)) parse_fail(line_no, "negative rtt");
        r.rtt_ms = v;
        ++i;
      }
      if (i < tok.size()) {
        if (tok[i] != "path=") parse_fail(line_no, "unexpected token '" + tok[i] + "'");
        Path p;
        for (++i; i < tok.size(); ++i) p.push_back(parse_component(tok[i], line_no, topo));
        if (!router.contains(r.src, r.dst, p)) parse_fail(line_no, "path is not in the ECMP set");
        r.path = std::move(p);
      }
      if (r.kind == FlowKind::ActiveProbe && !r.path) parse_fail(line_no, "probe without explicit path");
      trace.records.push_back(std::move(r));
    } else {
      parse_fail(line_no, "unknown record '" + word + "'");
    }
  }
  if (!have_checksum) trace.header.topo_checksum = topo.checksum();
  return trace;
}

Trace load_trace(const std::string& path, const Topology& topo) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open trace file " + path);
  return parse_trace(in, topo);
}

const char* to_string(InputKind kind) {
  switch (kind) {
    case InputKind::A1: return "A1";
    case InputKind::A2: return "A2";
    case InputKind::P: return "P";
    case InputKind::INT: return "INT";
    case InputKind::A1_P: return "A1+P";
    case InputKind::A2_P: return "A2+P";
    case InputKind::A1_A2_P: return "A1+A2+P";
  }
  return "?";
}

InputKind parse_input_kind(const std::string& text) {
  for (auto k : {InputKind::A1, InputKind::A2, InputKind::P, InputKind::INT, InputKind::A1_P,
                 InputKind::A2_P, InputKind::A1_A2_P}) {
    if (text == to_string(k)) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown input kind '" + text + "'");
}

bool uses_passive_paths(InputKind kind) {
  return kind == InputKind::P || kind == InputKind::A1_P || kind == InputKind::A2_P ||
         kind == InputKind::A1_A2_P;
}

std::vector<SelectedFlow> select_input(std::span<const FlowRecord> records, InputKind kind,
                                       const Router& router) {
  const bool a1 = kind == InputKind::A1 || kind == InputKind::A1_P || kind == InputKind::A1_A2_P;
  const bool a2 = kind == InputKind::A2 || kind == InputKind::A2_P || kind == InputKind::A1_A2_P;
  const bool passive = uses_passive_paths(kind);
  const bool in_band = kind == InputKind::INT;

  std::size_t probes = 0, apps = 0;
  for (const auto& r : records) (r.kind == FlowKind::ActiveProbe ? probes : apps)++;
  // An empty trace selects nothing for every kind; a trace that lacks the
  // record class a kind depends on is an error.
  if (records.empty()) return {};
  if (a1 && probes == 0) {
    fail(ErrorCode::NoUsableInput, std::string("no usable input: ") + to_string(kind) +
                                       " needs active probes and the trace has none");
  }
  if ((passive || a2) && apps == 0) {
    fail(ErrorCode::NoUsableInput, std::string("no usable input: ") + to_string(kind) +
                                       " needs application flows and the trace has none");
  }

  std::map<std::pair<ComponentId, ComponentId>, std::shared_ptr<const PathSet>> ecmp;
  std::vector<SelectedFlow> out;
  for (std::uint32_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    bool take = false, singleton = false;
    if (rec.kind == FlowKind::ActiveProbe) {
      take = singleton = a1 || in_band;
    } else {
      if ((a2 && rec.bad_packets >= 1) || in_band) {
        if (!rec.path) {
          fail(ErrorCode::NoUsableInput, std::string("no usable input: ") + to_string(kind) +
                                             " needs traced paths for application flows");
        }
        take = singleton = true;
      } else if (passive) {
        take = true;
      }
    }
    if (!take) continue;
    SelectedFlow f{rec.src, rec.dst, rec.packets_sent, rec.bad_packets, nullptr, i};
    if (singleton) {
      f.paths = std::make_shared<const PathSet>(std::vector<Path>{*rec.path});
    } else {
      auto& slot = ecmp[{rec.src, rec.dst}];
      if (!slot) slot = router.shared_paths(rec.src, rec.dst);
      f.paths = slot;
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FlowRecord> per_flow_binarize(std::span<const FlowRecord> records,
                                          double rtt_threshold_ms) {
  std::vector<FlowRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.rtt_ms) fail(ErrorCode::InvalidArgument, "per-flow analysis needs rtt on every record");
    FlowRecord b = r;
    b.packets_sent = 1;
    b.bad_packets = *r.rtt_ms > rtt_threshold_ms ? 1 : 0;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<FlowRecord> downsample(std::span<const FlowRecord> records, double keep,
                                   std::uint64_t seed) {
  if (!(keep >= 0.0 && keep <= 1.0)) fail(ErrorCode::InvalidArgument, "keep fraction outside [0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FlowRecord> out;
  for (const auto& r : records) {
    if (r.kind == FlowKind::ActiveProbe || u(rng) < keep) out.push_back(r);
  }
  return out;
}

}  // namespace flock
