#include "flock/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace flock {

void ModelParams::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, what); };
  if (!(p_g > 0.0 && p_g < 1.0)) bad("p_g must lie in (0,1)");
  if (!(p_b > 0.0 && p_b < 1.0)) bad("p_b must lie in (0,1)");
  if (!(p_g < p_b)) bad("p_g must be smaller than p_b");
  if (!(rho_link > 0.0 && rho_link < 0.5)) bad("rho_link must lie in (0,0.5)");
  if (!std::isfinite(device_prior_log_factor) || device_prior_log_factor <= 0.0) {
    bad("device_prior_log_factor must be positive");
  }
  if (!(rtt_threshold_ms >= 0.0)) bad("rtt_threshold_ms must be nonnegative");
  if (!(vote_threshold >= 0.0 && vote_threshold <= 1.0)) bad("vote_threshold must lie in [0,1]");
  if (max_failures < 1) bad("max_failures must be >= 1");
}

void write_params(std::ostream& out, const ModelParams& p) {
  out << "p_g=" << format_double(p.p_g) << '\n'
      << "p_b=" << format_double(p.p_b) << '\n'
      << "rho_link=" << format_double(p.rho_link) << '\n'
      << "device_prior_log_factor=" << format_double(p.device_prior_log_factor) << '\n'
      << "rtt_threshold_ms=" << format_double(p.rtt_threshold_ms) << '\n'
      << "vote_threshold=" << format_double(p.vote_threshold) << '\n'
      << "max_failures=" << p.max_failures << '\n';
}

ModelParams parse_params(std::istream& in) {
  ModelParams p;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    double v = 0;
    auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (val.empty() || res.ec != std::errc() || res.ptr != val.data() + val.size()) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad value for " + key);
    }
    if (key == "p_g") p.p_g = v;
    else if (key == "p_b") p.p_b = v;
    else if (key == "rho_link") p.rho_link = v;
    else if (key == "device_prior_log_factor") p.device_prior_log_factor = v;
    else if (key == "rtt_threshold_ms") p.rtt_threshold_ms = v;
    else if (key == "vote_threshold") p.vote_threshold = v;
    else if (key == "max_failures") {
      if (v != std::floor(v)) fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": max_failures must be an integer");
      p.max_failures = static_cast<int>(v);
    } else {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Parse, e.what());
  }
  return p;
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open params file " + path);
  return parse_params(in);
}

void save_params(const std::string& path, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write params file " + path);
  write_params(out, params);
}

double link_log_odds(const ModelParams& p) { return std::log(p.rho_link) - std::log1p(-p.rho_link); }

double device_log_odds(const ModelParams& p) { return p.device_prior_log_factor * link_log_odds(p); }

double prior_log_odds(const Topology& topo, ComponentId c, const ModelParams& p) {
  if (topo.is_link(c)) return link_log_odds(p);
  if (topo.is_device(c)) return device_log_odds(p);
  fail(ErrorCode::InvalidArgument, "unknown component " + std::to_string(c));
}

double flow_log_ratio(std::uint64_t t, std::uint64_t r, const ModelParams& p) {
  const double good = static_cast<double>(t - r);
  const double bad = static_cast<double>(r);
  double x = 0.0;
  if (r > 0) x += bad * (std::log(p.p_b) - std::log(p.p_g));
  if (t > r) x += good * (std::log1p(-p.p_b) - std::log1p(-p.p_g));
  return x;
}

double flow_ll(std::size_t w, std::size_t b, double x) {
  if (b == 0) return 0.0;
  if (b >= w) return x;
  const double q = static_cast<double>(b) / static_cast<double>(w);
  if (x <= 0.0) return std::log1p(q * std::expm1(x));
  return x + std::log1p((1.0 - q) * std::expm1(-x));
}

Hypothesis::Hypothesis(std::vector<ComponentId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool Hypothesis::insert(ComponentId id) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it != ids_.end() && *it == id) return false;
  ids_.insert(it, id);
  return true;
}

bool Hypothesis::contains(ComponentId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

std::size_t failed_paths(const PathSet& paths, const Hypothesis& h) {
  std::size_t b = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    auto p = paths[i];
    if (std::any_of(p.begin(), p.end(), [&](ComponentId c) { return h.contains(c); })) ++b;
  }
  return b;
}

double flow_log_likelihood(const SelectedFlow& flow, const Hypothesis& h, const ModelParams& params) {
  const std::size_t b = failed_paths(*flow.paths, h);
  if (b == 0) return 0.0;
  return flow_ll(flow.paths->size(), b, flow_log_ratio(flow.t, flow.r, params));
}

double hypothesis_log_likelihood(std::span<const SelectedFlow> flows, const Hypothesis& h,
                                 const Topology& topo, const ModelParams& params) {
  long double total = 0.0L;
  if (h.empty()) return 0.0;
  for (const auto& f : flows) total += flow_log_likelihood(f, h, params);
  for (auto c : h) total += prior_log_odds(topo, c, params);
  return static_cast<double>(total);
}

void write_hypothesis(std::ostream& out, const Hypothesis& h) {
  for (auto c : h) out << "fail " << c << '\n';
}

void save_hypothesis(const std::string& path, const Hypothesis& h) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write hypothesis file " + path);
  write_hypothesis(out, h);
}

Hypothesis parse_hypothesis(std::istream& in, const Topology& topo) {
  std::vector<ComponentId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word, id, extra;
    if (!(ls >> word)) continue;
    if (word != "fail" || !(ls >> id) || (ls >> extra)) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 'fail <component-id>'");
    }
    unsigned long v = 0;
    auto res = std::from_chars(id.data(), id.data() + id.size(), v);
    if (res.ec != std::errc() || res.ptr != id.data() + id.size() || v >= kNoComponent ||
        !topo.exists(static_cast<ComponentId>(v))) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unknown component id " + id);
    }
    ids.push_back(static_cast<ComponentId>(v));
  }
  return Hypothesis(std::move(ids));
}

Hypothesis load_hypothesis(const std::string& path, const Topology& topo) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open hypothesis file " + path);
  return parse_hypothesis(in, topo);
}

}  // namespace flock
