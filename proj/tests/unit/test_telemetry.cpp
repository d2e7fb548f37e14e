#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "flock/simulator.hpp"
#include "flock/telemetry.hpp"

using namespace flock;

namespace {

std::string header(const Topology& t) {
  std::ostringstream s;
  s << "topo_checksum " << std::hex << t.checksum() << "\nseed 1\nscenario none\n";
  return s.str();
}

Trace parse(const std::string& body, const Topology& t) {
  std::istringstream in(header(t) + body);
  return parse_trace(in, t);
}

ErrorCode parse_error(const std::string& body, const Topology& t, std::string* msg = nullptr) {
  try {
    parse(body, t);
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.code();
  }
  return ErrorCode::Internal;
}

Trace sample_trace(std::uint64_t flows, std::uint64_t probes, std::uint64_t seed = 5) {
  static const Topology topo = build_fat_tree(4, 2);
  FailureScenario sc;
  sc.failures.push_back({topo.inter_switch_links()[3], 0.05});
  SimConfig cfg;
  cfg.app_flows = flows;
  cfg.probes_per_host = probes;
  cfg.seed = seed;
  cfg.emit_rtt = true;
  return simulate(topo, sc, TrafficPattern{}, cfg);
}

std::vector<std::uint32_t> record_ids(const std::vector<SelectedFlow>& flows) {
  std::vector<std::uint32_t> v;
  for (const auto& f : flows) v.push_back(f.record);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("empty trace parses") {
  auto t = build_fat_tree(4, 1);
  auto tr = parse("", t);
  CHECK(tr.records.empty());
  CHECK(tr.truth.failures.empty());
  CHECK(tr.header.topo_checksum == t.checksum());
  Router r(t);
  for (auto k : {InputKind::A1, InputKind::A2, InputKind::P, InputKind::INT}) {
    CHECK(select_input(tr.records, k, r).empty());
  }
}

TEST_CASE("trace parser errors") {
  auto t = build_fat_tree(4, 1);
  const auto& h = t.hosts();
  const std::string a = std::to_string(h[0]), b = std::to_string(h[5]);
  std::string msg;
  CHECK(parse_error("flow " + a + " " + b + " 3 4 app\n", t, &msg) == ErrorCode::Parse);
  CHECK(msg.find("line 4") != std::string::npos);
  CHECK(parse_error("flow " + a + " 999999 3 1 app\n", t) == ErrorCode::Parse);
  CHECK(parse_error("flow " + a + " " + b + " 3 1 app path= 1 2 3\n", t) == ErrorCode::Parse);
  CHECK(parse_error("flow " + a + " " + b + " 3 1 probe\n", t) == ErrorCode::Parse);
  CHECK(parse_error("flow " + a + " " + b + " x 1 app\n", t) == ErrorCode::Parse);
  CHECK(parse_error("flow " + a + " " + b + " 3 1 tcp\n", t) == ErrorCode::Parse);
  CHECK(parse_error("fail 999999 0.1\n", t) == ErrorCode::Parse);
  CHECK(parse_error("bogus 1\n", t) == ErrorCode::Parse);

  Path good = Router(t).path(h[0], h[5], 0);
  std::string line = "flow " + a + " " + b + " 3 1 app path=";
  for (auto c : good) line += " " + std::to_string(c);
  CHECK_NOTHROW(parse(line + "\n", t));

  std::istringstream wrong("topo_checksum 1234\nseed 1\nscenario none\n");
  CHECK_THROWS_AS(parse_trace(wrong, t), Error);
}

TEST_CASE("trace round-trip is byte identical") {
  auto tr = sample_trace(1000, 0);
  REQUIRE(tr.records.size() == 1000);
  std::ostringstream a;
  write_trace(a, tr);
  std::istringstream in(a.str());
  auto back = parse_trace(in, build_fat_tree(4, 2));
  CHECK(back == tr);
  std::ostringstream b;
  write_trace(b, back);
  CHECK(a.str() == b.str());
}

TEST_CASE("A2 on a trace without flagged flows selects nothing") {
  auto t = build_fat_tree(4, 1);
  Router r(t);
  const auto& h = t.hosts();
  std::vector<FlowRecord> recs;
  for (std::size_t i = 1; i < h.size(); ++i) {
    FlowRecord f;
    f.src = h[0];
    f.dst = h[i];
    f.packets_sent = 100;
    f.path = r.path(h[0], h[i], 0);
    recs.push_back(f);
  }
  CHECK(select_input(recs, InputKind::A2, r).empty());
  CHECK(select_input(recs, InputKind::P, r).size() == recs.size());
  CHECK_THROWS_AS(select_input(recs, InputKind::A1, r), Error);
}

TEST_CASE("selection by input kind") {
  auto tr = sample_trace(3000, 20);
  auto topo = build_fat_tree(4, 2);
  Router router(topo);
  auto a1 = select_input(tr.records, InputKind::A1, router);
  auto a2 = select_input(tr.records, InputKind::A2, router);
  auto p = select_input(tr.records, InputKind::P, router);
  auto in = select_input(tr.records, InputKind::INT, router);
  REQUIRE(!a1.empty());
  REQUIRE(!a2.empty());

  for (const auto& f : a1) {
    CHECK(tr.records[f.record].kind == FlowKind::ActiveProbe);
    REQUIRE(f.paths->size() == 1);
    auto fp = (*f.paths)[0];
    CHECK(Path(fp.begin(), fp.end()) == *tr.records[f.record].path);
  }
  for (const auto& f : a2) {
    CHECK(tr.records[f.record].kind == FlowKind::Application);
    CHECK(f.r >= 1);
    CHECK(f.paths->size() == 1);
  }
  for (const auto& f : p) {
    CHECK(tr.records[f.record].kind == FlowKind::Application);
    CHECK(*f.paths == ecmp_paths(topo, f.src, f.dst));
  }
  CHECK(in.size() == a1.size() + p.size());
  for (const auto& f : in) CHECK(f.paths->size() == 1);

  auto ia1 = record_ids(a1), ia2 = record_ids(a2), ip = record_ids(p), iin = record_ids(in);
  CHECK(std::includes(ip.begin(), ip.end(), ia2.begin(), ia2.end()));
  CHECK(std::includes(iin.begin(), iin.end(), ia1.begin(), ia1.end()));
  CHECK(std::includes(iin.begin(), iin.end(), ip.begin(), ip.end()));

  // compound kinds are unions
  auto a1p = record_ids(select_input(tr.records, InputKind::A1_P, router));
  std::vector<std::uint32_t> u;
  std::set_union(ia1.begin(), ia1.end(), ip.begin(), ip.end(), std::back_inserter(u));
  CHECK(a1p == u);
  // a flagged flow appears once, with its traced path
  auto a2p = select_input(tr.records, InputKind::A2_P, router);
  CHECK(record_ids(a2p) == ip);
  for (const auto& f : a2p) CHECK((f.paths->size() == 1) == (f.r >= 1 || ecmp_paths(topo, f.src, f.dst).size() == 1));
  CHECK(record_ids(select_input(tr.records, InputKind::A1_A2_P, router)) == a1p);

  // idempotence
  auto again = select_input(tr.records, InputKind::P, router);
  REQUIRE(again.size() == p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(again[i].record == p[i].record);
    CHECK(*again[i].paths == *p[i].paths);
  }
}

TEST_CASE("kinds that need probes or traced paths report no usable input") {
  auto tr = sample_trace(200, 0);
  auto topo = build_fat_tree(4, 2);
  Router router(topo);
  try {
    select_input(tr.records, InputKind::A1, router);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoUsableInput);
  }
  auto stripped = tr.records;
  for (auto& r : stripped) r.path.reset();
  CHECK_THROWS_AS(select_input(stripped, InputKind::INT, router), Error);
  CHECK_NOTHROW(select_input(stripped, InputKind::P, router));
}

TEST_CASE("input kind names") {
  for (auto k : {InputKind::A1, InputKind::A2, InputKind::P, InputKind::INT, InputKind::A1_P, InputKind::A2_P,
                 InputKind::A1_A2_P}) {
    CHECK(parse_input_kind(to_string(k)) == k);
  }
  CHECK(std::string(to_string(InputKind::A1_P)) == "A1+P");
  CHECK_THROWS_AS(parse_input_kind("B3"), Error);
  CHECK(uses_passive_paths(InputKind::P));
  CHECK(uses_passive_paths(InputKind::A1_P));
  CHECK_FALSE(uses_passive_paths(InputKind::INT));
  CHECK_FALSE(uses_passive_paths(InputKind::A2));
}

TEST_CASE("per-flow binarization") {
  std::vector<FlowRecord> recs(3);
  recs[0].rtt_ms = 15.0;
  recs[0].packets_sent = 40;
  recs[1].rtt_ms = 10.0;
  recs[1].packets_sent = 40;
  recs[1].bad_packets = 3;
  recs[2].rtt_ms = 0.5;
  auto out = per_flow_binarize(recs, 10.0);
  CHECK(out[0].packets_sent == 1);
  CHECK(out[0].bad_packets == 1);
  CHECK(out[1].packets_sent == 1);
  CHECK(out[1].bad_packets == 0);
  CHECK(out[2].bad_packets == 0);
  recs[2].rtt_ms.reset();
  CHECK_THROWS_AS(per_flow_binarize(recs, 10.0), Error);
}

TEST_CASE("downsampling keeps probes and is seeded") {
  auto tr = sample_trace(2000, 10);
  std::size_t probes = std::count_if(tr.records.begin(), tr.records.end(),
                                     [](const FlowRecord& r) { return r.kind == FlowKind::ActiveProbe; });
  CHECK(downsample(tr.records, 1.0, 3) == tr.records);
  CHECK(downsample(tr.records, 0.0, 3).size() == probes);
  auto half = downsample(tr.records, 0.5, 3);
  CHECK(half == downsample(tr.records, 0.5, 3));
  const double apps = static_cast<double>(half.size() - probes);
  CHECK(apps == doctest::Approx(1000.0).epsilon(0.1));
  CHECK_THROWS_AS(downsample(tr.records, 1.5, 3), Error);
}
