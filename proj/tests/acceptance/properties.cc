// Criteria 1, 2, 8 and 9: oracle equivalence, strategy contracts,
// determinism and statistical sanity.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "checks.h"
#include "wban/experiment.h"
#include "wban/simulation.h"

namespace wban::acceptance {

namespace {

constexpr double kFar = 200.0;  // attenuation that no margin survives
constexpr double kNear = 30.0;

using Edges = std::vector<std::pair<Site, Site>>;

// Every posture gets the same deterministic graph so the choice of posture
// does not matter.
ChannelConfig graph_channel(const Edges& edges) {
  ChannelConfig c = default_channel_config();
  for (Posture p : kAllPostures) {
    for (Site a : kAllSites)
      for (Site b : kAllSites)
        if (a != b) c.set_link(p, a, b, {kFar, 0.0});
    for (auto [a, b] : edges) c.set_link(p, a, b, {kNear, 0.0});
  }
  return c;
}

// Hop distance from `from`; -1 when unreachable.
std::array<int, kNumSites> bfs_depth(const Edges& edges, Site from = kSink) {
  std::array<int, kNumSites> depth;
  depth.fill(-1);
  depth[index(from)] = 0;
  std::queue<Site> q;
  q.push(from);
  while (!q.empty()) {
    const Site u = q.front();
    q.pop();
    for (auto [a, b] : edges) {
      for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
        if (x == u && depth[index(y)] < 0) {
          depth[index(y)] = depth[index(u)] + 1;
          q.push(y);
        }
      }
    }
  }
  return depth;
}

bool sends(const Actions& actions) {
  for (const Action& a : actions)
    if (std::holds_alternative<SendFrame>(a)) return true;
  return false;
}

bool starts_timer(const Actions& actions) {
  for (const Action& a : actions)
    if (std::holds_alternative<StartTimer>(a)) return true;
  return false;
}

const Frame* first_data(const Actions& actions) {
  for (const Action& a : actions)
    if (auto* s = std::get_if<SendFrame>(&a); s && s->frame.kind == FrameKind::kData)
      return &s->frame;
  return nullptr;
}

Frame copy_from(Site sender, int ttl, int hops, SiteSet contributors = {}, SiteSet covered = {}) {
  Frame f;
  f.kind = FrameKind::kData;
  f.sender = sender;
  f.msg.id = MessageId{kSink, 0};
  f.msg.ttl = ttl;
  f.msg.hops = hops;
  f.msg.contributors = contributors;
  f.msg.covered = covered;
  return f;
}

RunConfig base_config(const Scenario& s, StrategyKind k, std::uint64_t seed) {
  StrategyParams p = s.defaults;
  p.kind = k;
  return single_packet_run(s, p, s.posture, seed);
}

}  // namespace

// Flooding on a deterministic graph reaches exactly the breadth-first set
// within the TTL, and a node is reached after every node on a shortest path
// from the sink to it. Nodes on different branches are not compared: their
// order depends on backoff draws, not on depth.
Outcome oracle_equivalence(const Scenario& s) {
  Outcome o;
  const std::vector<std::pair<std::string, Edges>> graphs = {
      {"tree",
       {{Site::kChest, Site::kUpperArm},
        {Site::kChest, Site::kNavel},
        {Site::kUpperArm, Site::kWrist},
        {Site::kNavel, Site::kThigh},
        {Site::kThigh, Site::kAnkle}}},
      {"chain",
       {{Site::kChest, Site::kNavel},
        {Site::kNavel, Site::kThigh},
        {Site::kThigh, Site::kAnkle},
        {Site::kAnkle, Site::kWrist},
        {Site::kWrist, Site::kUpperArm},
        {Site::kUpperArm, Site::kHead}}},
      // A triangle at the sink. Each node's first copy comes from a single
      // parent, so hidden senders never collide on a node still waiting for
      // it: without capture such collisions would decide coverage, which the
      // breadth-first oracle does not model.
      {"triangle",
       {{Site::kChest, Site::kUpperArm},
        {Site::kChest, Site::kNavel},
        {Site::kUpperArm, Site::kNavel},
        {Site::kUpperArm, Site::kWrist},
        {Site::kWrist, Site::kHead},
        {Site::kNavel, Site::kThigh},
        {Site::kThigh, Site::kAnkle}}},
      {"star",
       {{Site::kChest, Site::kHead},
        {Site::kChest, Site::kUpperArm},
        {Site::kChest, Site::kWrist},
        {Site::kChest, Site::kNavel},
        {Site::kChest, Site::kThigh},
        {Site::kChest, Site::kAnkle}}},
  };
  int checked = 0;
  for (const auto& [gname, edges] : graphs) {
    const auto depth = bfs_depth(edges);
    std::array<std::array<int, kNumSites>, kNumSites> dist;
    for (Site x : kAllSites) dist[index(x)] = bfs_depth(edges, x);
    Scenario g = s;
    g.channel = graph_channel(edges);
    for (int ttl : {1, 2, 3, 8}) {
      for (int seed = 1; seed <= 10; ++seed) {
        RunConfig c = base_config(g, StrategyKind::kFlooding, static_cast<std::uint64_t>(seed));
        c.strategy.ttl_init = ttl;
        Simulation sim(c);
        const MetricsRecord m = sim.run();
        ++checked;
        for (Site x : kAllSites) {
          if (x == kSink) continue;
          const int d = depth[index(x)];
          const bool expect = d >= 1 && d <= ttl;
          const bool got = m.node(x).received > 0;
          if (expect != got)
            o.fail(fmt::format("{} ttl={} seed={}: {} expected {} got {}", gname, ttl, seed,
                               to_string(x), expect ? "covered" : "uncovered",
                               got ? "covered" : "uncovered"));
        }
        for (Site x : kAllSites) {
          for (Site y : kAllSites) {
            const auto dx = m.node_mean_delay_s(x);
            const auto dy = m.node_mean_delay_s(y);
            if (x == kSink || y == kSink || !dx || !dy) continue;
            const bool ancestor = x != y && depth[index(x)] >= 0 && depth[index(y)] >= 0 &&
                                  dist[index(x)][index(y)] >= 0 &&
                                  depth[index(x)] + dist[index(x)][index(y)] == depth[index(y)];
            if (ancestor && !(*dx < *dy))
              o.fail(fmt::format("{} ttl={} seed={}: ancestor {} (depth {}) not before {} (depth {})",
                                 gname, ttl, seed, to_string(x), depth[index(x)], to_string(y),
                                 depth[index(y)]));
          }
        }
      }
    }
    std::string row = gname + " depths:";
    for (Site x : kAllSites) row += fmt::format(" {}={}", to_string(x), depth[index(x)]);
    o.note(row);
  }
  o.summary = fmt::format("{} runs over 4 graphs x ttl {{1,2,3,8}} x 10 seeds", checked);
  return o;
}

Outcome strategy_contracts(const Scenario& s) {
  Outcome o;
  int assertions = 0;
  auto check = [&](bool ok, std::string what) {
    ++assertions;
    if (!ok) o.fail(std::move(what));
  };

  // Whole-run audits on the tx log: TTL safety for every strategy, at most
  // one data transmission per node for Plain Flooding, no saturated copy for
  // OptFlood.
  for (StrategyKind k : kAllStrategyKinds) {
    for (int seed = 1; seed <= 20; ++seed) {
      RunConfig c = base_config(s, k, static_cast<std::uint64_t>(seed));
      Simulation sim(c);
      sim.keep_tx_log(true);
      sim.run();
      std::map<std::pair<Site, std::uint32_t>, int> per_node;
      for (const TxRecord& r : sim.tx_log()) {
        if (r.frame.kind != FrameKind::kData) continue;
        const BroadcastMessage& m = r.frame.msg;
        if (m.ttl < 1 || m.ttl + m.hops != c.strategy.ttl_init + 1)
          check(false, fmt::format("{} seed {}: frame ttl={} hops={} breaks the TTL rule",
                                   to_string(k), seed, m.ttl, m.hops));
        if (k == StrategyKind::kOptFlood && m.contributors.full())
          check(false, fmt::format("optflood seed {}: copy with 7 contributors on air", seed));
        ++per_node[{r.frame.sender, m.id.seq}];
      }
      if (k == StrategyKind::kPlainFlooding)
        for (const auto& [key, n] : per_node)
          check(n <= 1, fmt::format("plain-flooding seed {}: {} sent {} copies", seed,
                                    to_string(key.first), n));
      ++assertions;
    }
  }

  RngStream rng(7, StreamPurpose::kTest);
  const NodeContext at_navel{Site::kNavel, SimTime(), rng};

  // Plain Flooding state machine: only the first copy is forwarded.
  {
    PlainFlooding pf(s.defaults);
    check(sends(pf.receive(copy_from(kSink, 8, 1), at_navel)), "plain: first copy not forwarded");
    check(!sends(pf.receive(copy_from(Site::kThigh, 7, 2), at_navel)),
          "plain: second copy forwarded");
  }

  // OptFlood: cpt_local never decreases and no full copy goes out, over
  // random copy sequences.
  {
    RngStream pick(11, StreamPurpose::kTest);
    for (int trial = 0; trial < 500; ++trial) {
      OptFlood of(s.defaults);
      int last = 0;
      for (int i = 0; i < 12; ++i) {
        const auto bits = static_cast<std::uint8_t>(pick.uniform_int(128) | 0x02);  // sink set
        Site sender = site_at(static_cast<int>(pick.uniform_int(kNumSites)));
        if (sender == Site::kNavel) sender = kSink;
        const Actions a =
            of.receive(copy_from(sender, 8, 2, SiteSet::from_bits(bits)), at_navel);
        const int now = of.cpt_local(MessageId{kSink, 0});
        check(now >= last, fmt::format("optflood: cpt_local fell from {} to {}", last, now));
        last = now;
        if (const Frame* f = first_data(a))
          check(!f->msg.contributors.full(), "optflood: forwarded a copy with 7 contributors");
      }
    }
    OptFlood of(s.defaults);
    check(!sends(of.receive(copy_from(kSink, 8, 1, SiteSet::all()), at_navel)),
          "optflood: full copy not suppressed");
  }

  // Tabu: the known covered set only grows.
  {
    RngStream pick(13, StreamPurpose::kTest);
    for (int trial = 0; trial < 500; ++trial) {
      TabuFlooding tabu(s.defaults);
      SiteSet last;
      for (int i = 0; i < 12; ++i) {
        const auto bits = static_cast<std::uint8_t>(pick.uniform_int(128));
        Frame f = copy_from(site_at(static_cast<int>(pick.uniform_int(kNumSites))), 8, 2, {},
                            SiteSet::from_bits(bits));
        f.addressees = SiteSet::all();
        tabu.receive(f, at_navel);
        const SiteSet now = tabu.known_covered(MessageId{kSink, 0});
        check(last.subset_of(now), "tabu: covered set shrank");
        last = now;
      }
    }
  }

  // Decreasing probabilistic flooding: the n-th copy is forwarded with 2^-(n-1).
  {
    ProbabilisticFlooding pd(s.defaults, true);
    for (int n = 1; n <= 10; ++n) {
      const double p = pd.forwarding_probability(MessageId{kSink, 0});
      check(p == std::ldexp(1.0, -(n - 1)),
            fmt::format("probdec: draw {} used P={} instead of 2^-{}", n, p, n - 1));
      pd.receive(copy_from(kSink, 8, 1), at_navel);
    }
  }

  // MBP: below the hop threshold the copy goes out at once, without a timer.
  {
    StrategyParams p = s.defaults;
    p.kind = StrategyKind::kMbp;
    for (int nh = 1; nh < p.mbp_delta; ++nh) {
      Mbp mbp(p);
      const Actions a = mbp.receive(copy_from(kSink, 8, nh), at_navel);
      check(sends(a) && !starts_timer(a),
            fmt::format("mbp: NH={} < delta={} did not forward immediately", nh, p.mbp_delta));
    }
    Mbp mbp(p);
    const Actions a = mbp.receive(copy_from(Site::kUpperArm, 8, p.mbp_delta), at_navel);
    check(!sends(a) && starts_timer(a), "mbp: NH = delta should wait for acks");
  }

  // EBP: the chest holds with two fresh neighbours and sends once a third
  // one is heard.
  {
    StrategyParams p = s.defaults;
    p.kind = StrategyKind::kEbp;
    Ebp chest(p);
    RngStream r(17, StreamPurpose::kTest);
    const SimTime t = SimTime::millis(100);
    chest.note_heard(Site::kHead, t);
    chest.note_heard(Site::kNavel, t);
    BroadcastMessage m;
    m.id = MessageId{kSink, 0};
    m.ttl = 8;
    check(!sends(chest.originate(m, NodeContext{kSink, t, r})),
          "ebp: chest sent with 2 fresh neighbours");
    check(chest.holding(t), "ebp: chest is not holding the message");
    Frame hello;
    hello.kind = FrameKind::kHello;
    hello.sender = Site::kUpperArm;
    check(sends(chest.receive(hello, NodeContext{kSink, t, r})),
          "ebp: chest did not send once 3 neighbours were fresh");
  }

  o.summary = fmt::format("{} assertions", assertions);
  return o;
}

Outcome determinism(const Scenario& s) {
  Outcome o;
  // Library replay: same config, same trace.
  for (StrategyKind k : kAllStrategyKinds) {
    std::string traces[2];
    for (auto& t : traces) {
      std::ostringstream out;
      Simulation sim(base_config(s, k, 3));
      sim.set_trace(&out);
      sim.run();
      t = out.str();
    }
    if (traces[0] != traces[1] || traces[0].empty())
      o.fail(fmt::format("{}: replay traces differ", to_string(k)));
  }
  {
    std::string traces[2];
    StrategyParams p = s.defaults;
    p.kind = StrategyKind::kMbp;
    for (auto& t : traces) {
      std::ostringstream out;
      Simulation sim(rate_run(s, p, 50, s.mac.queue_capacity, 5));
      sim.set_trace(&out);
      sim.run();
      t = out.str();
    }
    if (traces[0] != traces[1]) o.fail("mbp at 50 pkt/s: replay traces differ");
  }

#ifdef WBAN_CLI
  {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / fmt::format("wban-replay-{}", ::getpid());
    fs::create_directories(dir);
    std::string files[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path f = dir / fmt::format("trace{}.txt", i);
      const std::string cmd = fmt::format("\"{}\" replay \"{}\" --seed 42 --strategy ebp -o \"{}\"",
                                          WBAN_CLI, scenario_path(), f.string());
      if (std::system(cmd.c_str()) != 0) {
        o.fail("replay command failed: " + cmd);
        break;
      }
      std::ifstream in(f, std::ios::binary);
      files[i].assign(std::istreambuf_iterator<char>(in), {});
    }
    if (files[0].empty() || files[0] != files[1]) o.fail("CLI replay traces differ");
    else o.note(fmt::format("CLI replay: {} bytes identical", files[0].size()));
    fs::remove_all(dir);
  }
#endif

  // Serial and parallel sweeps produce the same CSV.
  std::string csv[2];
  const unsigned jobs[2] = {1, 4};
  for (int i = 0; i < 2; ++i) {
    std::ostringstream out;
    write_csv(out, run_experiment(s, Experiment::kE1, RunnerOptions{jobs[i], {}}));
    csv[i] = out.str();
  }
  if (csv[0] != csv[1]) o.fail("E1 CSV differs between 1 and 4 worker threads");
  o.note(fmt::format("E1 CSV: {} bytes, serial == parallel: {}", csv[0].size(), csv[0] == csv[1]));
  o.summary = o.pass ? "traces and CSV byte-identical" : "non-determinism found";
  return o;
}

namespace {

// Exhaustive enumeration over both nodes' first backoff draws. A node that
// senses the other on the air defers until that transmission ends, so with
// two nodes the frames can only overlap when both first CCAs find the medium
// idle.
double csma_collision_oracle(const MacParams& mac, int payload_bits) {
  const double unit = mac.backoff_unit.sec();
  const double cca = mac.cca_duration.sec();
  const double turn = mac.turnaround.sec();
  const double air = static_cast<double>(mac.header_bits + payload_bits) / mac.data_rate_bps;
  const int slots = 1 << mac.min_be;
  int collide = 0;
  for (int a = 0; a < slots; ++a) {
    for (int b = 0; b < slots; ++b) {
      const double sense_a = a * unit + cca;
      const double sense_b = b * unit + cca;
      const double tx_a = sense_a + turn;
      const double tx_b = sense_b + turn;
      const bool a_idle = !(tx_b <= sense_a && sense_a < tx_b + air);
      const bool b_idle = !(tx_a <= sense_b && sense_b < tx_a + air);
      collide += a_idle && b_idle && tx_a < tx_b + air && tx_b < tx_a + air;
    }
  }
  return static_cast<double>(collide) / (slots * slots);
}

}  // namespace

Outcome statistical_sanity(const Scenario& s) {
  Outcome o;

  // Attenuation sampler.
  {
    RngStream r(21, StreamPurpose::kTest);
    const LinkStats st{45.0, 5.0};
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double v = sample_attenuation(st, r);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    o.note(fmt::format("sampler N(45,5), 1e5 draws: mean {:.4f} sd {:.4f}", mean, sd));
    if (std::abs(mean - 45.0) > 0.1) o.fail(fmt::format("sampler mean {:.4f} not 45 +- 0.1", mean));
    if (std::abs(sd - 5.0) > 0.1) o.fail(fmt::format("sampler sd {:.4f} not 5 +- 0.1", sd));
    int negative = 0;
    for (int i = 0; i < n; ++i) negative += sample_attenuation({2.0, 10.0}, r) < 0.0;
    if (negative) o.fail(fmt::format("{} negative attenuations with mean 2, sd 10", negative));
  }

  // Constant-probability forwarder.
  {
    StrategyParams p = s.defaults;
    p.kind = StrategyKind::kProbabilistic;
    p.probability = 0.5;
    RngStream r(23, StreamPurpose::kTest);
    const int trials = 10000;
    int forwarded = 0;
    for (int i = 0; i < trials; ++i) {
      ProbabilisticFlooding pf(p, false);
      forwarded += sends(pf.receive(copy_from(kSink, 8, 1), NodeContext{Site::kHead, SimTime(), r}));
    }
    const double frac = static_cast<double>(forwarded) / trials;
    o.note(fmt::format("P=0.5 forwarder: {:.4f} over {} trials", frac, trials));
    if (std::abs(frac - 0.5) > 0.02) o.fail(fmt::format("forwarding rate {:.4f} not 0.5 +- 0.02", frac));
  }

  // Two-node CSMA collision probability against the enumeration oracle.
  {
    ChannelConfig ch = graph_channel({{Site::kChest, Site::kHead}});
    Frame f;
    f.kind = FrameKind::kData;
    f.msg.app_bits = s.defaults.app_bits;
    const int payload = f.payload_bits();
    const double expected = csma_collision_oracle(s.mac, payload);
    const int trials = 10000;
    int collisions = 0;
    for (int i = 0; i < trials; ++i) {
      const auto seed = static_cast<std::uint64_t>(i + 1);
      Engine engine;
      Channel channel(ch, Posture::kWalk, RngStream(seed, StreamPurpose::kChannel));
      std::vector<std::pair<SimTime, SimTime>> on_air;
      std::vector<std::unique_ptr<Mac>> macs;
      for (Site site : {Site::kChest, Site::kHead}) {
        Mac::Hooks h;
        h.on_tx_start = [&](const Frame& fr) {
          on_air.emplace_back(engine.now(), engine.now() + s.mac.airtime(fr.payload_bits()));
        };
        macs.push_back(std::make_unique<Mac>(
            site, s.mac, engine, channel,
            RngStream(seed, StreamPurpose::kMac, static_cast<std::uint64_t>(index(site))),
            std::move(h)));
      }
      for (auto& m : macs) m->enqueue(f);
      engine.run_until(SimTime::seconds(1.0));
      if (on_air.size() == 2 && on_air[0].first < on_air[1].second &&
          on_air[1].first < on_air[0].second)
        ++collisions;
    }
    const double frac = static_cast<double>(collisions) / trials;
    o.note(fmt::format("2-node CSMA: collision rate {:.4f}, enumeration oracle {:.4f}", frac,
                       expected));
    if (std::abs(frac - expected) > 0.02)
      o.fail(fmt::format("collision rate {:.4f} not within 0.02 of {:.4f}", frac, expected));
  }
  o.summary = o.pass ? "sampler, forwarder and CSMA within tolerance" : "out of tolerance";
  return o;
}

}  // namespace wban::acceptance
