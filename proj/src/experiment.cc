#include "wban/experiment.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace wban {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kE1: return "E1";
    case Experiment::kE2: return "E2";
    case Experiment::kE3: return "E3";
    case Experiment::kE4: return "E4";
    case Experiment::kE5: return "E5";
    case Experiment::kE6: return "E6";
  }
  return "?";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  if (name.size() != 2 || std::toupper(static_cast<unsigned char>(name[0])) != 'E')
    return std::nullopt;
  const int n = name[1] - '0';
  if (n < 1 || n > 6) return std::nullopt;
  return static_cast<Experiment>(n);
}

std::string SweepPoint::key() const {
  std::string k = fmt::format("{}|{}|ttl={}", strategy.label(), to_string(posture),
                              strategy.ttl_init);
  if (mode == SourceMode::kRate) k += fmt::format("|rate={:g}", rate_pps);
  k += fmt::format("|queue={}", queue_capacity);
  return k;
}

RunConfig SweepPoint::run_config(const Scenario& s, std::uint64_t seed) const {
  RunConfig c = mode == SourceMode::kRate ? rate_run(s, strategy, rate_pps, queue_capacity, seed)
                                          : single_packet_run(s, strategy, posture, seed);
  c.posture = posture;
  c.mac.queue_capacity = queue_capacity;
  c.scenario_key = s.id + "|" + key();
  return c;
}

std::vector<SweepPoint> sweep_points(const Scenario& s, Experiment e) {
  std::vector<SweepPoint> out;
  auto single = [&](StrategyParams p, Posture posture) {
    SweepPoint pt;
    pt.strategy = p;
    pt.posture = posture;
    pt.queue_capacity = s.mac.queue_capacity;
    out.push_back(pt);
  };
  auto rated = [&](StrategyParams p, double rate, std::size_t queue) {
    SweepPoint pt;
    pt.strategy = p;
    pt.posture = s.posture;
    pt.mode = SourceMode::kRate;
    pt.rate_pps = rate;
    pt.queue_capacity = queue;
    out.push_back(pt);
  };
  switch (e) {
    case Experiment::kE1:
      for (const auto& p : s.strategies) {
        for (int ttl : s.ttl_sweep) {
          StrategyParams q = p;
          q.ttl_init = ttl;
          single(q, s.posture);
        }
      }
      break;
    case Experiment::kE2:
    case Experiment::kE3:
      for (const auto& p : s.strategies)
        for (Posture posture : s.postures) single(p, posture);
      break;
    case Experiment::kE4:
      for (const auto& p : s.rate_strategies)
        for (double rate : s.rates) rated(p, rate, s.mac.queue_capacity);
      break;
    case Experiment::kE5:
      for (const auto& p : s.rate_strategies)
        for (std::size_t q : s.queue_capacities) rated(p, s.queue_study_rate, q);
      break;
    case Experiment::kE6:
      for (double t : s.mbp_timers_s) {
        StrategyParams p = s.defaults;
        p.kind = StrategyKind::kMbp;
        p.mbp_timer = SimTime::seconds(t);
        single(p, s.posture);
      }
      break;
  }
  return out;
}

std::vector<PointResult> run_points(const Scenario& s, const std::vector<SweepPoint>& points,
                                    const RunnerOptions& opt) {
  const std::size_t seeds = static_cast<std::size_t>(s.seeds);
  const std::size_t total = points.size() * seeds;
  std::vector<RunSummary> summaries(total);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      try {
        const SweepPoint& pt = points[job / seeds];
        Simulation sim(pt.run_config(s, s.seed(static_cast<int>(job % seeds))));
        summaries[job] = summarize(sim.run());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
      std::lock_guard lock(mu);
      ++done;
      if (opt.progress) opt.progress(done, total);
    }
  };

  unsigned jobs = opt.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(total, 1)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<PointResult> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    PointResult r;
    r.point = points[i];
    r.runs.assign(summaries.begin() + static_cast<std::ptrdiff_t>(i * seeds),
                  summaries.begin() + static_cast<std::ptrdiff_t>((i + 1) * seeds));
    r.stats = aggregate(std::span<const RunSummary>(r.runs));
    out.push_back(std::move(r));
  }
  return out;
}

ExperimentResult run_experiment(const Scenario& s, Experiment e, const RunnerOptions& opt) {
  ExperimentResult r;
  r.experiment = e;
  r.scenario_id = s.id;
  r.points = run_points(s, sweep_points(s, e), opt);
  return r;
}

namespace {

std::string num(double v) { return fmt::format("{:.6g}", v); }

std::string stat_or_blank(const Stat& st) { return st.n == 0 ? "" : num(st.mean); }
std::string std_or_blank(const Stat& st) { return st.n == 0 ? "" : num(st.std); }

// ttl,K,P,I,delta,T,Q with blanks where the parameter does not apply.
std::string param_columns(const StrategyParams& p) {
  const bool pruned = p.kind == StrategyKind::kPrunedFlooding;
  const bool prob = p.kind == StrategyKind::kProbabilistic;
  const bool ebp = p.kind == StrategyKind::kEbp;
  const bool mbp = p.kind == StrategyKind::kMbp;
  return fmt::format("{},{},{},{},{},{},{}", p.ttl_init, pruned ? std::to_string(p.pruned_k) : "",
                     prob ? num(p.probability) : "", ebp ? num(p.hello_interval.sec()) : "",
                     mbp ? std::to_string(p.mbp_delta) : "", mbp ? num(p.mbp_timer.sec()) : "",
                     mbp ? std::to_string(p.mbp_quota) : "");
}

}  // namespace

std::string csv_header() {
  return "scenario,strategy,posture,ttl,K,P,I,delta,T,Q,rate,queue_capacity,seeds,"
         "coverage_pct_mean,coverage_pct_std,delay_s_mean,delay_s_std,tx_mean,rx_mean,"
         "deseq_pct_mean,deseq_pct_std,drops,data_tx_mean,data_rx_mean";
}

void write_csv(std::ostream& out, const ExperimentResult& r) {
  out << csv_header() << '\n';
  for (const PointResult& pr : r.points) {
    const SweepPoint& pt = pr.point;
    const AggregateResult& a = pr.stats;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                       r.scenario_id, to_string(pt.strategy.kind), to_string(pt.posture),
                       param_columns(pt.strategy),
                       pt.mode == SourceMode::kRate ? num(pt.rate_pps) : "", pt.queue_capacity,
                       a.seeds, num(a.coverage_pct.mean), num(a.coverage_pct.std),
                       stat_or_blank(a.delay_s), std_or_blank(a.delay_s), num(a.tx.mean),
                       num(a.rx.mean), num(a.deseq_pct.mean), num(a.deseq_pct.std),
                       num(a.drops.mean), num(a.data_tx.mean), num(a.data_rx.mean));
  }
}

std::string node_csv_header() {
  return "scenario,strategy,posture,ttl,K,P,I,delta,T,Q,node,delay_s_mean,delay_s_std,"
         "covered_runs,txrx_mean,txrx_std";
}

void write_node_csv(std::ostream& out, const ExperimentResult& r) {
  out << node_csv_header() << '\n';
  for (const PointResult& pr : r.points) {
    for (Site s : kAllSites) {
      const Stat& d = pr.stats.node_delay_s[index(s)];
      const Stat& t = pr.stats.node_txrx[index(s)];
      out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.scenario_id,
                         to_string(pr.point.strategy.kind), to_string(pr.point.posture),
                         param_columns(pr.point.strategy), to_string(s), stat_or_blank(d),
                         std_or_blank(d), d.n, num(t.mean), num(t.std));
    }
  }
}

}  // namespace wban
