#include "flashcrowd/peersim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flashcrowd {

const char* to_string(Policy policy) {
  return policy == Policy::kMin ? "min" : "random";
}

std::optional<Policy> parse_policy(const std::string& name) {
  if (name == "min" || name == "Min") return Policy::kMin;
  if (name == "random" || name == "Random") return Policy::kRandom;
  return std::nullopt;
}

void SimConfig::validate() const {
  if (n_peers < 1) throw std::invalid_argument("SimConfig: n_peers must be at least 1");
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("SimConfig: rho must be positive and finite");
  }
  if (!(trace_step >= 0.0) || !std::isfinite(trace_step)) {
    throw std::invalid_argument("SimConfig: trace_step must be nonnegative and finite");
  }
  if (!(trace_t_max > 0.0)) {  // rejects NaN and nonpositive; +inf allowed
    throw std::invalid_argument("SimConfig: trace_t_max must be positive");
  }
  if (record_creation_times < 0) {
    throw std::invalid_argument("SimConfig: record_creation_times must be nonnegative");
  }
}

std::int64_t SimState::class_count(std::int64_t length) const {
  for (const auto& e : hist) {
    if (e.length == length) return e.count;
    if (e.length > length) break;
  }
  return 0;
}

void SimState::move_server(std::int64_t length, int delta) {
  auto it = hist.begin();
  while (it != hist.end() && it->length < length) ++it;
  if (it == hist.end() || it->length != length || it->count < 1) {
    throw std::logic_error("move_server: source class is empty");
  }
  std::int64_t target = length + delta;
  if (it->count == 1) {
    it = hist.erase(it);
    if (delta < 0) {
      if (it != hist.begin() && std::prev(it)->length == target) {
        std::prev(it)->count += 1;
        return;
      }
    } else if (it != hist.end() && it->length == target) {
      it->count += 1;
      return;
    }
    hist.insert(it, {target, 1});
    return;
  }
  it->count -= 1;
  if (delta < 0) {
    if (it != hist.begin() && std::prev(it)->length == target) {
      std::prev(it)->count += 1;
    } else {
      hist.insert(it, {target, 1});
    }
  } else {
    auto next = std::next(it);
    if (next != hist.end() && next->length == target) {
      next->count += 1;
    } else {
      hist.insert(next, {target, 1});
    }
  }
}

void check_invariants(const SimState& state, std::int64_t n_peers) {
  if (state.hist.empty()) throw std::logic_error("state: empty histogram");
  std::int64_t attached = 0, server_sum = 0;
  std::int64_t prev_length = -1;
  for (const auto& e : state.hist) {
    if (e.length <= prev_length) throw std::logic_error("state: classes not increasing");
    if (e.length < 0) throw std::logic_error("state: negative class length");
    if (e.count < 1) throw std::logic_error("state: non-positive class count");
    attached += e.length * e.count;
    server_sum += e.count;
    prev_length = e.length;
  }
  if (state.asleep < 0) throw std::logic_error("state: negative asleep count");
  if (state.asleep + attached + state.completed != n_peers) {
    throw std::logic_error("state: peer conservation violated");
  }
  if (state.servers != state.completed + 1) {
    throw std::logic_error("state: servers != completed + 1");
  }
  if (server_sum != state.servers) {
    throw std::logic_error("state: histogram does not sum to server count");
  }
}

std::optional<std::int64_t> nu1_from_counts(const std::vector<std::int64_t>& counts) {
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 1) return static_cast<std::int64_t>(i) + 1;
  }
  return std::nullopt;
}

void Prop1Checker::on_arrival(std::int64_t idle_servers) {
  if (!done_ && idle_servers > 2) ++pending_;
}

void Prop1Checker::on_interval_close(bool is_nu1) {
  if (done_) return;
  if (is_nu1) {
    done_ = true;  // the closing interval is not before nu1; drop its pending
  } else {
    committed_ += pending_;
  }
  pending_ = 0;
}

namespace {

// Weighted pick of a populated class with length >= lo, weight = count,
// total weight `total`. The walk subtracts exact integer weights, so it
// terminates inside the entry list.
std::int64_t pick_class(const std::vector<ClassCount>& hist, std::int64_t lo, double total,
                        Stream& stream) {
  double r = stream.uniform01() * total;
  for (const auto& e : hist) {
    if (e.length < lo) continue;
    double c = static_cast<double>(e.count);
    if (r < c) return e.length;
    r -= c;
  }
  throw std::logic_error("pick_class: walk overran the histogram");
}

}  // namespace

SimResult run_sim(const SimConfig& config) {
  config.validate();
  Stream stream(config.seed);

  SimState st;
  st.asleep = config.n_peers;
  st.hist.assign(1, {0, 1});  // the seed server starts idle

  MilestoneRecord rec;
  IdleTrace trace;
  Prop1Checker prop1;
  const bool min_policy = config.policy == Policy::kMin;
  bool tracing = config.trace_step > 0.0;
  const bool trace_extends = tracing && std::isfinite(config.trace_t_max);
  std::int64_t sample_k = 1;

  bool have_t2 = false;
  double t2_cand = 0.0;
  std::int64_t nu2_cand = 0;

  auto nu3_check = [&] {
    if (!rec.nu3 && static_cast<double>(st.servers) > config.rho * static_cast<double>(st.asleep)) {
      rec.t3 = st.t;
      rec.nu3 = st.servers;
    }
  };
  nu3_check();

  while (true) {
    if (config.run_to_completion) {
      if (st.completed == config.n_peers) break;
    } else {
      bool milestones_done = rec.nu1 && rec.nu3 && rec.nu4;
      bool trace_done = !trace_extends ||
                        static_cast<double>(sample_k) * config.trace_step > config.trace_t_max;
      if (milestones_done && trace_done) break;
      if (st.completed == config.n_peers) break;  // nothing left can happen
    }

    double arrival_rate = config.rho * static_cast<double>(st.asleep);
    std::int64_t busy = st.busy();
    double total = arrival_rate + static_cast<double>(busy);
    double t_next = st.t + stream.exp_sample(total);

    if (tracing) {
      for (;; ++sample_k) {
        double ts = static_cast<double>(sample_k) * config.trace_step;
        if (ts > config.trace_t_max) {
          tracing = false;
          break;
        }
        if (ts > t_next) break;
        trace.push_back({ts, static_cast<double>(st.idle()) / static_cast<double>(st.servers),
                         st.servers, st.asleep});
      }
    }
    st.t = t_next;

    if (stream.uniform01() * total < arrival_rate) {
      // Arrival: wake one peer and route it.
      st.asleep -= 1;
      st.arrivals_in_current_interval += 1;
      std::int64_t l = min_policy ? st.hist.front().length
                                  : pick_class(st.hist, 0, static_cast<double>(st.servers), stream);
      st.move_server(l, +1);
      if (l == 0 && st.idle() == 0) {
        // The idle-server count just returned to 0; the last such instant is t2.
        have_t2 = true;
        t2_cand = st.t;
        nu2_cand = st.completed + 1;
      }
      if (min_policy) prop1.on_arrival(st.idle());
      nu3_check();
    } else {
      // Departure: one busy server finishes its head-of-line peer, which
      // immediately becomes a fresh idle server.
      std::int64_t l = pick_class(st.hist, 1, static_cast<double>(busy), stream);
      st.move_server(l, -1);
      st.completed += 1;
      st.servers += 1;
      if (st.hist.front().length == 0) {
        st.hist.front().count += 1;
      } else {
        st.hist.insert(st.hist.begin(), {0, 1});
      }
      if (static_cast<std::int64_t>(rec.creation_times.size()) < config.record_creation_times) {
        rec.creation_times.push_back(st.t);
      }
      if (!rec.nu4 && l == 1) {
        rec.t4 = st.t;
        rec.nu4 = st.completed;
      }
      bool is_nu1 = false;
      if (!rec.nu1 && st.arrivals_in_current_interval <= 1) {
        rec.nu1 = st.completed;
        rec.t1 = st.t;
        is_nu1 = true;
      }
      if (min_policy) prop1.on_interval_close(is_nu1);
      st.arrivals_in_current_interval = 0;
      nu3_check();
      if (st.completed == config.n_peers) rec.completion_time = st.t;
    }
    if (config.check_state) check_invariants(st, config.n_peers);
  }

  if (st.completed == config.n_peers && have_t2) {
    rec.t2 = t2_cand;
    rec.nu2 = nu2_cand;
  }
  rec.prop1_violations = prop1.violations();
  return SimResult{std::move(rec), std::move(trace)};
}

}  // namespace flashcrowd
