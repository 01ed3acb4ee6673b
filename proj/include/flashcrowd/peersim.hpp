#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flashcrowd/rng.hpp"

namespace flashcrowd {

enum class Policy { kMin, kRandom };
const char* to_string(Policy policy);
std::optional<Policy> parse_policy(const std::string& name);

struct SimConfig {
  std::int64_t n_peers = 1;
  double rho = 2.0;
  Policy policy = Policy::kMin;
  SeedSpec seed;
  double trace_step = 0.0;  // 0 = no trace
  // Tracing stops past this horizon; non-finite means the trace simply
  // accompanies the run. Only consulted when trace_step > 0.
  double trace_t_max = std::numeric_limits<double>::infinity();
  bool run_to_completion = true;
  std::int64_t record_creation_times = 0;  // keep the first k server-creation times
  bool check_state = false;                // verify state invariants after every event

  void validate() const;  // throws std::invalid_argument
};

// One entry of the queue-length histogram: `count` servers currently hold
// `length` attached peers (length counts the peer in service).
struct ClassCount {
  std::int64_t length = 0;
  std::int64_t count = 0;

  bool operator==(const ClassCount&) const = default;
};

// Queue-length histogram state, stored sparsely: hist holds the populated
// classes in strictly increasing length order, every count positive. Sparse
// storage matters: late in a run one server can hold a queue of order
// n_peers, and a dense array would make each departure draw walk that many
// slots. Invariants, checked by check_invariants:
//   asleep + sum l*count + completed = n_peers
//   servers = completed + 1
//   sum count = servers
struct SimState {
  double t = 0.0;
  std::int64_t asleep = 0;
  std::vector<ClassCount> hist;
  std::int64_t servers = 1;
  std::int64_t completed = 0;
  std::int64_t arrivals_in_current_interval = 0;

  std::int64_t idle() const {
    return !hist.empty() && hist.front().length == 0 ? hist.front().count : 0;
  }
  std::int64_t busy() const { return servers - idle(); }
  // Count of servers with exactly `length` attached peers.
  std::int64_t class_count(std::int64_t length) const;
  // Moves one server from class `length` to class `length + delta`
  // (delta is +1 or -1), keeping the sparse form normalized.
  void move_server(std::int64_t length, int delta);
};

void check_invariants(const SimState& state, std::int64_t n_peers);  // throws std::logic_error

// Milestones of one run. Interval n is the span between server creations
// n-1 and n (creation 0 = t0). A field is absent when the run was truncated
// before the milestone resolved; t2/nu2 additionally require a run to
// completion, since "last" cannot be confirmed earlier.
struct MilestoneRecord {
  std::optional<double> t1, t2, t3, t4;
  std::optional<std::int64_t> nu1, nu2, nu3, nu4;
  std::optional<double> completion_time;
  std::int64_t prop1_violations = 0;  // always 0 under Random (check is Min-only)
  std::vector<double> creation_times;  // first record_creation_times entries
};

struct IdleTraceSample {
  double t = 0.0;
  double idle_fraction = 0.0;
  std::int64_t servers = 0;
  std::int64_t asleep = 0;
};

// Samples at k*trace_step, k >= 1 (no t=0 sample), each carrying the state
// immediately before the first event at or after the sample time.
using IdleTrace = std::vector<IdleTraceSample>;

struct SimResult {
  MilestoneRecord milestones;
  IdleTrace trace;
};

// Exact event-by-event simulation via competing exponentials: arrivals at
// rate rho*asleep, one unit-rate departure per busy server. An arrival joins
// the least-loaded server (Min) or a uniformly random one (Random); a
// departure promotes the finished peer to a fresh idle server. Runs until
// every download completes, or, when run_to_completion is false, until the
// three milestones confirmable mid-run (1, 3, 4) are set and the trace
// horizon is exhausted. Per event the stream yields: holding time, event
// type, then one routing draw for Random arrivals and for every departure.
SimResult run_sim(const SimConfig& config);

// First index n >= 1 whose per-interval arrival count is <= 1.
std::optional<std::int64_t> nu1_from_counts(const std::vector<std::int64_t>& counts);

// Counts states with more than two idle servers observed at arrival instants
// (the instants strictly inside an interval) in intervals that close before
// the first low-arrival interval. Correct Min dynamics yield 0.
class Prop1Checker {
 public:
  // Post-arrival idle-server count, strictly inside the current interval.
  void on_arrival(std::int64_t idle_servers);
  // A server creation closes the current interval; is_nu1 marks the close
  // that resolves the first low-arrival interval, which stops the count.
  void on_interval_close(bool is_nu1);
  std::int64_t violations() const { return committed_; }

 private:
  std::int64_t pending_ = 0;
  std::int64_t committed_ = 0;
  bool done_ = false;
};

}  // namespace flashcrowd
