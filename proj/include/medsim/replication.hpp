// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "medsim/rng.hpp"
#include "medsim/signals.hpp"

namespace medsim::repl {

using signals::SignalKey;
using signals::SignalRegistry;
using signals::SignalSample;

// Cycle-based link model: transfers happen at replication cycle boundaries.
// Loss is an independent per-key Bernoulli draw, latency (plus uniform
// jitter) delays delivery to a later cycle. drop_probability must stay
// below 1 or the link loses liveness.
struct LinkConfig {
  int64_t period_ms = 500;
  int64_t latency_ms = 0;
  int64_t jitter_ms = 0;
  double drop_probability = 0.0;
  uint64_t seed = 0;
};

// Far-end store as seen by a link. Two bindings exist: direct in-memory for
// single-process runs and the REST wire for multi-process runs; the link
// logic is identical over both.
class SignalTransport {
 public:
  virtual ~SignalTransport() = default;
  // Merge a sample into the remote store (last-write-wins applies there).
  // False means the remote was unreachable; the caller retries next cycle.
  virtual bool store(const SignalKey& key, const SignalSample& sample) = 0;
  // Latest remote sample, nullopt when absent or unreachable.
  virtual std::optional<SignalSample> fetch(const SignalKey& key) = 0;
};

class InMemoryTransport : public SignalTransport {
 public:
  explicit InMemoryTransport(SignalRegistry& remote) : remote_(remote) {}
  bool store(const SignalKey& key, const SignalSample& sample) override;
  std::optional<SignalSample> fetch(const SignalKey& key) override;

 private:
  SignalRegistry& remote_;
};

// One node's replica of the signal space plus its push bookkeeping.
struct NodeStore {
  std::string node_id;
  SignalRegistry registry;
  // Per-key timestamp of the newest sample already accepted for delivery.
  // Never ahead of the corresponding registry timestamp.
  std::unordered_map<SignalKey, int64_t> push_cursor;
};

// Records writes and observed deliveries so tests and metrics can bound the
// write-to-visibility lag in replication cycles.
class LagTracker {
 public:
  void note_write(const SignalKey& key, int64_t timestamp_ms, int64_t cycle,
                  std::vector<std::string> subscribers);
  // Scan a subscriber's replica: any pending write whose timestamp is
  // covered by the replica counts as visible at `cycle`.
  void observe(const std::string& node_id, const SignalRegistry& replica,
               int64_t cycle);
  std::map<SignalKey, int64_t> max_lag_cycles() const;
  int64_t overall_max_cycles() const;
  // True once every noted write has reached all of its subscribers.
  bool fully_visible() const;

 private:
  struct Pending {
    int64_t timestamp_ms;
    int64_t write_cycle;
    std::vector<std::string> subscribers;
    std::map<std::string, int64_t> seen_at;  // subscriber -> cycle
  };
  std::map<SignalKey, std::vector<Pending>> pending_;
  std::map<SignalKey, int64_t> max_lag_;
};

// One direction of a replicated connection. push_cycle mirrors fresh local
// samples into the cloud store; pull_cycle merges newer cloud samples for
// the subscribed keys into the local replica. Drops are normal operation
// and simply retried on the next cycle.
class ReplicationLink {
 public:
  enum class Direction { LocalToCloud, CloudToLocal };

  ReplicationLink(Direction dir, const LinkConfig& cfg);

  int push_cycle(NodeStore& local, SignalTransport& cloud, int64_t cycle);
  int pull_cycle(SignalTransport& cloud, NodeStore& local,
                 const std::vector<SignalKey>& subscriptions, int64_t cycle);

  const LinkConfig& config() const { return cfg_; }

 private:
  struct InFlight {
    SignalKey key;
    SignalSample sample;
    int64_t due_cycle;
  };

  int64_t delay_cycles();
  int deliver_due_to_cloud(SignalTransport& cloud, int64_t cycle);
  int deliver_due_to_local(NodeStore& local, int64_t cycle);

  Direction dir_;
  LinkConfig cfg_;
  Rng rng_;
  std::vector<InFlight> in_flight_;
  std::unordered_map<SignalKey, int64_t> pull_cursor_;
};

// A node's attachment to the cloud: paired up/down links over one transport.
class ReplicaPort {
 public:
  ReplicaPort(NodeStore& store, SignalTransport& cloud,
              std::vector<SignalKey> subscriptions, const LinkConfig& up,
              const LinkConfig& down)
      : store_(&store),
        cloud_(&cloud),
        subscriptions_(std::move(subscriptions)),
        up_(ReplicationLink::Direction::LocalToCloud, up),
        down_(ReplicationLink::Direction::CloudToLocal, down) {}

  int push(int64_t cycle) { return up_.push_cycle(*store_, *cloud_, cycle); }
  int pull(int64_t cycle) {
    return down_.pull_cycle(*cloud_, *store_, subscriptions_, cycle);
  }
  NodeStore& store() { return *store_; }
  const std::vector<SignalKey>& subscriptions() const { return subscriptions_; }

 private:
  NodeStore* store_;
  SignalTransport* cloud_;
  std::vector<SignalKey> subscriptions_;
  ReplicationLink up_;
  ReplicationLink down_;
};

}  // namespace medsim::repl
