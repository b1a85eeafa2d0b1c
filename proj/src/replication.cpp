// SPDX-License-Identifier: Apache-2.0
#include "medsim/replication.hpp"

#include <algorithm>
#include <stdexcept>

namespace medsim::repl {

bool InMemoryTransport::store(const SignalKey& key,
                              const SignalSample& sample) {
  auto id = remote_.find(key);
  if (!id) return true;  // unknown at the remote: nothing to merge, not a fault
  remote_.merge(*id, sample);
  return true;
}

std::optional<SignalSample> InMemoryTransport::fetch(const SignalKey& key) {
  auto id = remote_.find(key);
  if (!id) return std::nullopt;
  return remote_.read(*id);
}

void LagTracker::note_write(const SignalKey& key, int64_t timestamp_ms,
                            int64_t cycle,
                            std::vector<std::string> subscribers) {
  Pending p;
  p.timestamp_ms = timestamp_ms;
  p.write_cycle = cycle;
  p.subscribers = std::move(subscribers);
  pending_[key].push_back(std::move(p));
}

void LagTracker::observe(const std::string& node_id,
                         const SignalRegistry& replica, int64_t cycle) {
  for (auto& [key, writes] : pending_) {
    auto id = replica.find(key);
    if (!id) continue;
    auto sample = replica.read(*id);
    if (!sample) continue;
    for (auto& w : writes) {
      if (std::find(w.subscribers.begin(), w.subscribers.end(), node_id) ==
          w.subscribers.end()) {
        continue;
      }
      // A write is visible once the replica carries a sample at least as new.
      if (sample->timestamp_ms >= w.timestamp_ms && !w.seen_at.count(node_id)) {
        w.seen_at[node_id] = cycle;
        auto lag = cycle - w.write_cycle;
        auto it = max_lag_.find(key);
        if (it == max_lag_.end() || it->second < lag) max_lag_[key] = lag;
      }
    }
  }
}

std::map<SignalKey, int64_t> LagTracker::max_lag_cycles() const {
  return max_lag_;
}

int64_t LagTracker::overall_max_cycles() const {
  int64_t m = 0;
  for (const auto& [k, v] : max_lag_) m = std::max(m, v);
  return m;
}

bool LagTracker::fully_visible() const {
  for (const auto& [key, writes] : pending_) {
    for (const auto& w : writes) {
      for (const auto& sub : w.subscribers) {
        if (!w.seen_at.count(sub)) return false;
      }
    }
  }
  return true;
}

ReplicationLink::ReplicationLink(Direction dir, const LinkConfig& cfg)
    : dir_(dir), cfg_(cfg), rng_(cfg.seed) {
  if (cfg_.period_ms <= 0) throw std::invalid_argument("link period must be > 0");
  if (!(cfg_.drop_probability >= 0.0 && cfg_.drop_probability < 1.0)) {
    throw std::invalid_argument("drop_probability must be in [0, 1)");
  }
  if (cfg_.latency_ms < 0 || cfg_.jitter_ms < 0) {
    throw std::invalid_argument("latency/jitter must be >= 0");
  }
}

int64_t ReplicationLink::delay_cycles() {
  int64_t total = cfg_.latency_ms;
  if (cfg_.jitter_ms > 0) total += rng_.uniform_int(0, cfg_.jitter_ms);
  // Delivery lands on a cycle boundary.
  return (total + cfg_.period_ms - 1) / cfg_.period_ms;
}

int ReplicationLink::deliver_due_to_cloud(SignalTransport& cloud,
                                          int64_t cycle) {
  int delivered = 0;
  std::vector<InFlight> keep;
  for (auto& f : in_flight_) {
    if (f.due_cycle > cycle) {
      keep.push_back(std::move(f));
    } else if (cloud.store(f.key, f.sample)) {
      ++delivered;
    } else {
      // Remote unreachable: keep it queued, retry next cycle.
      f.due_cycle = cycle + 1;
      keep.push_back(std::move(f));
    }
  }
  in_flight_ = std::move(keep);
  return delivered;
}

int ReplicationLink::deliver_due_to_local(NodeStore& local, int64_t cycle) {
  int delivered = 0;
  std::vector<InFlight> keep;
  for (auto& f : in_flight_) {
    if (f.due_cycle > cycle) {
      keep.push_back(std::move(f));
      continue;
    }
    if (auto id = local.registry.find(f.key)) {
      local.registry.merge(*id, f.sample);
      ++delivered;
    }
  }
  in_flight_ = std::move(keep);
  return delivered;
}

int ReplicationLink::push_cycle(NodeStore& local, SignalTransport& cloud,
                                int64_t cycle) {
  if (dir_ != Direction::LocalToCloud) {
    throw std::logic_error("push_cycle on a cloud-to-local link");
  }
  int transferred = deliver_due_to_cloud(cloud, cycle);

  // Offer every locally captured sample newer than its push cursor. The
  // cursor advances only when the sample is accepted for delivery, so a
  // dropped key is offered again next cycle.
  const auto& reg = local.registry;
  for (uint32_t i = 0; i < reg.size(); ++i) {
    signals::SignalId id{i};
    auto sample = reg.read(id);
    if (!sample || sample->origin != local.node_id) continue;
    auto key = reg.key(id);
    auto it = local.push_cursor.find(key);
    if (it != local.push_cursor.end() && sample->timestamp_ms <= it->second) {
      continue;
    }
    if (rng_.bernoulli(cfg_.drop_probability)) continue;  // lost this cycle
    local.push_cursor[key] = sample->timestamp_ms;
    int64_t delay = delay_cycles();
    if (delay == 0) {
      if (cloud.store(key, *sample)) {
        ++transferred;
      } else {
        // Accepted for delivery but the remote is down: queue and retry.
        in_flight_.push_back({key, *sample, cycle + 1});
      }
    } else {
      in_flight_.push_back({std::move(key), *sample, cycle + delay});
    }
  }
  return transferred;
}

int ReplicationLink::pull_cycle(SignalTransport& cloud, NodeStore& local,
                                const std::vector<SignalKey>& subscriptions,
                                int64_t cycle) {
  if (dir_ != Direction::CloudToLocal) {
    throw std::logic_error("pull_cycle on a local-to-cloud link");
  }
  int transferred = deliver_due_to_local(local, cycle);

  for (const auto& key : subscriptions) {
    if (!local.registry.find(key)) {
      throw std::out_of_range("subscription to unknown signal " + key.str());
    }
    auto sample = cloud.fetch(key);
    if (!sample) continue;
    auto it = pull_cursor_.find(key);
    if (it != pull_cursor_.end() && sample->timestamp_ms <= it->second) {
      continue;  // this version is already delivered or in flight
    }
    if (rng_.bernoulli(cfg_.drop_probability)) continue;
    pull_cursor_[key] = sample->timestamp_ms;
    int64_t delay = delay_cycles();
    if (delay == 0) {
      auto id = local.registry.find(key);
      local.registry.merge(*id, *sample);
      ++transferred;
    } else {
      in_flight_.push_back({key, *sample, cycle + delay});
    }
  }
  return transferred;
}

}  // namespace medsim::repl
