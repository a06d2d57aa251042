#pragma once

#include <algorithm>
#include <any>
#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctree/errors.hpp"

namespace ctree::dist {

enum class Phase {
  local_tree,
  fan_in,
  fan_out,
  pre_augmentation_hypersweep,
  augmentation,
  post_augmentation_hypersweep,
  branch_decomposition,
  top_branch_selection,
  other,
};

inline constexpr std::array<Phase, 9> kPhases{
    Phase::local_tree,   Phase::fan_in,
    Phase::fan_out,      Phase::pre_augmentation_hypersweep,
    Phase::augmentation, Phase::post_augmentation_hypersweep,
    Phase::branch_decomposition, Phase::top_branch_selection,
    Phase::other,
};

inline std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::local_tree: return "local_tree";
    case Phase::fan_in: return "fan_in";
    case Phase::fan_out: return "fan_out";
    case Phase::pre_augmentation_hypersweep: return "pre_augmentation_hypersweep";
    case Phase::augmentation: return "augmentation";
    case Phase::post_augmentation_hypersweep: return "post_augmentation_hypersweep";
    case Phase::branch_decomposition: return "branch_decomposition";
    case Phase::top_branch_selection: return "top_branch_selection";
    case Phase::other: return "other";
  }
  return "other";
}

/// Reliable, per-channel FIFO mailboxes between simulated ranks. Safe for
/// concurrent senders and receivers.
class Transport {
 public:
  explicit Transport(int ranks) : ranks_(ranks) {}

  int ranks() const { return ranks_; }

  void send(int from, int to, std::any message) {
    check(from);
    check(to);
    std::lock_guard lock(mutex_);
    channels_[{from, to}].push_back(std::move(message));
    ++sent_;
  }

  template <class T>
  T receive(int to, int from) {
    check(from);
    check(to);
    std::lock_guard lock(mutex_);
    auto it = channels_.find({from, to});
    if (it == channels_.end() || it->second.empty()) {
      throw InternalError("no message from rank " + std::to_string(from) + " to rank " + std::to_string(to));
    }
    std::any msg = std::move(it->second.front());
    it->second.pop_front();
    T* value = std::any_cast<T>(&msg);
    if (!value) throw InternalError("unexpected message type on channel");
    return std::move(*value);
  }

  bool pending(int to, int from) const {
    std::lock_guard lock(mutex_);
    auto it = channels_.find({from, to});
    return it != channels_.end() && !it->second.empty();
  }

  /// Messages sent so far.
  std::int64_t sent() const {
    std::lock_guard lock(mutex_);
    return sent_;
  }

 private:
  void check(int r) const {
    if (r < 0 || r >= ranks_) throw InternalError("rank " + std::to_string(r) + " out of range");
  }

  int ranks_;
  mutable std::mutex mutex_;
  std::map<std::pair<int, int>, std::deque<std::any>> channels_;
  std::int64_t sent_ = 0;
};

struct CommCounts {
  std::int64_t attachment_points_recv = 0;
  std::int64_t bestupdown_recv = 0;
  std::int64_t branchinfo_recv = 0;
};

/// Per-phase, per-rank received-entry counts and wall-clock seconds. Each rank
/// writes only its own slots.
class CommLog {
 public:
  explicit CommLog(int ranks = 1) : ranks_(ranks) {
    for (auto& c : counts_) c.assign(static_cast<std::size_t>(ranks), CommCounts{});
    for (auto& s : seconds_) s.assign(static_cast<std::size_t>(ranks), 0.0);
  }

  int ranks() const { return ranks_; }

  CommCounts& at(Phase p, int rank) { return counts_[index(p)][static_cast<std::size_t>(rank)]; }
  const CommCounts& at(Phase p, int rank) const { return counts_[index(p)][static_cast<std::size_t>(rank)]; }

  void add_time(Phase p, int rank, double seconds) { seconds_[index(p)][static_cast<std::size_t>(rank)] += seconds; }
  double max_time(Phase p) const {
    double m = 0.0;
    for (double s : seconds_[index(p)]) m = std::max(m, s);
    return m;
  }

  CommCounts max(Phase p) const {
    CommCounts m;
    for (const auto& c : counts_[index(p)]) {
      m.attachment_points_recv = std::max(m.attachment_points_recv, c.attachment_points_recv);
      m.bestupdown_recv = std::max(m.bestupdown_recv, c.bestupdown_recv);
      m.branchinfo_recv = std::max(m.branchinfo_recv, c.branchinfo_recv);
    }
    return m;
  }

  /// Per-rank totals over all phases.
  CommCounts total(int rank) const {
    CommCounts t;
    for (const auto& phase : counts_) {
      const auto& c = phase[static_cast<std::size_t>(rank)];
      t.attachment_points_recv += c.attachment_points_recv;
      t.bestupdown_recv += c.bestupdown_recv;
      t.branchinfo_recv += c.branchinfo_recv;
    }
    return t;
  }

  /// Highest per-rank total of each metric.
  CommCounts max_total() const {
    CommCounts m;
    for (int r = 0; r < ranks_; ++r) {
      const auto t = total(r);
      m.attachment_points_recv = std::max(m.attachment_points_recv, t.attachment_points_recv);
      m.bestupdown_recv = std::max(m.bestupdown_recv, t.bestupdown_recv);
      m.branchinfo_recv = std::max(m.branchinfo_recv, t.branchinfo_recv);
    }
    return m;
  }

  nlohmann::ordered_json to_json(bool with_timings) const {
    auto counts_json = [](const CommCounts& c) {
      return nlohmann::ordered_json{{"attachment_points_recv", c.attachment_points_recv},
                                    {"bestupdown_recv", c.bestupdown_recv},
                                    {"branchinfo_recv", c.branchinfo_recv}};
    };
    nlohmann::ordered_json out;
    out["ranks"] = ranks_;
    nlohmann::ordered_json phases = nlohmann::ordered_json::object();
    for (Phase p : kPhases) {
      nlohmann::ordered_json entry;
      nlohmann::ordered_json per_rank = nlohmann::ordered_json::array();
      for (int r = 0; r < ranks_; ++r) per_rank.push_back(counts_json(at(p, r)));
      entry["per_rank"] = std::move(per_rank);
      entry["max"] = counts_json(max(p));
      if (with_timings) entry["seconds_max"] = max_time(p);
      phases[std::string(phase_name(p))] = std::move(entry);
    }
    out["phases"] = std::move(phases);
    out["max_total"] = counts_json(max_total());
    return out;
  }

 private:
  static std::size_t index(Phase p) { return static_cast<std::size_t>(p); }

  int ranks_;
  std::array<std::vector<CommCounts>, kPhases.size()> counts_;
  std::array<std::vector<double>, kPhases.size()> seconds_;
};

/// Runs one step for every rank, either on one thread per rank or in rank
/// order, and returns only after all ranks finish (the barrier). The first
/// failure by rank order is rethrown, tagged with the phase name.
class RankExecutor {
 public:
  RankExecutor(int ranks, bool concurrent, CommLog* log = nullptr)
      : ranks_(ranks), concurrent_(concurrent), log_(log) {}

  int ranks() const { return ranks_; }
  bool concurrent() const { return concurrent_; }

  void run(Phase phase, const std::function<void(int)>& step) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(ranks_));
    auto body = [&](int r) {
      const auto start = std::chrono::steady_clock::now();
      try {
        step(r);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
      if (log_) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        log_->add_time(phase, r, dt.count());
      }
    };
    if (concurrent_ && ranks_ > 1) {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(ranks_));
      for (int r = 0; r < ranks_; ++r) threads.emplace_back(body, r);
      for (auto& t : threads) t.join();
    } else {
      for (int r = 0; r < ranks_; ++r) body(r);
    }
    for (auto& e : errors) {
      if (e) rethrow_tagged(e, phase_name(phase));
    }
  }

 private:
  int ranks_;
  bool concurrent_;
  CommLog* log_;
};

}  // namespace ctree::dist
