#ifndef PINT_DETAIL_TASK_GRAPH_HPP
#define PINT_DETAIL_TASK_GRAPH_HPP

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace pint::detail {

/// Static dependency graph executed by a fixed pool of workers.
///
/// A node becomes ready once all of its predecessors finished; ready nodes run in ascending
/// priority order. Nodes tagged above the cutoff are dropped instead of run, which lets the
/// caller discard speculative work once an earlier stage decides to stop. The first exception
/// thrown by a node aborts the remaining graph and is rethrown from run().
class TaskGraph
{
public:
  using NodeId = std::size_t;
  using Priority = std::array<std::size_t, 3>;

  NodeId add(std::function<void()> fn, Priority priority, std::size_t tag)
  {
    nodes_.push_back(Node{std::move(fn), priority, tag, 0, {}});
    return nodes_.size() - 1;
  }

  void depends(NodeId node, NodeId on)
  {
    nodes_[on].dependents.push_back(node);
    ++nodes_[node].pending;
  }

  /// Nodes with tag > cutoff that have not started yet will not run.
  void set_cutoff(std::size_t tag)
  {
    std::size_t cur = cutoff_.load();
    while (tag < cur && !cutoff_.compare_exchange_weak(cur, tag)) {
    }
  }

  void run(std::size_t workers)
  {
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      if (nodes_[id].pending == 0) {
        ready_.push(Entry{nodes_[id].priority, id});
      }
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([this] { work(); });
    }
    pool.clear(); // joins
    if (error_) {
      std::rethrow_exception(error_);
    }
  }

private:
  struct Node
  {
    std::function<void()> fn;
    Priority priority;
    std::size_t tag;
    std::size_t pending;
    std::vector<NodeId> dependents;
  };

  struct Entry
  {
    Priority priority;
    NodeId id;
    bool operator>(const Entry& o) const { return priority > o.priority || (priority == o.priority && id > o.id); }
  };

  void work()
  {
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait(lock, [this] { return !ready_.empty() || running_ == 0; });
      if (ready_.empty()) {
        cv_.notify_all();
        return;
      }
      const NodeId id = ready_.top().id;
      ready_.pop();
      Node& node = nodes_[id];
      if (aborted_ || node.tag > cutoff_.load()) {
        continue;
      }
      ++running_;
      lock.unlock();
      std::exception_ptr failure;
      try {
        node.fn();
      } catch (...) {
        failure = std::current_exception();
      }
      lock.lock();
      --running_;
      if (failure) {
        if (!error_) {
          error_ = failure;
        }
        aborted_ = true;
      } else {
        for (NodeId d : node.dependents) {
          if (--nodes_[d].pending == 0) {
            ready_.push(Entry{nodes_[d].priority, d});
          }
        }
      }
      cv_.notify_all();
    }
  }

  std::vector<Node> nodes_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t running_ = 0;
  bool aborted_ = false;
  std::atomic<std::size_t> cutoff_{std::numeric_limits<std::size_t>::max()};
  std::exception_ptr error_;
};

} // namespace pint::detail

#endif // PINT_DETAIL_TASK_GRAPH_HPP
