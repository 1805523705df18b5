// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace srmnet {

// Fixed-size worker pool used by the kernels. Callers partition work so that
// every output element is produced by exactly one task with a fixed
// accumulation order, which keeps results identical for any thread count.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t threads = 1) { resize(threads); }
  ~ThreadPool() { stop(); }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  std::size_t size() const { return workers_.size() + 1; }

  void resize(std::size_t threads) {
    stop();
    threads = std::max<std::size_t>(threads, 1);
    std::lock_guard lock(mutex_);
    shutdown_ = false;
    for (std::size_t i = 0; i + 1 < threads; ++i) {
      workers_.emplace_back([this, i] { worker_loop(i + 1); });
    }
  }

  // Runs task(index) for index in [0, count). The calling thread takes part.
  void run(std::size_t count, const std::function<void(std::size_t)>& task) {
    if (count == 0) return;
    if (workers_.empty() || count == 1) {
      for (std::size_t i = 0; i < count; ++i) task(i);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      task_ = &task;
      next_ = 0;
      count_ = count;
      pending_ = count;
      ++generation_;
    }
    wake_.notify_all();
    drain();
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
  }

 private:
  void drain() {
    for (;;) {
      std::size_t index;
      const std::function<void(std::size_t)>* task;
      {
        std::lock_guard lock(mutex_);
        if (task_ == nullptr || next_ >= count_) return;
        index = next_++;
        task = task_;
      }
      (*task)(index);
      std::lock_guard lock(mutex_);
      if (--pending_ == 0) done_.notify_all();
    }
  }

  void worker_loop(std::size_t) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return shutdown_ || generation_ != seen; });
        if (shutdown_) return;
        seen = generation_;
      }
      drain();
    }
  }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      shutdown_ = true;
    }
    wake_.notify_all();
    for (auto& worker : workers_) worker.join();
    workers_.clear();
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool shutdown_ = false;
};

inline ThreadPool& thread_pool() {
  static ThreadPool pool(1);
  return pool;
}

inline void set_num_threads(std::size_t threads) { thread_pool().resize(threads); }
inline std::size_t num_threads() { return thread_pool().size(); }

// Splits [0, count) into contiguous chunks whose boundaries are multiples of
// `grain`, then calls body(begin, end) for each chunk.
template <typename Body>
void parallel_for(std::size_t count, std::size_t grain, Body&& body) {
  if (count == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t units = (count + grain - 1) / grain;
  const std::size_t tasks = std::min(units, num_threads());
  if (tasks <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  const std::size_t per_task = (units + tasks - 1) / tasks;
  thread_pool().run(tasks, [&](std::size_t t) {
    const std::size_t begin = std::min(count, t * per_task * grain);
    const std::size_t end = std::min(count, (t + 1) * per_task * grain);
    if (begin < end) body(begin, end);
  });
}

}  // namespace srmnet
