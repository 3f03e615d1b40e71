// Copyright 2026 The shuffledp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHUFFLEDP_PARALLEL_H_
#define SHUFFLEDP_PARALLEL_H_

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace shuffledp {

// Runs fn(shard) for shard in [0, num_shards) on up to num_threads threads.
// The shard decomposition is fixed by the caller, so results combined in
// shard order do not depend on the thread count.
inline void ParallelShards(int num_shards, int num_threads,
                           const std::function<void(int)>& fn) {
  if (num_threads < 1) num_threads = 1;
  if (num_threads == 1 || num_shards <= 1) {
    for (int s = 0; s < num_shards; ++s) fn(s);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= num_shards) return;
      fn(s);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(num_threads, num_shards);
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// Compensated (Kahan) accumulator; reduces order sensitivity inside a shard.
class KahanSum {
 public:
  void Add(double x) {
    const double y = x - c_;
    const double t = sum_ + y;
    c_ = (t - sum_) - y;
    sum_ = t;
  }
  double Value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

}  // namespace shuffledp

#endif  // SHUFFLEDP_PARALLEL_H_
