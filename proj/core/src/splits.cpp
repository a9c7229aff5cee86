/*
 * Copyright 2026 The Curator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "curator/splits.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "curator/noise_filter.hpp"

namespace curator {

namespace {

// Indices into `sizes` (restricted to `available`) summing to exactly
// `target`, preferring earlier positions. Empty optional when infeasible.
std::optional<std::vector<std::size_t>> exact_subset(const std::vector<std::size_t>& sizes,
                                                     const std::vector<bool>& available,
                                                     std::size_t target) {
  const std::size_t n = sizes.size();
  // reach[i][s]: some subset of positions i..n-1 sums to s.
  std::vector<std::vector<char>> reach(n + 1, std::vector<char>(target + 1, 0));
  reach[n][0] = 1;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t s = 0; s <= target; ++s) {
      reach[i][s] = reach[i + 1][s];
      if (!reach[i][s] && available[i] && sizes[i] <= s) reach[i][s] = reach[i + 1][s - sizes[i]];
    }
  }
  if (!reach[0][target]) return std::nullopt;
  std::vector<std::size_t> picked;
  std::size_t s = target;
  for (std::size_t i = 0; i < n && s > 0; ++i) {
    if (available[i] && sizes[i] <= s && reach[i + 1][s - sizes[i]]) {
      picked.push_back(i);
      s -= sizes[i];
    }
  }
  return picked;
}

}  // namespace

SplitResult make_splits(std::span<const ClipRecord> clips, const SplitConfig& cfg,
                        std::uint64_t seed) {
  // class -> video -> clip count, videos in sorted order
  std::map<std::string, std::map<std::string, std::size_t>> per_class;
  for (const auto& c : clips) ++per_class[c.class_id][c.video_id];

  std::map<std::pair<std::string, std::string>, Split> assignment;
  SplitResult result;
  for (const auto& [cls, video_sizes] : per_class) {
    std::vector<std::string> videos;
    for (const auto& [v, n] : video_sizes) videos.push_back(v);
    std::mt19937_64 rng(derive_seed(seed, fnv1a(cls)));
    std::shuffle(videos.begin(), videos.end(), rng);

    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (const auto& v : videos) {
      sizes.push_back(video_sizes.at(v));
      total += sizes.back();
    }
    std::vector<bool> available(videos.size(), true);
    auto test = exact_subset(sizes, available, cfg.test_per_class);
    if (test) {
      for (auto i : *test) available[i] = false;
    }
    auto val = test ? exact_subset(sizes, available, cfg.val_per_class) : std::nullopt;
    if (!test || !val || total <= cfg.test_per_class + cfg.val_per_class) {
      result.dropped_classes.push_back(cls);
      result.warnings.push_back("class '" + cls + "' cannot provide " +
                                std::to_string(cfg.test_per_class) + " test and " +
                                std::to_string(cfg.val_per_class) +
                                " val clips from disjoint videos (" + std::to_string(total) +
                                " clips); dropped");
      continue;
    }
    for (auto& v : videos) assignment[{cls, v}] = Split::train;
    for (auto i : *test) assignment[{cls, videos[i]}] = Split::test;
    for (auto i : *val) assignment[{cls, videos[i]}] = Split::val;
  }

  for (const auto& c : clips) {
    auto it = assignment.find({c.class_id, c.video_id});
    if (it == assignment.end()) continue;
    auto out = c;
    out.split = it->second;
    result.clips.push_back(std::move(out));
  }
  return result;
}

bool splits_video_disjoint(std::span<const ClipRecord> clips) {
  std::map<std::string, Split> seen;
  for (const auto& c : clips) {
    auto [it, inserted] = seen.emplace(c.video_id, c.split);
    if (!inserted && it->second != c.split) return false;
  }
  return true;
}

}  // namespace curator
