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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curator/corpus.hpp"

namespace curator {

struct SplitConfig {
  std::size_t test_per_class = 50;
  std::size_t val_per_class = 20;
};

struct SplitResult {
  std::vector<ClipRecord> clips;  // input order, split assigned; dropped classes removed
  std::vector<std::string> dropped_classes;
  std::vector<std::string> warnings;
};

/// Assigns whole videos to test, val and train so that each class has exactly
/// test_per_class test clips and val_per_class val clips, with no video in two
/// splits. Videos are visited in a seeded per-class order and an exact
/// subset-sum picks the earliest feasible ones. Classes that cannot meet both
/// counts with at least one train clip left are dropped with a warning.
SplitResult make_splits(std::span<const ClipRecord> clips, const SplitConfig& cfg,
                        std::uint64_t seed);

/// True when no video_id appears in two different splits.
bool splits_video_disjoint(std::span<const ClipRecord> clips);

}  // namespace curator
