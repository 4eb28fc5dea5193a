#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "domino/core.hpp"
#include "domino/metrics.hpp"
#include "domino/model.hpp"
#include "domino/penalty.hpp"
#include "domino/phantom.hpp"

namespace domino {

inline constexpr double kDefaultBeta = 0.5;

struct HierarchyConfig {
  HierarchySpec spec;
  double max_penalty = kDefaultPenaltyScale;
  double within_penalty = kDefaultWithinGroupPenalty;
};

/// Everything a run needs, read from one JSON file. The class list is the
/// single source of class identity; every other section refers to classes
/// by name.
struct RunConfig {
  ClassSet classes;
  PhantomConfig phantom;
  TrainConfig train;
  std::optional<HierarchyConfig> hierarchy;
  std::optional<GroupMap> group_map;
  EvalOptions eval;

  void validate() const;
};

/// 11 head tissues, concentric head phantom, hierarchy and 6-way grouping.
RunConfig default_head_config();

// Sections and keys missing from the file keep their defaults; unknown keys
// are rejected with a Config error naming the key. Overriding "classes"
// requires the class-dependent sections to be given as well.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_json(const RunConfig& cfg);

}  // namespace domino
