#pragma once

// Model files, trace files and projection CSV.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyreach/models.hpp"
#include "polyreach/reach.hpp"

namespace polyreach {

using Json = nlohmann::json;

struct RegionSpec {
  std::vector<std::pair<std::string, double>> fixes;
  std::array<std::string, 2> axes;
  std::vector<std::string> locations;
  std::array<std::size_t, 2> split = {1, 1};
};

struct Model {
  std::string name;
  std::vector<std::string> variables;
  std::vector<std::string> parameters;
  /// "box", "octagon" or "custom".
  std::string template_kind = "box";
  Matrix custom_template;
  std::size_t steps = 0;

  std::optional<DiscreteSystem> system;
  std::optional<ReachSet> initial;

  std::optional<HybridAutomaton> hybrid;
  /// The hybrid section declares unsafe seeds, possibly none.
  bool has_unsafe = false;
  std::optional<RegionSpec> region;

  std::optional<ConsensusOptions> consensus;

  std::size_t dim() const { return variables.size(); }
  std::size_t axis(const std::string& name) const;
  Matrix template_matrix() const;
  ReachStrategy strategy(StrategyKind kind) const;
};

/// Throws Error(Parse) with the offending key in the message.
Model parse_model(const Json& j);
Json model_to_json(const Model& m);
Model load_model(const std::string& path);

Model bees_model(const BeesConfig& cfg, const std::string& name);
Model cardiac_model(const CardiacConfig& cfg, const std::string& name);

Json set_to_json(const ReachSet& s);
ReachSet set_from_json(const Json& j, std::size_t n, const std::string& where);

struct TraceMeta {
  std::string model;
  std::string strategy;
  double wall_time_ms = 0.0;
  std::vector<std::string> variables;
  Json config;
};

/// Metadata line followed by one record per trace entry.
std::string trace_to_ndjson(const ReachTrace& trace, const TraceMeta& meta);
ReachTrace trace_from_ndjson(const std::string& text, TraceMeta* meta = nullptr);

/// Box traces: step,axis1_min,axis1_max,axis2_min,axis2_max. Template traces:
/// step,vertex,axis1,axis2 with one row per polygon vertex. Hybrid traces
/// carry a location column after the step. Only steps below `first` when
/// set.
std::string projection_csv(const ReachTrace& trace, std::size_t a, std::size_t b,
                           std::optional<std::size_t> first = std::nullopt);

std::string region_csv(const std::vector<Box>& boxes, const std::array<std::string, 2>& axes);

/// %.17g
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace polyreach
