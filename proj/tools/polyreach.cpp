#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyreach/io.hpp"
#include "selftest.hpp"

using namespace polyreach;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kParse = 3, kIo = 4, kEngine = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
      return kParse;
    case ErrorKind::Io:
      return kIo;
    default:
      return kEngine;
  }
}

void error_record(const std::string& command, const Error& e) {
  const Json j{{"error", std::string(to_string(e.kind()))}, {"command", command}, {"message", e.what()}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Variable name or zero-based index.
std::size_t resolve_axis(const std::string& token, const std::vector<std::string>& variables, std::size_t dim) {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == token) return i;
  }
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(token, &pos);
    if (pos == token.size() && v < dim) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::InvalidInput, "unknown axis '" + token + "'");
}

std::array<std::size_t, 2> resolve_axes(const std::string& text, const std::vector<std::string>& variables,
                                        std::size_t dim) {
  const auto parts = split(text, ',');
  require(parts.size() == 2, ErrorKind::InvalidInput, "--axes expects two comma-separated axes");
  const std::size_t a = resolve_axis(parts[0], variables, dim);
  const std::size_t b = resolve_axis(parts[1], variables, dim);
  require(a != b, ErrorKind::InvalidInput, "--axes needs two distinct axes");
  return {a, b};
}

void apply_template_flag(Model& m, const std::string& flag) {
  if (flag.empty()) return;
  if (flag == "box" || flag == "octagon") {
    m.template_kind = flag;
    return;
  }
  Json j;
  try {
    j = Json::parse(read_file(flag));
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Parse, flag + ": " + e.what());
  }
  if (!j.contains("rows")) fail(ErrorKind::Parse, flag + ": template file needs a 'rows' key");
  Matrix rows;
  for (const auto& r : j["rows"]) {
    if (!r.is_array() || r.size() != m.dim()) fail(ErrorKind::Parse, flag + ": template row width differs from model");
    rows.push_back(r.get<std::vector<double>>());
  }
  m.template_kind = "custom";
  m.custom_template = std::move(rows);
}

ReachTrace run_model(const Model& m, StrategyKind kind, std::size_t steps) {
  const ReachStrategy strategy = m.strategy(kind);
  if (m.hybrid) return hybrid_reach(*m.hybrid, strategy, steps);
  return forward_reach(*m.system, *m.initial, strategy, steps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachable-set over-approximation for parametric polynomial systems"};
  app.require_subcommand(1);

  std::string model_path, out_path, strategy_name = "multiaffine", template_flag, trace_path, axes_text, split_text;
  std::size_t steps = 0;
  bool steps_given = false;
  std::size_t first = 0;
  double tol = 1e-6;
  std::uint64_t seed = 20240601;
  std::vector<std::string> fixes;

  auto* run = app.add_subcommand("run", "compute a reach trace");
  run->add_option("--model", model_path, "model file")->required();
  run->add_option("--strategy", strategy_name, "bernstein | multiaffine")
      ->check(CLI::IsMember({"bernstein", "multiaffine"}));
  run->add_option("--steps", steps, "number of steps (default from the model)")->each([&](const std::string&) {
    steps_given = true;
  });
  run->add_option("--template", template_flag, "box | octagon | path to a JSON file with 'rows'");
  run->add_option("--out", out_path, "trace file (line-delimited JSON)")->required();

  auto* project = app.add_subcommand("project", "2-D projection of a trace as CSV");
  project->add_option("--trace", trace_path, "trace file")->required();
  project->add_option("--axes", axes_text, "two axes, by name or index, e.g. Y1,Y2")->required();
  project->add_option("--first", first, "only the first N steps");
  project->add_option("--out", out_path, "CSV file")->required();

  auto* compare = app.add_subcommand("compare", "run both strategies and compare bounding boxes");
  compare->add_option("--model", model_path, "model file")->required();
  compare->add_option("--steps", steps, "number of steps")->default_val(150);
  compare->add_option("--template", template_flag, "template for the Bernstein run");
  compare->add_option("--tol", tol, "containment inflation")->default_val(1e-6);
  compare->add_option("--out", out_path, "per-step CSV report");

  auto* selftest = app.add_subcommand("selftest", "worked example and small property checks");
  selftest->add_option("--seed", seed, "sampling seed");

  auto* params = app.add_subcommand("params", "backward analysis and parameter region of a hybrid model");
  params->add_option("--model", model_path, "hybrid model file")->required();
  params->add_option("--steps", steps, "backward steps (default from the model)")->each([&](const std::string&) {
    steps_given = true;
  });
  params->add_option("--fix", fixes, "hyperplane axis=value, repeatable (default from the model)");
  params->add_option("--axes", axes_text, "projection axes (default from the model)");
  params->add_option("--split", split_text, "cells per axis, e.g. 20x10 (default from the model)");
  params->add_option("--strategy", strategy_name, "bernstein | multiaffine")
      ->check(CLI::IsMember({"bernstein", "multiaffine"}));
  params->add_option("--out", out_path, "region CSV")->required();

  std::string builtin;
  BeesConfig bees_cfg;
  CardiacConfig cardiac_cfg;
  std::vector<double> beta2;
  std::string z2 = "conserving";
  bool no_invariant = false;
  std::string name;
  auto* export_model = app.add_subcommand("export-model", "write a bundled model file");
  export_model->add_option("--builtin", builtin, "bees | cardiac")->required()->check(CLI::IsMember({"bees", "cardiac"}));
  export_model->add_option("--name", name, "model name");
  export_model->add_option("--alpha", bees_cfg.alpha, "bees: alpha");
  export_model->add_option("--beta2", beta2, "bees: beta2 * N interval")->expected(2)->delimiter(',');
  export_model->add_option("--gamma", bees_cfg.gamma, "bees: gamma");
  export_model->add_option("--delta", bees_cfg.delta, "bees: delta");
  export_model->add_option("--bees-steps", bees_cfg.steps, "bees: default steps");
  export_model->add_option("--z2", z2, "bees: conserving | printed")->check(CLI::IsMember({"conserving", "printed"}));
  export_model->add_flag("--no-invariant", no_invariant, "bees: omit the population invariant");
  export_model->add_option("--step-size", cardiac_cfg.h, "cardiac: Euler step");
  export_model->add_option("--out", out_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "selftest") return cli::run_selftest(seed);

    if (command == "run") {
      Model m = load_model(model_path);
      apply_template_flag(m, template_flag);
      const StrategyKind kind = parse_strategy(strategy_name);
      const std::size_t n = steps_given ? steps : m.steps;
      const auto t0 = std::chrono::steady_clock::now();
      const ReachTrace trace = run_model(m, kind, n);
      TraceMeta meta{m.name, strategy_name, elapsed_ms(t0), m.variables,
                     Json{{"steps", n}, {"template", m.template_kind}, {"model_file", model_path}}};
      write_file(out_path, trace_to_ndjson(trace, meta));
      std::printf("wrote %zu records to %s (%.1f ms)\n", trace.entries.size(), out_path.c_str(), meta.wall_time_ms);
      if (m.consensus && !m.hybrid) {
        const ConsensusVerdict v = consensus_metric(trace, *m.consensus);
        std::printf("verdict %s final_gap %.6g gap_trend %.6g\n", std::string(to_string(v.kind)).c_str(), v.final_gap,
                    v.gap_trend);
      }
      return kOk;
    }

    if (command == "project") {
      TraceMeta meta;
      const ReachTrace trace = trace_from_ndjson(read_file(trace_path), &meta);
      const auto axes = resolve_axes(axes_text, meta.variables, trace.dim);
      const std::optional<std::size_t> limit = first > 0 ? std::optional<std::size_t>(first) : std::nullopt;
      write_file(out_path, projection_csv(trace, axes[0], axes[1], limit));
      return kOk;
    }

    if (command == "compare") {
      Model m = load_model(model_path);
      apply_template_flag(m, template_flag);
      require(!m.hybrid, ErrorKind::InvalidInput, "compare needs a single-location model");
      const auto t0 = std::chrono::steady_clock::now();
      const ReachTrace ma = run_model(m, StrategyKind::MultiAffine, steps);
      const double ma_ms = elapsed_ms(t0);
      const auto t1 = std::chrono::steady_clock::now();
      const ReachTrace bs = run_model(m, StrategyKind::Bernstein, steps);
      const double bs_ms = elapsed_ms(t1);

      std::string csv = "step,multiaffine_volume,bernstein_volume,max_excess\n";
      std::size_t bad_steps = 0;
      double worst = 0.0;
      for (std::size_t k = 0; k < ma.entries.size(); ++k) {
        const Box a = set_bounding_box(ma.entries[k].set);
        const Box b = set_bounding_box(bs.entries[k].set);
        double excess = 0.0;
        for (std::size_t i = 0; i < a.dim(); ++i) {
          excess = std::max({excess, a.lower[i] - b.lower[i], b.upper[i] - a.upper[i]});
        }
        worst = std::max(worst, excess);
        if (excess > tol) ++bad_steps;
        csv += std::to_string(k) + "," + format_double(a.volume()) + "," + format_double(b.volume()) + "," +
               format_double(excess) + "\n";
      }
      if (!out_path.empty()) write_file(out_path, csv);
      std::printf("multiaffine %.1f ms, bernstein %.1f ms, ratio %.2f\n", ma_ms, bs_ms, ma_ms > 0 ? bs_ms / ma_ms : 0.0);
      std::printf("containment (tol %.3g): %s, %zu of %zu steps violate, max excess %.6g\n", tol,
                  bad_steps == 0 ? "holds" : "VIOLATED", bad_steps, ma.entries.size(), worst);
      return bad_steps == 0 ? kOk : kCheckFailed;
    }

    if (command == "params") {
      Model m = load_model(model_path);
      require(m.hybrid.has_value() && m.has_unsafe, ErrorKind::InvalidInput,
              "params needs a model with 'hybrid' and 'hybrid.unsafe' sections");
      RegionSpec reg = m.region.value_or(RegionSpec{});
      if (!fixes.empty()) {
        reg.fixes.clear();
        for (const auto& f : fixes) {
          const auto kv = split(f, '=');
          require(kv.size() == 2, ErrorKind::InvalidInput, "--fix expects axis=value");
          reg.fixes.emplace_back(kv[0], std::stod(kv[1]));
        }
      }
      RegionQuery q;
      if (!axes_text.empty()) {
        const auto ax = resolve_axes(axes_text, m.variables, m.dim());
        reg.axes = {m.variables[ax[0]], m.variables[ax[1]]};
      }
      require(!reg.axes[0].empty(), ErrorKind::InvalidInput, "no projection axes (give --axes)");
      q.axis_a = m.axis(reg.axes[0]);
      q.axis_b = m.axis(reg.axes[1]);
      for (const auto& [axis, value] : reg.fixes) q.fixes.push_back({m.axis(axis), value});
      q.locations = reg.locations;
      if (!split_text.empty()) {
        const auto parts = split(split_text, 'x');
        require(parts.size() == 2, ErrorKind::InvalidInput, "--split expects AxB");
        reg.split = {std::stoul(parts[0]), std::stoul(parts[1])};
      }
      const std::size_t n = steps_given ? steps : m.steps;
      const auto t0 = std::chrono::steady_clock::now();
      const RegionRun r = param_region(*m.hybrid, q, reg.split[0], reg.split[1], m.strategy(parse_strategy(strategy_name)), n);
      write_file(out_path, region_csv(r.boxes, reg.axes));
      std::printf("wrote %zu boxes from %zu cells to %s (%.1f ms)\n", r.boxes.size(), r.cells, out_path.c_str(),
                  elapsed_ms(t0));
      return kOk;
    }

    if (command == "export-model") {
      Model m;
      if (builtin == "bees") {
        if (!beta2.empty()) {
          bees_cfg.beta2_lo = beta2[0];
          bees_cfg.beta2_hi = beta2[1];
        }
        bees_cfg.z2_form = z2 == "printed" ? Z2Form::AsPrinted : Z2Form::Conserving;
        bees_cfg.conservation_invariant = !no_invariant && bees_cfg.z2_form == Z2Form::Conserving;
        m = bees_model(bees_cfg, name.empty() ? "bees" : name);
      } else {
        m = cardiac_model(cardiac_cfg, name.empty() ? "cardiac" : name);
      }
      write_file(out_path, model_to_json(m).dump(1) + "\n");
      return kOk;
    }
  } catch (const Error& e) {
    error_record(command, e);
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    error_record(command, Error(ErrorKind::InvalidInput, e.what()));
    return kEngine;
  }
  return kUsage;
}
