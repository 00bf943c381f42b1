// bwset: trace-driven branch working-set characterization toolkit.
//
//   bwset generate <spec.json> [-o dir]     synthesize traces + a run manifest
//   bwset characterize <manifest.json>      run the full pipeline
//   bwset report <dir>                      rebuild reports from per-trace rows
//   bwset paper-sweep <outdir> [--seed N]   bundled preset: standard synthetic
//                                           corpus + full config sweep
//
// Exit codes: 0 success, 1 partial failure (some traces failed), 2 invalid input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bwset/manifest.hpp"
#include "bwset/pipeline.hpp"
#include "bwset/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_generate(const std::string& spec_path, const std::string& out_dir) {
  auto specs = bwset::parse_synthetic_spec_file(spec_path);
  fs::path dir = out_dir;
  fs::create_directories(dir / "traces");

  nlohmann::json manifest;
  manifest["traces"] = nlohmann::json::array();
  for (const auto& spec : specs) {
    auto records = bwset::generate_synthetic(spec);
    bwset::TraceMeta meta{spec.trace_id, records.size(), spec.source_tag};
    fs::path trace_path = dir / "traces" / (spec.trace_id + ".bwt");
    bwset::write_trace(records, meta, trace_path);
    manifest["traces"].push_back("traces/" + spec.trace_id + ".bwt");
    std::cout << "wrote " << trace_path.string() << " (" << records.size() << " records)\n";
  }
  manifest["default_sweep"] = true;
  manifest["default_predictors"] = true;
  manifest["output_dir"] = "analysis";
  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << "\n";
  std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
  return 0;
}

int run_manifest(bwset::RunManifest manifest) {
  auto output = bwset::run_characterize(manifest);
  std::cout << "traces ok: "
            << (manifest.trace_paths.size() + manifest.synthetics.size() - output.failures.size())
            << ", failed: " << output.failures.size() << ", summary rows: "
            << output.summaries.size() << ", predictor rows: " << output.results.size()
            << ", reports: " << output.reports.size() << "\n";
  std::cout << "outputs under " << manifest.output_dir.string() << "\n";
  for (const auto& f : output.failures)
    std::cerr << "failed trace " << f.trace_id << ": " << f.message << "\n";
  return output.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"branch working-set characterization toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "synthesize traces from a spec file");
  std::string spec_path;
  std::string gen_out = ".";
  gen->add_option("spec", spec_path, "synthetic spec JSON file")->required();
  gen->add_option("-o,--out", gen_out, "output directory (traces/ + manifest.json)");

  auto* chr = app.add_subcommand("characterize", "run the pipeline over a manifest");
  std::string manifest_path;
  std::string mode_override;
  unsigned global_override = 0;
  unsigned local_override = 0;
  double theta_override = -1.0;
  std::vector<std::string> predictor_filter;
  chr->add_option("manifest", manifest_path, "run manifest JSON file")->required();
  chr->add_option("--mode", mode_override, "profile a single mode: pc, global, global_local");
  chr->add_option("--global-hist", global_override, "global history bits for --mode");
  chr->add_option("--local-hist", local_override, "local history bits for --mode");
  chr->add_option("--theta", theta_override, "override theta for all configs");
  chr->add_option("--predictor", predictor_filter,
                  "restrict to these predictor kinds (repeatable)");

  auto* rep = app.add_subcommand("report", "rebuild aggregate reports from per-trace rows");
  std::string report_dir;
  rep->add_option("dir", report_dir, "directory holding summaries.csv and results.csv")->required();

  auto* sweep = app.add_subcommand("paper-sweep",
                                   "standard synthetic corpus + full sweep, end to end");
  std::string sweep_out;
  std::uint64_t sweep_seed = 42;
  sweep->add_option("outdir", sweep_out, "output directory")->required();
  sweep->add_option("--seed", sweep_seed, "corpus generation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version land here with a success code
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(spec_path, gen_out);
    if (chr->parsed()) {
      auto manifest = bwset::parse_manifest(manifest_path);
      if (!mode_override.empty()) {
        bwset::ProfileConfig c;
        c.mode = bwset::profile_mode_from_string(mode_override);
        c.global_bits = global_override;
        c.local_bits = local_override;
        c.theta = theta_override > 0 ? theta_override : 0.95;
        c.validate();
        manifest.configs = {c};
      } else if (theta_override > 0) {
        for (auto& c : manifest.configs) c.theta = theta_override;
      }
      if (!predictor_filter.empty()) {
        std::vector<bwset::PredictorConfig> kept;
        for (const auto& name : predictor_filter) {
          auto kind = bwset::predictor_kind_from_string(name);
          bool found = false;
          for (const auto& p : manifest.predictors)
            if (p.kind == kind && !found) {
              kept.push_back(p);
              found = true;
            }
          if (!found) {
            bwset::PredictorConfig p;
            p.kind = kind;
            kept.push_back(p);
          }
        }
        manifest.predictors = std::move(kept);
      }
      return run_manifest(std::move(manifest));
    }
    if (rep->parsed()) {
      auto reports = bwset::report_from_dir(report_dir);
      std::cout << "rebuilt " << reports.size() << " report(s) under "
                << (fs::path(report_dir) / "reports").string() << "\n";
      return 0;
    }
    if (sweep->parsed()) return run_manifest(bwset::paper_sweep_manifest(sweep_out, sweep_seed));
  } catch (const bwset::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
