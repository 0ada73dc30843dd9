// Command-line front end: run experiment matrices, summarize results and
// generate synthetic traces.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "abrsim/harness.h"
#include "abrsim/trace.h"

namespace {

constexpr const char* kOutDirEnv = "ABRSIM_OUT_DIR";

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven adaptive bitrate streaming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run every session of an experiment plan");
  run->add_option("--config", config_path, "Experiment plan (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir,
                  std::string("Output directory (default: plan output_dir or $") +
                      kOutDirEnv + ")");
  run->add_option("--jobs", jobs, "Parallel sessions")->check(CLI::Range(1, 256));

  std::string in_dir;
  auto* summarize =
      app.add_subcommand("summarize", "Aggregate results.csv into summary.csv");
  summarize->add_option("--in", in_dir, "Directory holding results.csv")
      ->required();

  std::string kind;
  double mean = 2600.0;
  double duration = 660.0;
  std::uint64_t seed = 1;
  std::string trace_out;
  double amplitude = 150.0;
  double period = 20.0;
  double outage_rate = 0.02;
  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic trace CSV");
  gen->add_option("--kind", kind, "wifi or hspa")
      ->required()
      ->check(CLI::IsMember({"wifi", "hspa"}));
  gen->add_option("--mean", mean, "Mean throughput, kbit/s")->required();
  gen->add_option("--duration", duration, "Trace length, s")->required();
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--out", trace_out, "Output CSV path")->required();
  gen->add_option("--amplitude", amplitude, "wifi: oscillation amplitude, kbit/s");
  gen->add_option("--period", period, "wifi: oscillation period, s");
  gen->add_option("--outage-rate", outage_rate, "hspa: outage onsets per second");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      abrsim::ExperimentPlan plan = abrsim::LoadPlan(config_path);
      if (!out_dir.empty()) {
        plan.output_dir = out_dir;
      } else if (plan.output_dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        if (env == nullptr || *env == '\0') {
          std::cerr << "error: no output directory (use --out)\n";
          return 2;
        }
        plan.output_dir = env;
      }
      abrsim::MatrixOptions options;
      options.jobs = jobs;
      const auto rows = abrsim::RunMatrix(plan, options);
      int aborted = 0;
      for (const auto& r : rows) aborted += r.complete ? 0 : 1;
      std::cout << rows.size() << " sessions written to " << plan.output_dir
                << "/results.csv";
      if (aborted > 0) std::cout << " (" << aborted << " aborted)";
      std::cout << "\n";
    } else if (*summarize) {
      const std::filesystem::path dir(in_dir);
      const auto rows = abrsim::ParseResultsCsv(ReadAll(dir / "results.csv"));
      const std::string csv = abrsim::SummaryToCsv(abrsim::Summarize(rows));
      std::ofstream out(dir / "summary.csv", std::ios::binary);
      out << csv;
      out.close();
      if (!out) throw std::runtime_error("cannot write summary.csv");
      std::cout << csv;
    } else if (*gen) {
      const abrsim::BandwidthTrace trace =
          kind == "wifi"
              ? abrsim::GenerateWifiTrace({mean, amplitude, period, duration, seed})
              : abrsim::GenerateHspaTrace({mean, duration, outage_rate, seed});
      abrsim::SaveTrace(trace, trace_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
