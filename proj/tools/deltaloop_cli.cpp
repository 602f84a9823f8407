#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "deltaloop/harness.hpp"
#include "deltaloop/version.hpp"

using namespace deltaloop;

int main(int argc, char** argv) {
  CLI::App app{"Strong-coupling experiments for magnetic delta interactions on closed loops"};
  app.set_version_flag("--version", kVersion);
  std::string config_path, out_path;
  harness::RunOptions run;
  app.add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "CSV output file (default stdout)");
  app.add_option("--jobs", run.jobs, "worker cap for parameter grids")->check(CLI::PositiveNumber);
  auto* seed = app.add_option("--seed", run.seed, "eigensolver start seed (overrides the config)");
  app.require_subcommand(1);
  for (const auto& c : harness::commands()) app.add_subcommand(c)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? harness::kOk : harness::kUsage;
  }
  run.seed_set = seed->count() > 0;
  const std::string command = app.get_subcommands().front()->get_name();

  harness::Json config;
  try {
    std::ifstream in(config_path);
    config = harness::Json::parse(in, nullptr, true, true);
  } catch (const harness::Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return harness::kUsage;
  }

  // Buffer so a failed run never leaves a partial file behind.
  std::ostringstream csv;
  const int code = harness::execute(command, config, run, csv, std::cerr);
  if (code != harness::kOk) return code;
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << csv.str();
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return harness::kUsage;
    }
  }
  return harness::kOk;
}
