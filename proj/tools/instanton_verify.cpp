#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "instanton/verify.hpp"

namespace {

int write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace instanton;
  CLI::App app{"Numerical verification of gravitational instanton structures"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the suites named in a config");
  std::string config, out, csv;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  bool timing = false;
  run->add_option("--config", config, "JSON config")->required();
  run->add_option("--out", out, "report path (default: config output, else stdout)");
  run->add_option("--seed", seed, "override the sampling seed");
  run->add_option("--samples", samples, "override the sample count");
  run->add_option("--csv", csv, "write per-sample residuals as CSV");
  run->add_flag("--timing", timing, "include wall time per suite");

  app.add_subcommand("suites", "list the registered suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand("suites")) {
    for (const auto& s : verify::suite_registry()) std::printf("%-20s %s\n", s.name.c_str(), s.description.c_str());
    return 0;
  }

  try {
    verify::RunConfig cfg = verify::load_config(config);
    if (seed) cfg.sampling.seed = *seed;
    if (samples) {
      if (*samples < 1) throw ConfigError("sample count must be at least 1");
      cfg.sampling.count = *samples;
    }
    const verify::RunReport report = verify::run(cfg);
    const std::string text = verify::dump(verify::to_json(report, timing));
    const std::string path = out.empty() ? cfg.output : out;
    if (path.empty()) {
      std::cout << text;
    } else if (int rc = write_file(path, text)) {
      return rc;
    }
    if (!csv.empty())
      if (int rc = write_file(csv, verify::residual_csv(report))) return rc;
    for (const auto& s : report.suites) {
      std::cerr << (s.pass() ? "PASS " : "FAIL ") << s.suite << "\n";
      for (const auto& c : s.checks)
        if (!c.pass) std::cerr << "  failed " << c.check << " max " << c.max_residual << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
    }
    return report.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
