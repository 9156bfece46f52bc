#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "specflow/commands.hpp"
#include "specflow/kernels.hpp"

namespace {

// Exit codes: 0 all checks pass, 1 some check fails, 2 config/schema error,
// 3 numerical guard tripped, 4 I/O failure.
enum ExitCode { kPass = 0, kCheckFail = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specflow: Riesz products, spectral measures, and Poisson suspensions"};
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  long long seed = -1;
  int workers = 0;
  app.add_option("--config", config_path, "experiment config JSON")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--workers", workers, "OpenMP worker count (results are identical)");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_path, "output path (default: config output_path or stdout)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (workers > 0) specflow::kernels::set_worker_count(workers);

    nlohmann::json config_json;
    {
      std::ifstream in(config_path);
      if (!in) throw specflow::IoError("cannot open config: " + config_path);
      try {
        in >> config_json;
      } catch (const nlohmann::json::exception& e) {
        throw specflow::ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    auto config = specflow::ExperimentConfig::from_json(config_json);
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    if (!out_path.empty()) config.output_path = out_path;

    const specflow::Report report = specflow::run(config);
    const std::string body =
        format == "json" ? report.to_json().dump(2) + "\n" : report.to_csv();

    if (config.output_path.empty()) {
      std::cout << body;
    } else {
      std::ofstream out(config.output_path);
      if (!out) throw specflow::IoError("cannot open output: " + config.output_path);
      out << body;
      if (!out) throw specflow::IoError("write failed: " + config.output_path);
    }
    return report.passed() ? kPass : kCheckFail;
  } catch (const specflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const specflow::NumericGuardError& e) {
    std::cerr << "numeric guard: " << e.what() << "\n";
    return kNumeric;
  } catch (const specflow::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
