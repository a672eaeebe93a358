// Copyright 2026 The nmqt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// simulate <study> --config <path> [--out <path>] [--threads N]
//
// Exit codes: 0 success, 1 validation, 2 numerical or resolution, 3 I/O.

#include <nmqt/io.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

int exit_code(nmqt::ErrorKind k) {
  using nmqt::ErrorKind;
  switch (k) {
    case ErrorKind::NumericalInstability:
    case ErrorKind::Resolution:
    case ErrorKind::NegligibleProbability:
      return 2;
    case ErrorKind::MissingFile:
    case ErrorKind::Io:
      return 3;
    default:
      return 1;
  }
}

// Optional default for --threads, read once at startup.
int default_threads() {
  if (const char* env = std::getenv("NMQT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable teleportation through non-Markovian channels"};
  std::string study, config, out;
  int threads = default_threads();
  app.add_option("study", study, "Study to run: " + nmqt::valid_study_list())->required();
  app.add_option("--config", config, "Experiment configuration (YAML)")->required();
  app.add_option("--out", out, "Output CSV (default: the config's output entry, else <study>.csv)");
  app.add_option("--threads", threads, "Upper bound on worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (!nmqt::study_from_string(study)) {
    std::cerr << "error: unknown study '" << study << "'; valid studies: " << nmqt::valid_study_list() << "\n";
    return 1;
  }
  nmqt::ExperimentConfig cfg;
  try {
    cfg = nmqt::parse_config(config);
  } catch (const nmqt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  if (nmqt::to_string(cfg.study) != study) {
    std::cerr << "error: command requests study '" << study << "' but " << config << " declares '"
              << nmqt::to_string(cfg.study) << "'\n";
    return 1;
  }
  const std::string path = !out.empty() ? out : !cfg.output_path.empty() ? cfg.output_path : study + ".csv";

  nmqt::ResultTable table;
  try {
    nmqt::run_study(cfg, table);
  } catch (const nmqt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!table.columns().empty()) {
      table.annotate("status", std::string("aborted: ") + e.what());
      try {
        nmqt::write_csv(table, path);
        std::cerr << "partial results written to " << path << "\n";
      } catch (const nmqt::Error& io) {
        std::cerr << "error: " << io.what() << "\n";
      }
    }
    return exit_code(e.kind());
  }
  try {
    nmqt::write_csv(table, path);
  } catch (const nmqt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  std::cout << "wrote " << table.rows().size() << " rows to " << path << "\n";
  return 0;
}
