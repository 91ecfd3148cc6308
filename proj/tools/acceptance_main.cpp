// Prints one PASS/FAIL line per acceptance criterion.
//
// Exit status is 0 once every criterion has been evaluated, whatever the
// outcome; --strict makes any failed criterion exit 1.

#include <CLI11.hpp>

#include <iostream>

#include "aliased_ac/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite", "aliased-ac-acceptance"};
  aliased_ac::AcceptanceOptions options;
  std::vector<int> ids;
  bool strict = false;
  app.add_option("--criteria", ids, "criteria to run (default all)")->delimiter(',');
  app.add_option("--jobs", options.jobs, "worker threads")->capture_default_str();
  app.add_option("--seed", options.seed, "master seed")->capture_default_str();
  app.add_option("--scratch", options.scratch, "scratch directory");
  app.add_flag("--strict", strict, "exit 1 when a criterion fails");
  CLI11_PARSE(app, argc, argv);
  if (ids.empty()) ids = aliased_ac::criterion_ids();

  int failed = 0;
  for (int id : ids) {
    const auto result = aliased_ac::run_criterion(id, options);
    std::cout << aliased_ac::format_line(result) << std::endl;
    if (!result.passed()) ++failed;
  }
  std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
  return strict && failed > 0 ? 1 : 0;
}
