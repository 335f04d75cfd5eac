// One line per acceptance criterion; exit status 0 iff every criterion passes.
#include <cstdlib>
#include <iostream>
#include <string>

#include "eldpp/verify.hpp"

int main(int argc, char** argv) {
  eldpp::verify::VerifyOptions opts;
  for (int k = 1; k < argc; ++k) opts.only.push_back(std::stoi(argv[k]));
  opts.on_result = [](const eldpp::verify::CheckReport& r) {
    std::cout << eldpp::verify::format_line(r) << std::endl;
  };
  int failed = 0;
  for (const auto& r : eldpp::verify::run_all(opts)) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
