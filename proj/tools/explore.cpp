#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "panverif/harness/explore.hpp"
#include "panverif/harness/mutants.hpp"

using namespace panverif::harness;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_activation(const Activation& a) {
  std::cout << "  [" << a.trigger << "] " << a.entry << ": " << a.result.summary() << "\n";
  for (const auto& e : a.result.trace) std::cout << "      " << panverif::to_string(e) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explore device and OS schedules against the mini-driver"};
  std::string driver;
  std::string mutant;
  std::string schedules;
  std::size_t depth = 6;
  std::size_t random = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  bool serial = false;
  bool verbose = false;
  app.add_option("driver", driver, "driver source")->required();
  app.add_option("--mutant", mutant, "apply a mutant description first");
  app.add_option("--schedules", schedules, "replay the schedules in this file instead of exploring");
  app.add_option("--depth", depth, "longest schedule explored");
  app.add_option("--random", random, "sample this many random schedules of length --depth instead");
  app.add_option("--seed", seed, "seed for --random");
  app.add_option("--threads", threads, "worker threads (default: all)");
  app.add_flag("--serial", serial, "use the single-threaded explorer");
  app.add_flag("-v,--verbose", verbose, "print every activation when replaying schedules");
  CLI11_PARSE(app, argc, argv);

  try {
    std::string source = slurp(driver);
    if (!mutant.empty()) source = apply_mutant(source, load_mutant(mutant));
    panverif::Program program = parse_driver(source, driver);
    HarnessConfig cfg;

    if (!schedules.empty()) {
      DriverHarness h(program, cfg);
      bool clean = true;
      for (const auto& s : parse_schedule_file(slurp(schedules))) {
        std::vector<Activation> log;
        Verdict v = h.run(s, &log);
        std::cout << to_string(s) << ": " << (v.ok() ? "ok" : "VIOLATION") << "\n";
        if (verbose)
          for (const auto& a : log) print_activation(a);
        for (const auto& f : v.findings) std::cout << "  " << f.checker << ": " << f.message << "\n";
        clean = clean && v.ok();
      }
      return clean ? 0 : 1;
    }

    auto start = std::chrono::steady_clock::now();
    ExploreReport rep = random ? explore_random(program, cfg, random, depth, seed)
                        : serial ? explore_serial(program, cfg, {depth, 2})
                                 : explore_parallel(program, cfg, {depth, 2}, threads);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << rep.summary() << "elapsed " << secs << " s\n";
    return rep.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
