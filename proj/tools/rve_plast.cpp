// rve-plast: runs the RVE elastoplastic spring-network experiments.
//
//   rve-plast <experiment> [--config FILE] [--L n] [--L-list 6,10,...] [--Lmax n]
//             [--M n] [--N n] [--T x] [--seed u64] [--out DIR] [--threads n] ...
//
// Every configuration key can be given as a flag; flags override the file.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rveplast/runner.hpp"

namespace {

struct FlagSpec {
  const char* names;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--L", "L", "RVE side length"},
    {"--L-list", "L_list", "comma-separated RVE sizes for the studies"},
    {"--Lmax,--L-max", "L_max", "reference RVE size for the error study"},
    {"--M", "M", "Monte-Carlo sample count"},
    {"--N", "N", "number of time steps"},
    {"--T", "T", "final time"},
    {"--seed", "seed", "master seed"},
    {"--out", "out", "output directory"},
    {"--threads", "threads", "worker threads (default: $RVE_PLAST_THREADS or all cores)"},
    {"--a-lo", "a_lo", "elastic modulus lower bound"},
    {"--a-hi", "a_hi", "elastic modulus upper bound"},
    {"--h-lo", "h_lo", "hardening modulus lower bound"},
    {"--h-hi", "h_hi", "hardening modulus upper bound"},
    {"--sy-lo", "sy_lo", "yield stress lower bound"},
    {"--sy-hi", "sy_hi", "yield stress upper bound"},
    {"--tol-increment", "tol_increment", "relative step tolerance"},
    {"--tol-energy", "tol_energy", "relative energy stagnation tolerance"},
    {"--max-outer", "max_outer", "maximum outer solver iterations"},
    {"--kink-epsilon", "kink_epsilon", "kink classification threshold"},
    {"--clamp", "clamp", "corner | four-corners"},
    {"--amplitude", "amplitude", "cyclic strain amplitude"},
    {"--frequency", "frequency", "cyclic angular frequency"},
    {"--rate", "rate", "monotonic strain rate"},
    {"--path-file", "path_file", "CSV strain path (t,F11,F12,F22) for custom-path"},
    {"--window", "window", "lo,hi RVE-size window for slope fits"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic RVE simulation of random elastoplastic spring networks"};
  std::string experiment;
  std::string config_file;
  app.add_option("experiment", experiment, "cyclic | monotonic | error-study | variance-study | custom-path");
  app.add_option("--config", config_file, "JSON configuration file (flat keys)");

  std::vector<std::string> values(std::size(kFlags));
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < std::size(kFlags); ++i)
    options.push_back(app.add_option(kFlags[i].names, values[i], kFlags[i].help));

  CLI11_PARSE(app, argc, argv);

  std::map<std::string, std::string> flags;
  if (!experiment.empty()) flags["experiment"] = experiment;
  for (std::size_t i = 0; i < options.size(); ++i)
    if (options[i]->count() > 0) flags[kFlags[i].key] = values[i];

  rveplast::RunConfig config;
  try {
    config = rveplast::parse_config_file(config_file, flags);
  } catch (const rveplast::ConfigError& e) {
    std::cerr << "rve-plast: " << e.what() << '\n';
    return 64;
  }
  try {
    return rveplast::run(config, std::cout);
  } catch (const rveplast::ConfigError& e) {
    std::cerr << "rve-plast: " << e.what() << '\n';
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "rve-plast: " << e.what() << '\n';
    return 1;
  }
}
