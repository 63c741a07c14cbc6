// erasure-sim: command-line front end.
//
//   erasure-sim <calibrate|erase|sweep|fit|mi|report> --config FILE
//               [--seed U64] [--jobs N] [--out DIR]
//
// Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "erasure/commands.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "JSON run configuration")->required();
  sub->add_option("--seed", args.seed, "master seed (overrides the config)");
  sub->add_option("--jobs", args.jobs, "worker threads (default: available parallelism)")->check(CLI::PositiveNumber);
  sub->add_option("--out", args.out, "output directory (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback erasure of a one-bit Brownian memory"};
  app.require_subcommand(1);

  CommonArgs args;
  std::optional<double> duty;
  std::optional<double> sigma_n;
  std::string protocol = "feedback";

  auto* calibrate = app.add_subcommand("calibrate", "equilibrium runs, sigma_T and the reconstructed potential");
  auto* erase = app.add_subcommand("erase", "one erasure ensemble at a single duty ratio");
  auto* sweep = app.add_subcommand("sweep", "feedback and open-loop ensembles over d_list");
  auto* fit = app.add_subcommand("fit", "weighted least-squares fit of mean work from sweep_feedback.csv");
  auto* mi = app.add_subcommand("mi", "mutual information by quadrature and Monte Carlo");
  auto* report = app.add_subcommand("report", "second-law ledger and energy deficit from prior outputs");
  for (auto* sub : {calibrate, erase, sweep, fit, mi, report}) add_common(sub, args);
  erase->add_option("--d", duty, "duty ratio during the tilt (default: first of d_list)");
  erase->add_option("--sigma-n", sigma_n, "sensor noise in nm (default: from config)");
  erase->add_option("--protocol", protocol, "feedback or openloop")
      ->check(CLI::IsMember({"feedback", "openloop"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  using namespace erasure;
  try {
    RunConfig cfg = load_config(args.config);
    if (args.seed) cfg.sim.seed = *args.seed;
    if (sigma_n) {
      cfg.sensor.sigma_n = *sigma_n;
      cfg.sensor.validate();
    }
    commands::Options opt;
    opt.out_dir = args.out ? *args.out : cfg.output_dir;
    if (args.jobs) opt.jobs = *args.jobs;

    io::Json summary;
    if (*calibrate) {
      summary = commands::calibrate(cfg, opt);
    } else if (*erase) {
      const double d = duty ? *duty : cfg.d_list.front();
      const auto kind = protocol == "feedback" ? ProtocolKind::feedback : ProtocolKind::open_loop;
      summary = commands::erase(cfg, opt, kind, d);
    } else if (*sweep) {
      summary = commands::sweep(cfg, opt);
    } else if (*fit) {
      summary = commands::fit(cfg, opt);
    } else if (*mi) {
      summary = commands::mi(cfg, opt);
    } else {
      summary = commands::report(cfg, opt);
    }
    std::cout << "wrote outputs to " << opt.out_dir.string() << " (seed " << cfg.sim.seed << ")\n";
    return 0;
  } catch (const erasure::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
