#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fgneg/errors.hpp"
#include "fgneg/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Overrides {
  std::string config;
  std::string out;
  int workers = 0;
  double sdp_tol = 0.0;
  std::string lower_strategy;
};

fgneg::RunConfig build_config(const Overrides& o) {
  fgneg::RunConfig cfg = o.config.empty() ? fgneg::RunConfig{} : fgneg::RunConfig::load(o.config);
  if (!o.out.empty()) cfg.out = o.out;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.sdp_tol > 0.0) cfg.sdp_tol = o.sdp_tol;
  if (!o.lower_strategy.empty()) {
    auto s = fgneg::parse_lower_strategy(o.lower_strategy);
    if (!s) throw fgneg::ConfigError("unknown lower strategy " + o.lower_strategy);
    cfg.lower_strategy = *s;
  }
  cfg.validate();
  return cfg;
}

std::string path(const fgneg::RunConfig& cfg, const std::string& name) {
  return cfg.out + "/" + name;
}

void emit_json(const fgneg::RunConfig& cfg, const std::string& name, nlohmann::json j) {
  j["config"] = cfg.to_json();
  fgneg::write_text(path(cfg, name), j.dump(2) + "\n");
}

void run(const std::string& cmd, const fgneg::RunConfig& cfg) {
  const auto h = cfg.hash();
  if (cmd == "fig-gs") {
    auto t = fgneg::run_fig_groundstate(cfg);
    fgneg::write_text(path(cfg, "fig_groundstate.csv"), t.to_csv(h));
    std::cout << "fig-gs: " << t.rows.size() << " rows\n";
  } else if (cmd == "fig-thermal") {
    auto t = fgneg::run_fig_thermal(cfg);
    fgneg::write_text(path(cfg, "fig_thermal.csv"), t.to_csv(h));
    std::cout << "fig-thermal: " << t.rows.size() << " rows\n";
  } else if (cmd == "scaling") {
    auto r = fgneg::run_scaling(cfg);
    fgneg::write_text(path(cfg, "scaling_equal.csv"), r.equal.to_csv(h));
    fgneg::write_text(path(cfg, "scaling_unequal.csv"), r.unequal.to_csv(h));
    emit_json(cfg, "scaling_fits.json", r.summary());
    std::cout << "slope " << r.slope.param("s") << "  collapse residual " << r.collapse_residual
              << "  entropy ratios " << r.ratio_half << " " << r.ratio_two << "\n";
  } else if (cmd == "spectra") {
    auto r = fgneg::run_spectra(cfg);
    fgneg::write_text(path(cfg, "spectra.csv"), r.spectra.to_csv(h));
    fgneg::write_text(path(cfg, "spectra_lowest.csv"), r.lowest.to_csv(h));
    emit_json(cfg, "spectra_fit.json", r.summary());
    std::cout << "a " << r.ansatz.param("a") << "  b " << r.ansatz.param("b") << "  c "
              << r.ansatz.param("c") << "  excluded " << r.excluded << "\n";
  } else if (cmd == "thermal-scaling") {
    auto r = fgneg::run_thermal_scaling(cfg);
    fgneg::write_text(path(cfg, "thermal_scaling.csv"), r.table.to_csv(h));
    emit_json(cfg, "thermal_scaling.json", r.summary());
    std::cout << "collapse residual " << r.collapse_residual << "\n";
  } else if (cmd == "report") {
    auto j = fgneg::run_report(cfg);
    emit_json(cfg, "report.json", j);
    std::cout << j.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negativity bounds for fermionic Gaussian states"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--workers", o.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
  app.add_option("--sdp-tol", o.sdp_tol, "interior-point tolerance")->check(CLI::PositiveNumber);
  app.add_option("--lower-strategy", o.lower_strategy, "identity, svd or search");
  for (const char* name : {"fig-gs", "fig-thermal", "scaling", "spectra", "thermal-scaling", "report"}) {
    app.add_subcommand(name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    run(cmd, build_config(o));
  } catch (const fgneg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
