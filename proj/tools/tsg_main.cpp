// tsg: command-line frontend for the tensegrity shape estimation library.
// Links only the public C API.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tensegrity/tensegrity.h"

namespace {

constexpr int kExitGeneric = 1;
constexpr int kExitSpecInvalid = 2;
constexpr int kExitIngest = 3;
constexpr int kExitDegenerate = 4;

// parse_io_code selects how Parse/Io map in the current context: a broken
// spec file is a spec problem, a broken stream is an ingest problem.
int fail(tsg_status status, int parse_io_code) {
  std::fprintf(stderr, "error: %s\n", tsg_last_error());
  switch (status) {
    case TSG_ERR_SPEC_INVALID:
      return kExitSpecInvalid;
    case TSG_ERR_PARSE:
    case TSG_ERR_IO:
      return parse_io_code;
    case TSG_ERR_DEGENERATE:
      return kExitDegenerate;
    default:
      return kExitGeneric;
  }
}

struct SpecGuard {
  tsg_spec_t* ptr = nullptr;
  ~SpecGuard() { tsg_spec_free(ptr); }
};

struct EstimateGuard {
  tsg_estimate_t* ptr = nullptr;
  ~EstimateGuard() { tsg_estimate_free(ptr); }
};

struct StrGuard {
  char* ptr = nullptr;
  ~StrGuard() { tsg_string_free(ptr); }
};

// Loads and semantically validates a spec; returns 0 or a process exit code.
int load_spec(const std::string& path, SpecGuard& spec) {
  const tsg_status st = tsg_spec_load(path.c_str(), &spec.ptr);
  if (st != TSG_OK) return fail(st, kExitSpecInvalid);
  StrGuard violations;
  if (tsg_spec_validate(spec.ptr, &violations.ptr) != TSG_OK) return kExitGeneric;
  if (violations.ptr != nullptr && violations.ptr[0] != '\0') {
    std::fprintf(stderr, "invalid spec:\n%s\n", violations.ptr);
    return kExitSpecInvalid;
  }
  return 0;
}

bool parse_phi_list(const std::string& text, std::vector<double>& out) {
  out.clear();
  const char* s = text.c_str();
  while (*s != '\0') {
    while (*s == ' ' || *s == '\t') ++s;
    if (*s == '\0') break;
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s) return false;
    out.push_back(v);
    s = end;
  }
  return !out.empty();
}

struct EstimatorFlags {
  int steps = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::string optimizer;
  int restarts = 0;
  unsigned long long seed = 0;
  int warm_steps = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--steps", steps, "outer iteration budget");
    cmd->add_option("--alpha", alpha, "yaw learning rate");
    cmd->add_option("--beta", beta, "center learning rate");
    cmd->add_option("--optimizer", optimizer, "gd|sgdm|adam")
        ->check(CLI::IsMember({"gd", "sgdm", "adam"}));
    cmd->add_option("--restarts", restarts, "multi-start restarts");
    cmd->add_option("--seed", seed, "rng seed");
    cmd->add_option("--warm-steps", warm_steps, "per-frame steps after the first");
  }

  tsg_config_t config() const {
    tsg_config_t cfg;
    tsg_config_default(&cfg);
    if (steps > 0) cfg.steps = steps;
    if (alpha > 0.0) cfg.lr_theta = alpha;
    if (beta > 0.0) cfg.lr_p = beta;
    if (optimizer == "gd") cfg.optimizer = 0;
    if (optimizer == "sgdm") cfg.optimizer = 1;
    if (optimizer == "adam") cfg.optimizer = 2;
    if (restarts > 0) cfg.restarts = restarts;
    cfg.seed = seed;
    if (warm_steps > 0) cfg.warm_steps = warm_steps;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensegrity shape estimation from strut inclination angles"};
  app.require_subcommand(1);

  // validate
  std::string val_path;
  CLI::App* cmd_validate = app.add_subcommand("validate", "check a structure spec");
  cmd_validate->add_option("spec-file", val_path, "spec JSON path or builtin:NAME")
      ->required();

  // simulate
  std::string sim_spec, sim_scenario = "lateral", sim_out, sim_truth;
  double sim_duration = 30.0, sim_rate = 50.0, sim_sigma = 0.0;
  unsigned long long sim_seed = 0;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "generate a synthetic inclination stream");
  cmd_simulate->add_option("--spec", sim_spec)->required();
  cmd_simulate->add_option("--scenario", sim_scenario,
                           "stationary|lateral|angular|tilted|recovery");
  cmd_simulate->add_option("--duration", sim_duration, "seconds");
  cmd_simulate->add_option("--rate", sim_rate, "frames per second");
  cmd_simulate->add_option("--sigma", sim_sigma, "phi noise std dev (rad)");
  cmd_simulate->add_option("--seed", sim_seed);
  cmd_simulate->add_option("--out", sim_out, "stream path or -")->required();
  cmd_simulate->add_option("--truth", sim_truth, "ground-truth sidecar path");

  // estimate
  std::string est_spec, est_phi;
  EstimatorFlags est_flags;
  CLI::App* cmd_estimate =
      app.add_subcommand("estimate", "single solve from a phi vector");
  cmd_estimate->add_option("--spec", est_spec)->required();
  cmd_estimate->add_option("--phi", est_phi, "space-separated inclinations (rad)")
      ->required();
  est_flags.attach(cmd_estimate);

  // track
  std::string trk_spec, trk_in, trk_listen, trk_truth, trk_out;
  EstimatorFlags trk_flags;
  CLI::App* cmd_track = app.add_subcommand("track", "streaming estimation");
  cmd_track->add_option("--spec", trk_spec)->required();
  CLI::Option* in_opt = cmd_track->add_option("--in", trk_in, "stream path or -");
  CLI::Option* listen_opt =
      cmd_track->add_option("--listen", trk_listen, "host:port TCP ingest");
  in_opt->excludes(listen_opt);
  cmd_track->add_option("--truth", trk_truth, "ground-truth sidecar path");
  cmd_track->add_option("--out", trk_out, "estimate record sink or -")->required();
  trk_flags.attach(cmd_track);

  // bench
  std::string bch_spec, bch_optimizer = "all";
  int bch_trials = 10, bch_steps = 5000;
  double bch_sigma = 0.01;
  unsigned long long bch_seed = 0;
  CLI::App* cmd_bench = app.add_subcommand("bench", "optimizer comparison report");
  cmd_bench->add_option("--spec", bch_spec)->required();
  cmd_bench->add_option("--trials", bch_trials);
  cmd_bench->add_option("--optimizer", bch_optimizer, "gd|sgdm|adam|all")
      ->check(CLI::IsMember({"gd", "sgdm", "adam", "all"}));
  cmd_bench->add_option("--sigma", bch_sigma, "phi noise std dev (rad)");
  cmd_bench->add_option("--seed", bch_seed);
  cmd_bench->add_option("--steps", bch_steps, "iteration budget per solve");

  // calibrate
  std::string cal_spec, cal_in, cal_truth, cal_out;
  int cal_budget = 100;
  unsigned long long cal_seed = 0;
  bool cal_untied = false;
  double cal_lo = 10.0, cal_hi = 200.0;
  CLI::App* cmd_calibrate =
      app.add_subcommand("calibrate", "fit cable stiffness from labelled frames");
  cmd_calibrate->add_option("--spec", cal_spec)->required();
  cmd_calibrate->add_option("--in", cal_in, "inclination stream")->required();
  cmd_calibrate->add_option("--truth", cal_truth, "ground-truth sidecar")->required();
  cmd_calibrate->add_option("--budget", cal_budget, "objective evaluations");
  cmd_calibrate->add_option("--seed", cal_seed);
  cmd_calibrate->add_option("--out", cal_out, "fitted spec path")->required();
  cmd_calibrate->add_flag("--untied", cal_untied, "fit per-cable stiffness");
  cmd_calibrate->add_option("--lo", cal_lo, "stiffness lower bound");
  cmd_calibrate->add_option("--hi", cal_hi, "stiffness upper bound");

  CLI11_PARSE(app, argc, argv);

  if (cmd_validate->parsed()) {
    SpecGuard spec;
    tsg_status st = tsg_spec_load(val_path.c_str(), &spec.ptr);
    if (st != TSG_OK) return fail(st, kExitSpecInvalid);
    StrGuard violations;
    st = tsg_spec_validate(spec.ptr, &violations.ptr);
    if (st != TSG_OK) return fail(st, kExitGeneric);
    if (violations.ptr != nullptr && violations.ptr[0] != '\0') {
      std::printf("%s\n", violations.ptr);
      return kExitSpecInvalid;
    }
    std::printf("ok: %s (%d struts, %d nodes, %d cables)\n", tsg_spec_name(spec.ptr),
                tsg_spec_strut_count(spec.ptr), tsg_spec_node_count(spec.ptr),
                tsg_spec_cable_count(spec.ptr));
    return 0;
  }

  if (cmd_simulate->parsed()) {
    SpecGuard spec;
    if (const int rc = load_spec(sim_spec, spec)) return rc;
    const tsg_status st = tsg_simulate_files(
        spec.ptr, sim_scenario.c_str(), sim_duration, sim_rate, sim_sigma, sim_seed,
        sim_out.c_str(), sim_truth.empty() ? nullptr : sim_truth.c_str());
    if (st != TSG_OK) return fail(st, kExitGeneric);
    return 0;
  }

  if (cmd_estimate->parsed()) {
    SpecGuard spec;
    if (const int rc = load_spec(est_spec, spec)) return rc;
    std::vector<double> phis;
    if (!parse_phi_list(est_phi, phis)) {
      std::fprintf(stderr, "error: --phi expects space-separated numbers\n");
      return kExitIngest;
    }
    const tsg_config_t cfg = est_flags.config();
    EstimateGuard est;
    tsg_status st = tsg_estimate_run(spec.ptr, phis.data(),
                                     static_cast<int>(phis.size()), &cfg, &est.ptr);
    if (st != TSG_OK) return fail(st, kExitGeneric);
    StrGuard record;
    st = tsg_estimate_record(est.ptr, &record.ptr);
    if (st != TSG_OK) return fail(st, kExitGeneric);
    std::printf("%s\n", record.ptr);
    return 0;
  }

  if (cmd_track->parsed()) {
    SpecGuard spec;
    if (const int rc = load_spec(trk_spec, spec)) return rc;
    if (trk_in.empty() && trk_listen.empty()) {
      std::fprintf(stderr, "error: track requires --in or --listen\n");
      return kExitGeneric;
    }
    const tsg_config_t cfg = trk_flags.config();
    const char* truth = trk_truth.empty() ? nullptr : trk_truth.c_str();
    StrGuard summary;
    tsg_status st;
    if (!trk_in.empty()) {
      st = tsg_track_file(spec.ptr, &cfg, trk_in.c_str(), truth, trk_out.c_str(),
                          &summary.ptr);
    } else {
      const std::size_t colon = trk_listen.rfind(':');
      if (colon == std::string::npos) {
        std::fprintf(stderr, "error: --listen expects host:port\n");
        return kExitGeneric;
      }
      const std::string host = trk_listen.substr(0, colon);
      const int port = std::atoi(trk_listen.c_str() + colon + 1);
      int bound = 0;
      st = tsg_track_listen(spec.ptr, &cfg, host.c_str(), port, truth,
                            trk_out.c_str(), &bound, &summary.ptr);
      if (st == TSG_OK) std::fprintf(stderr, "listened on %s:%d\n", host.c_str(), bound);
    }
    if (st != TSG_OK) return fail(st, kExitIngest);
    if (summary.ptr != nullptr) std::fprintf(stderr, "%s", summary.ptr);
    return 0;
  }

  if (cmd_bench->parsed()) {
    SpecGuard spec;
    if (const int rc = load_spec(bch_spec, spec)) return rc;
    StrGuard report;
    const tsg_status st =
        tsg_bench_run(spec.ptr, bch_trials, bch_optimizer.c_str(), bch_sigma,
                      bch_seed, bch_steps, &report.ptr);
    if (st != TSG_OK) return fail(st, kExitGeneric);
    std::printf("%s", report.ptr);
    return 0;
  }

  if (cmd_calibrate->parsed()) {
    SpecGuard spec;
    if (const int rc = load_spec(cal_spec, spec)) return rc;
    StrGuard summary;
    const tsg_status st = tsg_calibrate_files(
        spec.ptr, cal_in.c_str(), cal_truth.c_str(), cal_budget, cal_seed,
        cal_untied ? 0 : 1, cal_lo, cal_hi, cal_out.c_str(), &summary.ptr);
    if (st != TSG_OK) return fail(st, kExitIngest);
    std::printf("%s", summary.ptr);
    return 0;
  }

  return kExitGeneric;
}
