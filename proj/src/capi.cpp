#include "tensegrity/tensegrity.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <optional>
#include <string>
#include <thread>

#include "bench.hpp"
#include "calibrate.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "simulate.hpp"
#include "stream.hpp"

struct tsg_spec {
  tsg::StructureSpec value;
};

struct tsg_estimate {
  tsg::ShapeEstimate value;
};

struct tsg_tracker {
  tsg::Tracker value;
  explicit tsg_tracker(tsg::StructureSpec spec, tsg::EstimatorConfig config)
      : value(std::move(spec), config) {}
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tsg_status status_of(tsg::ErrorCode code) {
  switch (code) {
    case tsg::ErrorCode::InvalidArgument: return TSG_ERR_INVALID_ARGUMENT;
    case tsg::ErrorCode::SpecInvalid: return TSG_ERR_SPEC_INVALID;
    case tsg::ErrorCode::Parse: return TSG_ERR_PARSE;
    case tsg::ErrorCode::Io: return TSG_ERR_IO;
    case tsg::ErrorCode::SingularConfiguration: return TSG_ERR_SINGULAR;
    case tsg::ErrorCode::Degenerate: return TSG_ERR_DEGENERATE;
    case tsg::ErrorCode::OracleFailure: return TSG_ERR_ORACLE;
    case tsg::ErrorCode::Unidentifiable: return TSG_ERR_UNIDENTIFIABLE;
  }
  return TSG_ERR_INTERNAL;
}

template <typename F>
tsg_status guarded(F&& f) {
  try {
    f();
    return TSG_OK;
  } catch (const tsg::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TSG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return TSG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) tsg::raise(tsg::ErrorCode::InvalidArgument, what);
}

tsg::EstimatorConfig to_config(const tsg_config_t* c) {
  tsg::EstimatorConfig out;
  if (c == nullptr) return out;
  require(c->steps >= 1, "config: steps must be >= 1");
  require(c->inner_theta >= 1 && c->inner_p >= 1, "config: inner counts must be >= 1");
  require(c->restarts >= 1, "config: restarts must be >= 1");
  require(c->warm_steps >= 1, "config: warm_steps must be >= 1");
  require(c->optimizer >= 0 && c->optimizer <= 2, "config: optimizer must be 0, 1 or 2");
  out.steps = static_cast<std::size_t>(c->steps);
  out.lr_theta = c->lr_theta;
  out.lr_p = c->lr_p;
  out.inner_theta = static_cast<std::size_t>(c->inner_theta);
  out.inner_p = static_cast<std::size_t>(c->inner_p);
  out.optimizer = static_cast<tsg::Optimizer>(c->optimizer);
  out.momentum = c->momentum;
  out.adam_beta1 = c->adam_beta1;
  out.adam_beta2 = c->adam_beta2;
  out.adam_epsilon = c->adam_epsilon;
  out.grad_tol_p = c->grad_tol_p;
  out.grad_tol_theta = c->grad_tol_theta;
  out.restarts = static_cast<std::size_t>(c->restarts);
  out.seed = c->seed;
  out.warm_steps = static_cast<std::size_t>(c->warm_steps);
  return out;
}

Eigen::VectorXd to_vector(const double* data, int count) {
  Eigen::VectorXd v(count);
  for (int i = 0; i < count; ++i) v[i] = data[i];
  return v;
}

tsg::EstimateRecord record_of(const tsg::ShapeEstimate& est) {
  tsg::EstimateRecord rec;
  rec.timestamp = est.timestamp;
  rec.converged = est.converged;
  rec.energy = est.energy;
  rec.nodes = est.nodes;
  return rec;
}

std::map<double, tsg::TruthRecord> load_truth(const std::string& path, int strut_count) {
  std::map<double, tsg::TruthRecord> truth;
  tsg::LineSource src(path);
  std::string line;
  std::size_t line_no = 0;
  while (src.next(line)) {
    ++line_no;
    if (line.empty()) continue;
    tsg::TruthRecord rec =
        tsg::parse_truth(line, static_cast<std::size_t>(strut_count), line_no);
    truth[rec.timestamp] = std::move(rec);
  }
  return truth;
}

/// Shared metric accumulation for the file and TCP tracking runs.
class TrackStats {
 public:
  TrackStats(const tsg::StructureSpec& spec, const char* truth_path)
      : spec_(spec), have_truth_(truth_path != nullptr) {
    if (have_truth_) truth_ = load_truth(truth_path, spec.strut_count());
  }

  void add(const tsg::ShapeEstimate& est) {
    ++frames_;
    energy_sum_ += est.energy;
    iter_sum_ += static_cast<double>(est.iterations);
    wall_sum_ += est.wall_time;
    if (!have_truth_) return;
    const auto it = truth_.find(est.timestamp);
    if (it == truth_.end()) return;
    ++matched_;
    const tsg::TruthRecord& rec = it->second;
    mae_sum_ += tsg::node_mae(est.nodes, rec.nodes, true);
    mae_raw_sum_ += tsg::node_mae(est.nodes, rec.nodes, false);
    center_mae_sum_ += tsg::node_mae(tsg::strut_centers_of(est.nodes),
                                     tsg::strut_centers_of(rec.nodes), true);
    last_est_ = est;
    last_truth_ = rec;
  }

  std::string summary(unsigned long long rejects, unsigned long long skips) const {
    char buf[160];
    std::string out;
    auto kv = [&](const char* key, double v, const char* fmt = "%.6g") {
      std::string f = std::string(key) + " " + fmt + "\n";
      std::snprintf(buf, sizeof(buf), f.c_str(), v);
      out += buf;
    };
    out += "frames " + std::to_string(frames_) + "\n";
    out += "rejects " + std::to_string(rejects) + "\n";
    out += "skips " + std::to_string(skips) + "\n";
    if (frames_ > 0) {
      kv("energy_J_mean", energy_sum_ / static_cast<double>(frames_));
      kv("iterations_mean", iter_sum_ / static_cast<double>(frames_));
      kv("wall_time_ms_mean", 1e3 * wall_sum_ / static_cast<double>(frames_));
    }
    if (have_truth_) {
      out += "matched " + std::to_string(matched_) + "\n";
      if (matched_ > 0) {
        const auto n = static_cast<double>(matched_);
        kv("node_mae_mm", 1e3 * mae_sum_ / n);
        kv("node_mae_raw_mm", 1e3 * mae_raw_sum_ / n);
        kv("center_mae_mm", 1e3 * center_mae_sum_ / n);
        out += angle_block();
      }
    }
    return out;
  }

 private:
  std::string angle_block() const {
    tsg::ShapeState ref = tsg::state_from_nodes(last_truth_.nodes, spec_);
    ref.thetas = last_truth_.thetas;
    ref.phis = last_truth_.phis;
    const tsg::AngleErrors errs = tsg::angle_errors(last_est_.state, ref, spec_);
    std::string out;
    char buf[200];
    for (std::size_t i = 0; i < errs.yaw.size(); ++i) {
      const auto& y = errs.yaw[i];
      const auto& p = errs.inclination[i];
      std::snprintf(buf, sizeof(buf), "theta %zu actual %.4f estimated %.4f percent %s\n",
                    i, y.actual, y.estimated,
                    y.percent ? std::to_string(*y.percent).c_str() : "undefined");
      out += buf;
      std::snprintf(buf, sizeof(buf), "phi %zu actual %.4f estimated %.4f percent %s\n",
                    i, p.actual, p.estimated,
                    p.percent ? std::to_string(*p.percent).c_str() : "undefined");
      out += buf;
    }
    return out;
  }

  const tsg::StructureSpec& spec_;
  bool have_truth_;
  std::map<double, tsg::TruthRecord> truth_;
  std::size_t frames_ = 0;
  std::size_t matched_ = 0;
  double mae_sum_ = 0.0, mae_raw_sum_ = 0.0, center_mae_sum_ = 0.0;
  double energy_sum_ = 0.0, iter_sum_ = 0.0, wall_sum_ = 0.0;
  tsg::ShapeEstimate last_est_;
  tsg::TruthRecord last_truth_;
};

}  // namespace

void tsg_config_default(tsg_config_t* config) {
  if (config == nullptr) return;
  const tsg::EstimatorConfig d;
  config->steps = static_cast<int>(d.steps);
  config->lr_theta = d.lr_theta;
  config->lr_p = d.lr_p;
  config->inner_theta = static_cast<int>(d.inner_theta);
  config->inner_p = static_cast<int>(d.inner_p);
  config->optimizer = 0;
  config->momentum = d.momentum;
  config->adam_beta1 = d.adam_beta1;
  config->adam_beta2 = d.adam_beta2;
  config->adam_epsilon = d.adam_epsilon;
  config->grad_tol_p = d.grad_tol_p;
  config->grad_tol_theta = d.grad_tol_theta;
  config->restarts = static_cast<int>(d.restarts);
  config->seed = 0;
  config->warm_steps = static_cast<int>(d.warm_steps);
}

const char* tsg_version(void) { return "0.1.0"; }

const char* tsg_last_error(void) { return g_last_error.c_str(); }

void tsg_string_free(char* s) { std::free(s); }

tsg_status tsg_spec_load(const char* path, tsg_spec_t** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new tsg_spec{tsg::load_spec_file(path)};
  });
}

tsg_status tsg_spec_parse(const char* json_text, tsg_spec_t** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "null argument");
    *out = new tsg_spec{tsg::parse_spec_json(json_text)};
  });
}

tsg_status tsg_spec_save(const tsg_spec_t* spec, const char* path) {
  return guarded([&] {
    require(spec != nullptr && path != nullptr, "null argument");
    tsg::save_spec_file(spec->value, path);
  });
}

tsg_status tsg_spec_validate(const tsg_spec_t* spec, char** violations_out) {
  return guarded([&] {
    require(spec != nullptr && violations_out != nullptr, "null argument");
    std::string joined;
    for (const std::string& v : tsg::validate_spec(spec->value)) {
      if (!joined.empty()) joined += '\n';
      joined += v;
    }
    *violations_out = dup_string(joined);
  });
}

int tsg_spec_strut_count(const tsg_spec_t* spec) {
  return spec ? spec->value.strut_count() : 0;
}

int tsg_spec_node_count(const tsg_spec_t* spec) {
  return spec ? spec->value.node_count() : 0;
}

int tsg_spec_cable_count(const tsg_spec_t* spec) {
  return spec ? spec->value.cable_count() : 0;
}

const char* tsg_spec_name(const tsg_spec_t* spec) {
  return spec ? spec->value.name.c_str() : "";
}

void tsg_spec_free(tsg_spec_t* spec) { delete spec; }

tsg_status tsg_frame_render(double timestamp, const double* phis, int arity,
                            char** line_out) {
  return guarded([&] {
    require(phis != nullptr && line_out != nullptr && arity >= 1, "null argument");
    tsg::InclinationFrame frame;
    frame.timestamp = timestamp;
    frame.phis = to_vector(phis, arity);
    *line_out = dup_string(tsg::render_frame(frame));
  });
}

tsg_status tsg_frame_parse(const char* line, int arity, double* timestamp_out,
                           double* phis_out) {
  return guarded([&] {
    require(line != nullptr && timestamp_out != nullptr && phis_out != nullptr &&
                arity >= 1,
            "null argument");
    const tsg::InclinationFrame frame =
        tsg::parse_frame(line, static_cast<std::size_t>(arity));
    *timestamp_out = frame.timestamp;
    for (int i = 0; i < arity; ++i) phis_out[i] = frame.phis[i];
  });
}

tsg_status tsg_estimate_run(const tsg_spec_t* spec, const double* phis, int arity,
                            const tsg_config_t* config, tsg_estimate_t** out) {
  return guarded([&] {
    require(spec != nullptr && phis != nullptr && out != nullptr, "null argument");
    require(arity == spec->value.strut_count(), "phi arity does not match strut count");
    *out = new tsg_estimate{
        tsg::estimate(to_vector(phis, arity), spec->value, to_config(config))};
  });
}

int tsg_estimate_node_count(const tsg_estimate_t* est) {
  return est ? static_cast<int>(est->value.nodes.size() / 3) : 0;
}

void tsg_estimate_nodes(const tsg_estimate_t* est, double* out) {
  if (est == nullptr || out == nullptr) return;
  for (Eigen::Index i = 0; i < est->value.nodes.size(); ++i) out[i] = est->value.nodes[i];
}

void tsg_estimate_state(const tsg_estimate_t* est, double* centers_out,
                        double* thetas_out, double* phis_out) {
  if (est == nullptr) return;
  const tsg::ShapeState& s = est->value.state;
  if (centers_out != nullptr) {
    for (Eigen::Index i = 0; i < s.centers.size(); ++i) centers_out[i] = s.centers[i];
  }
  if (thetas_out != nullptr) {
    for (Eigen::Index i = 0; i < s.thetas.size(); ++i) thetas_out[i] = s.thetas[i];
  }
  if (phis_out != nullptr) {
    for (Eigen::Index i = 0; i < s.phis.size(); ++i) phis_out[i] = s.phis[i];
  }
}

double tsg_estimate_energy(const tsg_estimate_t* est) {
  return est ? est->value.energy : 0.0;
}

int tsg_estimate_iterations(const tsg_estimate_t* est) {
  return est ? static_cast<int>(est->value.iterations) : 0;
}

int tsg_estimate_converged(const tsg_estimate_t* est) {
  return est != nullptr && est->value.converged ? 1 : 0;
}

double tsg_estimate_grad_norm_p(const tsg_estimate_t* est) {
  return est ? est->value.grad_norm_p : 0.0;
}

double tsg_estimate_grad_norm_theta(const tsg_estimate_t* est) {
  return est ? est->value.grad_norm_theta : 0.0;
}

double tsg_estimate_wall_time(const tsg_estimate_t* est) {
  return est ? est->value.wall_time : 0.0;
}

double tsg_estimate_timestamp(const tsg_estimate_t* est) {
  return est ? est->value.timestamp : 0.0;
}

int tsg_estimate_degenerate(const tsg_estimate_t* est) {
  return est != nullptr && est->value.degeneracy.degenerate ? 1 : 0;
}

const char* tsg_estimate_degenerate_reason(const tsg_estimate_t* est) {
  return est ? est->value.degeneracy.reason.c_str() : "";
}

tsg_status tsg_estimate_record(const tsg_estimate_t* est, char** line_out) {
  return guarded([&] {
    require(est != nullptr && line_out != nullptr, "null argument");
    *line_out = dup_string(tsg::render_estimate(record_of(est->value)));
  });
}

void tsg_estimate_free(tsg_estimate_t* est) { delete est; }

tsg_status tsg_tracker_new(const tsg_spec_t* spec, const tsg_config_t* config,
                           tsg_tracker_t** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    *out = new tsg_tracker(spec->value, to_config(config));
  });
}

tsg_status tsg_tracker_submit_line(tsg_tracker_t* tracker, const char* line,
                                   tsg_estimate_t** out) {
  return guarded([&] {
    require(tracker != nullptr && line != nullptr && out != nullptr, "null argument");
    auto est = tracker->value.submit_line(line);
    *out = est ? new tsg_estimate{std::move(*est)} : nullptr;
  });
}

unsigned long long tsg_tracker_rejects(const tsg_tracker_t* tracker) {
  return tracker ? tracker->value.rejects() : 0;
}

unsigned long long tsg_tracker_skips(const tsg_tracker_t* tracker) {
  return tracker ? tracker->value.skips() : 0;
}

void tsg_tracker_free(tsg_tracker_t* tracker) { delete tracker; }

tsg_status tsg_simulate_files(const tsg_spec_t* spec, const char* scenario,
                              double duration, double rate, double sigma,
                              unsigned long long seed, const char* out_path,
                              const char* truth_path) {
  return guarded([&] {
    require(spec != nullptr && scenario != nullptr && out_path != nullptr,
            "null argument");
    tsg::NoiseModel noise;
    noise.sigma_phi = sigma;
    noise.seed = seed;
    const tsg::Trajectory traj = tsg::make_trajectory(
        spec->value, tsg::scenario_from_name(scenario), duration, rate, noise);

    tsg::LineSink out(out_path);
    std::optional<tsg::LineSink> truth;
    if (truth_path != nullptr) truth.emplace(truth_path);
    for (const tsg::TrajectoryPoint& pt : traj.points) {
      out.write_line(tsg::render_frame(pt.frame));
      if (truth) {
        tsg::TruthRecord rec;
        rec.timestamp = pt.timestamp;
        rec.nodes = tsg::node_positions(pt.truth, spec->value);
        rec.thetas = pt.truth.thetas;
        rec.phis = pt.truth.phis;
        truth->write_line(tsg::render_truth(rec));
      }
    }
  });
}

tsg_status tsg_track_file(const tsg_spec_t* spec, const tsg_config_t* config,
                          const char* in_path, const char* truth_path,
                          const char* out_path, char** summary_out) {
  return guarded([&] {
    require(spec != nullptr && in_path != nullptr && out_path != nullptr,
            "null argument");
    tsg::Tracker tracker(spec->value, to_config(config));
    TrackStats stats(spec->value, truth_path);
    tsg::LineSource in(in_path);
    tsg::LineSink out(out_path);
    std::string line;
    while (in.next(line)) {
      const auto est = tracker.submit_line(line);
      if (!est) continue;
      out.write_line(tsg::render_estimate(record_of(*est)));
      stats.add(*est);
    }
    if (summary_out != nullptr) {
      *summary_out = dup_string(stats.summary(tracker.rejects(), tracker.skips()));
    }
  });
}

tsg_status tsg_track_listen(const tsg_spec_t* spec, const tsg_config_t* config,
                            const char* host, int port, const char* truth_path,
                            const char* out_path, int* bound_port_out,
                            char** summary_out) {
  return guarded([&] {
    require(spec != nullptr && out_path != nullptr, "null argument");
    require(port >= 0 && port <= 65535, "port out of range");
    tsg::Tracker tracker(spec->value, to_config(config));
    TrackStats stats(spec->value, truth_path);
    tsg::LineSink out(out_path);
    tsg::TcpLineServer server(host != nullptr ? host : "127.0.0.1",
                              static_cast<std::uint16_t>(port));
    if (bound_port_out != nullptr) *bound_port_out = server.port();

    std::atomic<bool> done{false};
    std::exception_ptr ingest_error;
    std::thread ingest([&] {
      try {
        server.serve([&](const std::string& l) { tracker.ingest_line(l); });
      } catch (...) {
        ingest_error = std::current_exception();
      }
      done.store(true);
    });

    for (;;) {
      const auto est = tracker.poll();
      if (est) {
        out.write_line(tsg::render_estimate(record_of(*est)));
        stats.add(*est);
        continue;
      }
      if (done.load()) {
        const auto last = tracker.poll();
        if (last) {
          out.write_line(tsg::render_estimate(record_of(*last)));
          stats.add(*last);
        }
        break;
      }
      std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
    ingest.join();
    if (ingest_error) std::rethrow_exception(ingest_error);

    if (summary_out != nullptr) {
      *summary_out = dup_string(stats.summary(tracker.rejects(), tracker.skips()));
    }
  });
}

tsg_status tsg_bench_run(const tsg_spec_t* spec, int trials, const char* optimizer,
                         double sigma, unsigned long long seed, int steps,
                         char** report_out) {
  return guarded([&] {
    require(spec != nullptr && report_out != nullptr, "null argument");
    require(trials >= 1, "trials must be >= 1");
    require(steps >= 1, "steps must be >= 1");
    tsg::BenchOptions options;
    options.trials = static_cast<std::size_t>(trials);
    options.sigma = sigma;
    options.seed = seed;
    options.steps = static_cast<std::size_t>(steps);
    const std::string which = optimizer != nullptr ? optimizer : "all";
    if (which != "all") {
      const tsg::Optimizer want = tsg::optimizer_from_name(which);
      for (const tsg::BenchEntry& e : tsg::default_bench_entries()) {
        if (e.optimizer == want) options.entries.push_back(e);
      }
    }
    const tsg::BenchReport report = tsg::run_bench(spec->value, options);
    *report_out = dup_string(tsg::format_bench(report));
  });
}

tsg_status tsg_calibrate_files(const tsg_spec_t* spec, const char* in_path,
                               const char* truth_path, int budget,
                               unsigned long long seed, int tied, double lo,
                               double hi, const char* out_spec_path,
                               char** summary_out) {
  return guarded([&] {
    require(spec != nullptr && in_path != nullptr && truth_path != nullptr &&
                out_spec_path != nullptr,
            "null argument");
    require(budget >= 1, "budget must be >= 1");

    const auto truth = load_truth(truth_path, spec->value.strut_count());
    tsg::CalibrationProblem problem;
    problem.spec = spec->value;
    problem.bounds = {lo, hi};
    problem.tied = tied != 0;
    problem.budget = static_cast<std::size_t>(budget);
    problem.seed = seed;

    tsg::LineSource in(in_path);
    std::string line;
    std::size_t line_no = 0;
    while (in.next(line)) {
      ++line_no;
      if (line.empty()) continue;
      const tsg::InclinationFrame frame = tsg::parse_frame(
          line, static_cast<std::size_t>(spec->value.strut_count()), line_no);
      const auto it = truth.find(frame.timestamp);
      if (it == truth.end()) continue;
      problem.observations.push_back({frame, it->second.nodes});
    }
    require(!problem.observations.empty(),
            "no stream frames matched the ground-truth sidecar");

    const tsg::CalibrationResult result = tsg::fit_stiffness(problem);
    tsg::StructureSpec fitted = spec->value;
    for (int k = 0; k < fitted.cable_count(); ++k) {
      fitted.cables[k].stiffness = result.stiffness[k];
    }
    tsg::save_spec_file(fitted, out_spec_path);

    if (summary_out != nullptr) {
      std::string s;
      s += "observations " + std::to_string(problem.observations.size()) + "\n";
      s += "evaluations " + std::to_string(result.evaluations) + "\n";
      s += "objective_mm " + tsg::format_double(1e3 * result.objective) + "\n";
      s += "scale_unidentifiable " +
           std::string(result.scale_unidentifiable ? "1" : "0") + "\n";
      s += "stiffness";
      for (Eigen::Index k = 0; k < result.stiffness.size(); ++k) {
        s += ' ';
        s += tsg::format_double(result.stiffness[k]);
      }
      s += "\n";
      *summary_out = dup_string(s);
    }
  });
}

tsg_status tsg_node_mae(const double* est_nodes, const double* ref_nodes,
                        int node_count, int aligned, double* out) {
  return guarded([&] {
    require(est_nodes != nullptr && ref_nodes != nullptr && out != nullptr &&
                node_count >= 1,
            "null argument");
    *out = tsg::node_mae(to_vector(est_nodes, 3 * node_count),
                         to_vector(ref_nodes, 3 * node_count), aligned != 0);
  });
}
