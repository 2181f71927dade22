#include "nvtensor/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

#include "nvtensor/errors.hpp"
#include "nvtensor/qfi.hpp"
#include "nvtensor/util.hpp"

namespace nvt {

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string number_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Context {
  const ExperimentConfig& cfg;
  std::string out_dir;
  std::string comment;
  int threads = 1;
  std::vector<std::string>* paths = nullptr;

  std::string file(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }
  void emit(const std::string& name, const std::vector<std::string>& columns,
            const std::vector<std::vector<double>>& rows) const {
    const std::string path = file(name);
    write_csv(path, columns, rows, comment);
    paths->push_back(path);
  }
};

Trajectory run_one(const ExperimentConfig& c, double gamma, const std::string& engine,
                   long chi_max, const RecordOptions& rec) {
  ExperimentConfig local = c;
  local.chi_max = chi_max;
  const ModelSpec m = model_from_config(local, gamma);
  const EngineOptions opt = engine_from_config(local, engine);
  return run_trajectory(m, opt, config_dt_us(c), c.n_steps, rec, initial_from_config(c));
}

void run_engine_comparison(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double gamma = c.gamma.front();
  const RecordOptions rec{0};

  Trajectory tdvp, wii, ed;
  parallel_for(3, ctx.threads, [&](int i) {
    if (i == 0) tdvp = run_one(c, gamma, "tdvp", c.chi_max, rec);
    else if (i == 1) wii = run_one(c, gamma, "wii", c.chi_max, rec);
    else ed = run_one(c, gamma, "ed", c.chi_max, rec);
  });

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tdvp.times.size(); ++k)
    rows.push_back({tdvp.times[k], tdvp.mean_sz[k].real(), tdvp.mean_sz[k].imag(),
                    wii.mean_sz[k].real(), wii.mean_sz[k].imag(), ed.mean_sz[k].real()});
  ctx.emit("engine-comparison.csv",
           {"t", "Sz_re_tdvp", "Sz_im_tdvp", "Sz_re_wii", "Sz_im_wii", "Sz_re_ed"}, rows);
}

void run_bond_scan(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double gamma = c.gamma.front();
  const RecordOptions rec{0};
  const Trajectory ed = run_one(c, gamma, "ed", c.chi_max, rec);

  std::vector<Trajectory> runs(c.chi_list.size());
  parallel_for(static_cast<int>(c.chi_list.size()), ctx.threads, [&](int i) {
    runs[static_cast<std::size_t>(i)] =
        run_one(c, gamma, "tdvp", c.chi_list[static_cast<std::size_t>(i)], rec);
  });

  std::vector<std::vector<double>> summary;
  for (std::size_t i = 0; i < c.chi_list.size(); ++i) {
    const ErrorMetrics m = error_metrics(runs[i], ed);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < ed.times.size(); ++k)
      rows.push_back({ed.times[k], m.abs_err_re[k], m.abs_err_im[k]});
    ctx.emit("bond-scan_chi" + std::to_string(c.chi_list[i]) + ".csv",
             {"t", "abs_err_re", "abs_err_im"}, rows);
    summary.push_back({static_cast<double>(c.chi_list[i]), m.max_re, m.final_re,
                       m.max_im, m.final_im});
  }
  ctx.emit("bond-scan_summary.csv",
           {"chi", "max_err_re", "final_err_re", "max_err_im", "final_err_im"}, summary);
}

void run_dissipation_scan(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const RecordOptions rec{0};

  const int count = static_cast<int>(c.gamma.size());
  std::vector<Trajectory> tn(static_cast<std::size_t>(count)), ed(static_cast<std::size_t>(count));
  parallel_for(2 * count, ctx.threads, [&](int i) {
    const std::size_t g = static_cast<std::size_t>(i / 2);
    if (i % 2 == 0)
      tn[g] = run_one(c, c.gamma[g], "tdvp", c.chi_max, rec);
    else
      ed[g] = run_one(c, c.gamma[g], "ed", c.chi_max, rec);
  });

  std::vector<std::vector<double>> summary;
  for (std::size_t g = 0; g < c.gamma.size(); ++g) {
    const ErrorMetrics m = error_metrics(tn[g], ed[g]);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < ed[g].times.size(); ++k)
      rows.push_back({ed[g].times[k], m.abs_err_re[k], m.abs_err_im[k]});
    ctx.emit("dissipation-scan_gamma" + number_tag(c.gamma[g]) + ".csv",
             {"t", "abs_err_re", "abs_err_im"}, rows);
    summary.push_back({c.gamma[g], m.max_re, m.final_re, m.max_im, m.final_im});
  }
  ctx.emit("dissipation-scan_summary.csv",
           {"gamma", "max_err_re", "final_err_re", "max_err_im", "final_err_im"}, summary);
}

void run_opee(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  RecordOptions rec;
  rec.opee_cadence = std::max(1, c.opee_cadence);

  std::vector<Trajectory> runs(c.gamma.size());
  parallel_for(static_cast<int>(c.gamma.size()), ctx.threads, [&](int i) {
    runs[static_cast<std::size_t>(i)] =
        run_one(c, c.gamma[static_cast<std::size_t>(i)], c.engine, c.chi_max, rec);
  });

  for (std::size_t g = 0; g < c.gamma.size(); ++g) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < runs[g].times.size(); ++k)
      if (std::isfinite(runs[g].opee_mid[k]))
        rows.push_back({runs[g].times[k], runs[g].opee_mid[k]});
    ctx.emit("opee_gamma" + number_tag(c.gamma[g]) + ".csv", {"t", "opee"}, rows);
  }
}

void run_qfi_dynamics(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  if (c.engine == "ed")
    throw ConfigError("qfi-dynamics requires a tensor-network engine (tdvp or wii)");

  QfiDynamicsOptions opt;
  opt.dt = config_dt_us(c);
  opt.n_steps = c.n_steps;
  opt.cadence = c.qfi_cadence;
  opt.derivative.delta = two_pi * c.qfi_delta_mhz;
  opt.engine = engine_from_config(c);
  opt.init = initial_from_config(c);
  opt.qfi.chi_sld = c.qfi_chi_sld;
  opt.qfi.restarts = c.qfi_restarts;
  opt.qfi.seed = c.seed;
  opt.smoothing_window = c.qfi_smoothing;

  const ModelSpec m = model_from_config(c, c.gamma.front());
  const QfiSeries series = qfi_dynamics(m, opt);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < series.points.size(); ++k) {
    const QfiPoint& p = series.points[k];
    rows.push_back({p.t, p.f_raw, p.f_phase, series.f_phase_smooth[k],
                    p.converged ? 1.0 : 0.0, static_cast<double>(p.sweeps)});
  }
  ctx.emit("qfi-dynamics.csv",
           {"t", "f_raw", "f_phase", "f_phase_smooth", "converged", "sweeps"}, rows);
}

}  // namespace

ErrorMetrics error_metrics(const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size())
    throw std::domain_error("error_metrics: time grids differ in length");
  for (std::size_t k = 0; k < a.times.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-12)
      throw std::domain_error("error_metrics: time grids differ");

  ErrorMetrics m;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    const cd d = a.mean_sz[k] - b.mean_sz[k];
    m.abs_err_re.push_back(std::abs(d.real()));
    m.abs_err_im.push_back(std::abs(d.imag()));
    m.max_re = std::max(m.max_re, m.abs_err_re.back());
    m.max_im = std::max(m.max_im, m.abs_err_im.back());
  }
  if (!m.abs_err_re.empty()) {
    m.final_re = m.abs_err_re.back();
    m.final_im = m.abs_err_im.back();
  }
  return m;
}

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry = {
      {"engine-comparison",
       "mean <Sz> from the two-site integrator, the first-order propagator and the "
       "dense reference on one model"},
      {"bond-scan", "error vs the dense reference across a grid of bond-dimension caps"},
      {"dissipation-scan", "error vs the dense reference across dephasing rates"},
      {"opee", "middle-cut operator-space entanglement entropy per dephasing rate"},
      {"qfi-dynamics", "quantum Fisher information of the splitting parameter over time"},
  };
  return registry;
}

RunRecord run_experiment(const ExperimentConfig& c, int threads) {
  validate_config(c);
  bool known = false;
  for (const auto& e : experiment_registry()) known = known || e.name == c.experiment;
  if (!known) throw ConfigError("unknown experiment: " + c.experiment);

  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + c.out_dir);

  RunRecord record;
  record.config_hash = config_hash(c);
  record.version = version_string();

  Context ctx{c, c.out_dir,
              "# config=" + record.config_hash + " seed=" + std::to_string(c.seed),
              std::max(1, threads), &record.csv_paths};

  const auto t0 = std::chrono::steady_clock::now();
  if (c.experiment == "engine-comparison") run_engine_comparison(ctx);
  else if (c.experiment == "bond-scan") run_bond_scan(ctx);
  else if (c.experiment == "dissipation-scan") run_dissipation_scan(ctx);
  else if (c.experiment == "opee") run_opee(ctx);
  else if (c.experiment == "qfi-dynamics") run_qfi_dynamics(ctx);
  const auto t1 = std::chrono::steady_clock::now();
  record.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return record;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const std::string& comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EngineError("cannot open output file: " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << "\n" << comment << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw EngineError("csv row width mismatch in " + path);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!std::isfinite(row[i]))
        throw EngineError("non-finite value in " + path);
      out << (i ? "," : "") << format_double_17(row[i]);
    }
    out << "\n";
  }
  if (!out.good()) throw EngineError("write failure on " + path);
}

std::string version_string() { return "nvtensor 0.1.0"; }

}  // namespace nvt
