#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "ngalerkin/harness.hpp"

namespace ngalerkin {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

MissingInputs::MissingInputs(std::vector<std::string> names)
    : std::runtime_error([&] {
        std::string s = "missing inputs:";
        for (const auto& n : names) s += " " + n;
        return s;
      }()),
      names_(std::move(names)) {}

namespace {

class CsvWriter {
 public:
  CsvWriter() = default;
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) { open(path, header); }

  void open(const fs::path& path, const std::vector<std::string>& header) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }
  bool is_open() const { return out_.is_open(); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::string num(double v) { return format_double(v); }

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return xs;
}

std::vector<std::size_t> snapshot_steps(const RunConfig& cfg) {
  std::set<std::size_t> ks;
  for (std::size_t k = 0; k <= cfg.stepper.n_steps; k += cfg.stride) ks.insert(k);
  ks.insert(cfg.stepper.n_steps);
  return {ks.begin(), ks.end()};
}

/// Points the d > 1 solution slices pass through.
std::vector<std::vector<double>> slice_anchors(const ProblemDef& problem, double t, const Ensemble& ens,
                                               const MomentEstimate* bench) {
  const std::size_t d = problem.dim();
  if (problem.name == "advection5d") {
    const GaussianMixture mix = advection_initial_mixture(d);
    const std::vector<double> shift = advection_displacement(t, d);
    std::vector<std::vector<double>> out;
    for (auto mu : mix.means) {
      for (std::size_t j = 0; j < d; ++j) mu[j] += shift[j];
      out.push_back(std::move(mu));
    }
    return out;
  }
  if (bench) return {std::vector<double>(bench->mean.data(), bench->mean.data() + bench->mean.size())};
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += ens.point(i)[j];
  }
  for (double& v : mean) v /= static_cast<double>(std::max<std::size_t>(1, ens.size()));
  return {mean};
}

GaussianBias bias_from(const MomentEstimate& bench) {
  GaussianBias b;
  b.mean = bench.mean;
  b.covariance = bench.covariance;
  return b;
}

std::string benchmark_key(const RunConfig& cfg, const std::vector<double>& times) {
  std::string k = std::to_string(cfg.d) + "|" + std::to_string(cfg.benchmark.n_paths) + "|" +
                  num(cfg.benchmark.dt) + "|" + std::to_string(cfg.seed);
  for (double t : times) k += "|" + num(t);
  return k;
}

}  // namespace

const PathBundle& fokker_planck_benchmark(const RunConfig& cfg, const std::vector<double>& times) {
  static std::mutex mu;
  static std::map<std::string, PathBundle> cache;
  const std::string key = benchmark_key(cfg, times);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const std::uint64_t seed = Stream(cfg.seed).split("benchmark").key();
    it = cache.emplace(key, euler_maruyama(fokker_planck_sde(cfg.d), cfg.benchmark.n_paths, cfg.benchmark.dt,
                                           times, seed))
             .first;
  }
  return it->second;
}

RunSummary run_experiment(const RunConfig& cfg, Exec exec) {
  RunSummary summary;
  validate(cfg);
  fs::create_directories(cfg.out);
  std::ofstream log(cfg.out / "run.log", std::ios::binary | std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + (cfg.out / "run.log").string());

  const auto settings = describe(cfg);
  log << "config\n";
  for (const auto& [k, v] : settings) log << "  " << k << " = " << v << '\n';
  if (cfg.derived_from) {
    std::vector<std::string> diffs;
    for (std::size_t i = 0; i < settings.size() && i < cfg.derived_from->size(); ++i) {
      const auto& [k, v] = settings[i];
      const auto& [k0, v0] = (*cfg.derived_from)[i];
      if (k != "run.out" && (k != k0 || v != v0)) diffs.push_back(k + " (" + v0 + " -> " + v + ")");
    }
    log << "audit: differs from source config in";
    for (const auto& s : diffs) log << ' ' << s;
    log << '\n';
  }
  log.flush();

  auto fail = [&](const std::string& what) {
    log << "error: " << what << '\n';
    log.flush();
    summary.exit_status = 1;
    summary.error = what;
    return summary;
  };

  try {
    const ProblemDef problem = build_problem(cfg);
    const std::size_t d = problem.dim();
    const Stream root(cfg.seed);
    const Stream quad = root.split("quadrature");
    const RunSeeds seeds = derive_seeds(cfg.seed);
    const std::vector<std::size_t> snaps = snapshot_steps(cfg);
    const std::set<std::size_t> snap_set(snaps.begin(), snaps.end());

    const bool fp_metrics = problem.name == "fokker_planck" && (cfg.metrics.snis || cfg.metrics.entropy);
    const PathBundle* bench = nullptr;
    if (fp_metrics) {
      std::vector<double> times;
      for (std::size_t k : snaps) times.push_back(static_cast<double>(k) * cfg.stepper.dt);
      bench = &fokker_planck_benchmark(cfg, times);
      log << "benchmark: " << cfg.benchmark.n_paths << " Euler-Maruyama paths, dt = " << num(cfg.benchmark.dt)
          << '\n';
    }

    const FitResult fit = fit_initial(problem, cfg.fit, seeds.fit);
    log << "fit: misfit = " << num(fit.misfit) << ", iterations = " << fit.iterations << '\n';
    Ensemble ens = sample_initial_ensemble(problem, cfg.m, seeds.ensemble_init);
    ens.rng = Stream(seeds.sampler);
    log.flush();

    const bool with_l2 = cfg.metrics.l2 && static_cast<bool>(problem.analytic);
    const Quadrature l2_quad =
        d == 1 ? Quadrature::grid(cfg.metrics.l2_grid) : Quadrature::mc(cfg.metrics.l2_mc, quad.split("l2").key());

    CsvWriter errors(cfg.out / "errors.csv", {"k", "t", "rel_l2", "residual_rms", "rank", "sigma_max",
                                               "smallest_kept", "mean_displacement"});
    CsvWriter moments, entropy;
    if (bench && cfg.metrics.snis) {
      moments.open(cfg.out / "moments.csv",
                   {"t", "mean_err_avg", "mean_err_min", "mean_err_max", "cov_err_avg", "cov_diag_err_avg", "ess"});
    }
    if (bench && cfg.metrics.entropy) {
      entropy.open(cfg.out / "entropy.csv", {"t", "entropy", "entropy_std_error", "kde_entropy", "ess"});
    }

    auto snapshot = [&](const StepRecord& rec) {
      const std::string tag = std::to_string(rec.k);
      const std::vector<double> theta(rec.theta.begin(), rec.theta.end());
      {
        std::vector<std::string> h;
        for (std::size_t j = 0; j < d; ++j) h.push_back("x" + std::to_string(j));
        CsvWriter w(cfg.out / ("particles_" + tag + ".csv"), h);
        for (std::size_t i = 0; i < rec.ensemble.size(); ++i) {
          std::vector<std::string> row;
          for (double v : rec.ensemble.point(i)) row.push_back(num(v));
          w.row(row);
        }
      }
      {
        CsvWriter w(cfg.out / ("params_" + tag + ".csv"), {"index", "theta"});
        for (std::size_t j = 0; j < theta.size(); ++j) w.row({std::to_string(j), num(theta[j])});
      }
      std::optional<MomentEstimate> bench_m;
      if (bench) bench_m = mc_moments(*bench, rec.t);
      {
        const bool exact = static_cast<bool>(problem.analytic);
        if (d == 1) {
          std::vector<std::string> h{"x", "u"};
          if (exact) h.push_back("exact");
          CsvWriter w(cfg.out / ("solution_" + tag + ".csv"), h);
          for (double x : linspace(problem.domain.lower[0], problem.domain.upper[0], 1000)) {
            const std::vector<double> xv{x};
            std::vector<std::string> row{num(x), num(problem.param->eval(theta, xv))};
            if (exact) row.push_back(num(problem.analytic(rec.t, xv)));
            w.row(row);
          }
        } else {
          std::vector<std::string> h{"slice", "axis", "x", "u"};
          if (exact) h.push_back("exact");
          CsvWriter w(cfg.out / ("solution_" + tag + ".csv"), h);
          const auto anchors = slice_anchors(problem, rec.t, rec.ensemble, bench_m ? &*bench_m : nullptr);
          for (std::size_t s = 0; s < anchors.size(); ++s) {
            for (std::size_t a = 0; a < d; ++a) {
              for (double x : linspace(problem.domain.lower[a], problem.domain.upper[a], 200)) {
                std::vector<double> xv = anchors[s];
                xv[a] = x;
                std::vector<std::string> row{std::to_string(s), std::to_string(a), num(x),
                                             num(problem.param->eval(theta, xv))};
                if (exact) row.push_back(num(problem.analytic(rec.t, xv)));
                w.row(row);
              }
            }
          }
        }
      }
      if (d > 1 && !cfg.metrics.marginal_axes.empty()) {
        const bool exact = static_cast<bool>(problem.analytic);
        std::vector<std::string> h{"axis", "x", "value", "std_error"};
        if (exact) h.push_back("exact");
        CsvWriter w(cfg.out / ("marginal_" + tag + ".csv"), h);
        const std::uint64_t mseed = quad.split("marginal").key();
        for (std::size_t a : cfg.metrics.marginal_axes) {
          for (double x : linspace(problem.domain.lower[a], problem.domain.upper[a], cfg.metrics.marginal_points)) {
            const McEstimate m = marginal(problem, theta, a, x, cfg.metrics.marginal_samples, mseed);
            std::vector<std::string> row{std::to_string(a), num(x), num(m.value), num(m.std_error)};
            if (exact) {
              const double t = rec.t;
              const ScalarField f = [&](std::span<const double> y) { return problem.analytic(t, y); };
              row.push_back(num(marginal(f, problem.domain, a, x, cfg.metrics.marginal_samples, mseed).value));
            }
            w.row(row);
          }
        }
      }
      if (bench_m) {
        const GaussianBias bias = bias_from(*bench_m);
        if (cfg.metrics.snis) {
          const MomentEstimate est = snis_moments(problem, theta, bias, cfg.metrics.snis_samples,
                                                  quad.split("snis").key());
          const MomentErrors e = relative_moment_errors(est, *bench_m);
          moments.row({num(rec.t), num(e.mean.avg), num(e.mean.min), num(e.mean.max), num(e.cov.avg),
                       num(e.cov_diag.avg), num(est.ess)});
          if (rec.k == cfg.stepper.n_steps) summary.final_moment_errors = e;
        }
        if (cfg.metrics.entropy) {
          const EntropyEstimate h = snis_entropy(problem, theta, bias, cfg.metrics.snis_samples,
                                                 quad.split("entropy").key());
          const std::size_t np = std::min(cfg.metrics.kde_paths, bench->n_paths);
          const auto& states = bench->states[bench->time_index(rec.t)];
          const double kde = kde_entropy(std::span<const double>(states.data(), np * d), d,
                                         KdeBandwidth::silverman(), exec);
          entropy.row({num(rec.t), num(h.value), num(h.std_error), num(kde), num(h.ess)});
          if (rec.k == cfg.stepper.n_steps) summary.final_entropy = h.value;
        }
      }
    };

    auto observer = [&](const StepRecord& rec) {
      if (rec.k > 0) {
        std::string l2;
        if (with_l2) {
          const double e = relative_l2(problem, rec.theta, rec.t, l2_quad);
          l2 = num(e);
          summary.final_rel_l2 = e;
        }
        const StepDiagnostics& g = rec.diagnostics;
        errors.row({std::to_string(rec.k), num(rec.t), l2, num(g.residual_rms), std::to_string(g.rank),
                    num(g.sigma_max), num(g.smallest_kept), num(g.mean_displacement)});
        summary.steps_completed = rec.k;
      }
      if (snap_set.count(rec.k)) snapshot(rec);
    };

    Trajectory traj;
    try {
      traj = integrate(problem, cfg.stepper, cfg.sampler, fit.theta, std::move(ens), {observer}, exec);
    } catch (const std::exception& ex) {
      return fail(ex.what());
    }
    if (!traj.thetas.empty()) summary.final_theta = traj.thetas.back();
    if (traj.error) return fail(*traj.error);
    log << "completed " << summary.steps_completed << " steps\n";
    if (summary.final_rel_l2) log << "final rel_l2 = " << num(*summary.final_rel_l2) << '\n';
    if (summary.final_moment_errors) {
      log << "final mean error avg = " << num(summary.final_moment_errors->mean.avg)
          << ", max = " << num(summary.final_moment_errors->mean.max) << '\n';
    }
  } catch (const std::exception& ex) {
    return fail(ex.what());
  }
  return summary;
}

// --- plot data -----------------------------------------------------------------------------

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::ptrdiff_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }
  std::vector<double> numbers(std::ptrdiff_t c) const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(std::stod(r.at(static_cast<std::size_t>(c))));
    return out;
  }
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (std::getline(in, line)) t.header = split_line(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split_line(line));
  }
  return t;
}

/// Snapshot indices present for files named <prefix><k>.csv.
std::vector<std::size_t> indices(const fs::path& dir, const std::string& prefix) {
  std::vector<std::size_t> ks;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n.rfind(prefix, 0) != 0 || e.path().extension() != ".csv") continue;
    const std::string mid = n.substr(prefix.size(), n.size() - prefix.size() - 4);
    if (mid.empty() || !std::all_of(mid.begin(), mid.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    ks.push_back(std::stoul(mid));
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool points = false;
};

void write_svg(const fs::path& path, const std::string& title, const std::vector<Series>& series, bool logy) {
  const double W = 640, H = 400, L = 60, R = 20, T = 30, B = 40;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto ty = [&](double y) { return logy ? std::log10(y) : y; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(ty(s.y[i]))) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << L << "\" y=\"" << H - 20 << "\" font-size=\"11\">" << num(x0) << "</text>\n";
  o << "<text x=\"" << W - R << "\" y=\"" << H - 20 << "\" font-size=\"11\" text-anchor=\"end\">" << num(x1)
    << "</text>\n";
  o << "<text x=\"5\" y=\"" << H - B << "\" font-size=\"11\">" << (logy ? "1e" : "") << num(y0) << "</text>\n";
  o << "<text x=\"5\" y=\"" << T + 10 << "\" font-size=\"11\">" << (logy ? "1e" : "") << num(y1) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 5];
    const Series& S = series[s];
    if (S.points) {
      for (std::size_t i = 0; i < S.x.size(); ++i) {
        o << "<line x1=\"" << px(S.x[i]) << "\" x2=\"" << px(S.x[i]) << "\" y1=\"" << H - B << "\" y2=\""
          << H - B - 8 << "\" stroke=\"" << c << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
      for (std::size_t i = 0; i < S.x.size(); ++i) {
        if (std::isfinite(ty(S.y[i]))) o << px(S.x[i]) << ',' << py(S.y[i]) << ' ';
      }
      o << "\"/>\n";
    }
    o << "<text x=\"" << L + 10 << "\" y=\"" << T + 15 + 14 * s << "\" font-size=\"11\" fill=\"" << c << "\">"
      << S.name << "</text>\n";
  }
  o << "</svg>\n";
}

}  // namespace

std::vector<fs::path> emit_plotdata(const fs::path& run_dir, bool svg) {
  std::vector<std::string> missing;
  if (!fs::is_directory(run_dir)) throw MissingInputs({run_dir.string()});
  if (!fs::exists(run_dir / "errors.csv")) missing.push_back("errors.csv");
  const std::vector<std::size_t> sol = indices(run_dir, "solution_");
  if (sol.empty()) missing.push_back("solution_<k>.csv");
  for (std::size_t k : sol) {
    if (!fs::exists(run_dir / ("particles_" + std::to_string(k) + ".csv"))) {
      missing.push_back("particles_" + std::to_string(k) + ".csv");
    }
  }
  if (!missing.empty()) throw MissingInputs(missing);

  const fs::path out = run_dir / "plot";
  fs::create_directories(out);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
    CsvWriter w(out / name, header);
    for (const auto& r : rows) w.row(r);
    written.push_back(out / name);
  };
  auto svg_out = [&](const std::string& name, const std::string& title, const std::vector<Series>& s, bool logy) {
    if (!svg) return;
    write_svg(out / name, title, s, logy);
    written.push_back(out / name);
  };

  {
    const Table e = read_csv(run_dir / "errors.csv");
    const auto tc = e.column("t"), lc = e.column("rel_l2"), rc = e.column("residual_rms");
    const bool has_l2 = lc >= 0 && !e.rows.empty() && !e.rows.front().at(static_cast<std::size_t>(lc)).empty();
    const auto vc = has_l2 ? lc : rc;
    const std::string metric = has_l2 ? "rel_l2" : "residual_rms";
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : e.rows) rows.push_back({r.at(static_cast<std::size_t>(tc)), r.at(static_cast<std::size_t>(vc))});
    emit("error_vs_time.csv", {"t", metric}, rows);
    svg_out("error_vs_time.svg", metric + " vs time", {{metric, e.numbers(tc), e.numbers(vc)}}, true);
  }

  for (std::size_t k : sol) {
    const std::string tag = std::to_string(k);
    const Table s = read_csv(run_dir / ("solution_" + tag + ".csv"));
    const Table p = read_csv(run_dir / ("particles_" + tag + ".csv"));
    const auto ec = s.column("exact");
    if (s.column("axis") < 0) {
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : s.rows) rows.push_back(r);
      emit("slice_" + tag + ".csv", s.header, rows);
      std::vector<std::vector<std::string>> rug;
      for (const auto& r : p.rows) rug.push_back({r.at(0)});
      emit("rug_" + tag + ".csv", {"x"}, rug);
      std::vector<Series> ser{{"u", s.numbers(0), s.numbers(1)}};
      if (ec >= 0) ser.push_back({"exact", s.numbers(0), s.numbers(ec)});
      ser.push_back({"particles", p.numbers(0), std::vector<double>(p.rows.size(), 0.0), true});
      svg_out("slice_" + tag + ".svg", "solution at snapshot " + tag, ser, false);
    } else {
      std::map<std::pair<std::string, std::string>, std::vector<std::vector<std::string>>> groups;
      for (const auto& r : s.rows) {
        std::vector<std::string> row{r.at(2), r.at(3)};
        if (ec >= 0) row.push_back(r.at(static_cast<std::size_t>(ec)));
        groups[{r.at(0), r.at(1)}].push_back(row);
      }
      std::vector<std::string> h{"x", "u"};
      if (ec >= 0) h.push_back("exact");
      for (const auto& [key, rows] : groups) {
        emit("slice_" + tag + "_s" + key.first + "_axis" + key.second + ".csv", h, rows);
      }
    }
  }

  for (std::size_t k : indices(run_dir, "marginal_")) {
    const std::string tag = std::to_string(k);
    const Table m = read_csv(run_dir / ("marginal_" + tag + ".csv"));
    const auto ec = m.column("exact");
    std::map<std::string, std::vector<std::vector<std::string>>> vals, exact;
    for (const auto& r : m.rows) {
      vals[r.at(0)].push_back({r.at(1), r.at(2)});
      if (ec >= 0) exact[r.at(0)].push_back({r.at(1), r.at(static_cast<std::size_t>(ec))});
    }
    for (const auto& [axis, rows] : vals) emit("marginal_" + tag + "_axis" + axis + ".csv", {"x", "value"}, rows);
    for (const auto& [axis, rows] : exact) {
      emit("marginal_exact_" + tag + "_axis" + axis + ".csv", {"x", "value"}, rows);
    }
  }

  if (fs::exists(run_dir / "entropy.csv")) {
    const Table e = read_csv(run_dir / "entropy.csv");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : e.rows) rows.push_back({r.at(0), r.at(1), r.at(3)});
    emit("entropy_vs_time.csv", {"t", "entropy", "kde_entropy"}, rows);
    svg_out("entropy_vs_time.svg", "entropy vs time",
            {{"neural Galerkin", e.numbers(0), e.numbers(1)}, {"KDE of benchmark", e.numbers(0), e.numbers(3)}},
            false);
  }
  if (fs::exists(run_dir / "moments.csv")) {
    const Table m = read_csv(run_dir / "moments.csv");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : m.rows) rows.push_back({r.at(0), r.at(1), r.at(2), r.at(3)});
    emit("mean_error_vs_time.csv", {"t", "avg", "min", "max"}, rows);
    svg_out("mean_error_vs_time.svg", "relative mean error vs time",
            {{"avg", m.numbers(0), m.numbers(1)}, {"min", m.numbers(0), m.numbers(2)},
             {"max", m.numbers(0), m.numbers(3)}},
            true);
  }
  return written;
}

}  // namespace ngalerkin
