// SPDX-License-Identifier: Apache-2.0
//
// srif: batch driver for the interferometric superresolution toolkit.
// Every subcommand writes one deterministic table (CSV with '#' metadata
// lines, or a JSON mirror); identical configurations and seeds produce
// byte-identical output.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "srif/srif.hpp"

using namespace srif;
using nlohmann::json;

namespace {

constexpr double arcsec_to_rad = M_PI / (180.0 * 3600.0);

struct GlobalOpts {
  std::string config_path;
  std::string out_path = "-";
  std::string format = "csv";
  std::uint64_t seed = 12345;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

std::vector<double> make_range(double start, double stop, int points,
                               bool log_spaced) {
  if (points < 2) throw CLI::ValidationError("range needs points >= 2");
  std::vector<double> xs(points);
  if (log_spaced) {
    if (start <= 0.0 || stop <= 0.0)
      throw CLI::ValidationError("log range needs positive endpoints");
    const double l0 = std::log(start), l1 = std::log(stop);
    for (int i = 0; i < points; ++i)
      xs[i] = std::exp(l0 + (l1 - l0) * i / (points - 1));
  } else {
    for (int i = 0; i < points; ++i)
      xs[i] = start + (stop - start) * i / (points - 1);
  }
  return xs;
}

/// Ordered parallel map: result[i] = fn(i), workers stride over indices.
std::vector<double> parallel_map(std::size_t n, unsigned threads,
                                 const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += threads) out[i] = fn(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

void emit(const io::Table& table, const GlobalOpts& g) {
  std::ostringstream buffer;
  if (g.format == "json")
    io::write_json(table, buffer);
  else
    io::write_csv(table, buffer);
  if (g.out_path.empty() || g.out_path == "-") {
    std::cout << buffer.str();
    return;
  }
  std::ofstream out(g.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output: " + g.out_path);
  out << buffer.str();
}

io::Table base_table(const std::string& subcommand, const GlobalOpts& g) {
  io::Table t;
  t.add_meta("tool", "srif");
  t.add_meta("version", srif::version);
  t.add_meta("subcommand", subcommand);
  t.add_meta("seed", std::to_string(g.seed));
  return t;
}

/// Deferred config-file override: flags win, then JSON keys, then defaults.
struct ConfigBinder {
  std::vector<std::function<void(const json&)>> appliers;

  template <typename T>
  CLI::Option* bind(CLI::App* cmd, const std::string& flag, T& var,
                    const std::string& desc) {
    CLI::Option* opt = cmd->add_option(flag, var, desc);
    std::string key = flag;
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    appliers.push_back([opt, &var, key](const json& cfg) {
      if (opt->count() == 0 && cfg.contains(key))
        var = cfg.at(key).get<T>();
    });
    return opt;
  }

  void apply(const json& cfg) const {
    for (const auto& fn : appliers) fn(cfg);
  }
};

void bind_quadrature(CLI::App* cmd, ConfigBinder& binder,
                     povm::IntegrationConfig& cfg) {
  binder.bind(cmd, "--radial-nodes", cfg.radial_nodes,
              "quadrature nodes per amplitude axis");
  binder.bind(cmd, "--phase-nodes", cfg.phase_nodes,
              "quadrature nodes per phase axis");
  binder.bind(cmd, "--cutoff-b", cfg.b,
              "amplitude integration cutoff (0 = automatic)");
  binder.bind(cmd, "--fd-step", cfg.fd_step,
              "finite-difference step [phase units]");
  cmd->add_flag("--check-convergence", cfg.check_convergence,
                "re-run quadratures with doubled radial nodes and fail on "
                "disagreement");
}

// --------------------------------------------------------------------------
// Subcommand implementations
// --------------------------------------------------------------------------

void add_quadrature_meta(io::Table& table, const povm::IntegrationConfig& cfg,
                         double eps) {
  table.add_meta("radial_nodes", std::to_string(cfg.radial_nodes));
  table.add_meta("phase_nodes", std::to_string(cfg.phase_nodes));
  table.add_meta("cutoff_b", cfg.resolved_cutoff(eps));
  table.add_meta("fd_step", cfg.fd_step);
}


struct QfiScanOpts {
  std::vector<double> eps{0.2, 1.0, 5.0};
  double start = 0.0, stop = 4.0 * M_PI;
  int points = 201;
  double u0 = 1.0;
  std::string spacing = "linear";
};

int run_qfi_scan(const QfiScanOpts& o, const GlobalOpts& g) {
  auto table = base_table("qfi-scan", g);
  table.add_meta("u0", o.u0);
  table.columns = {"eps", "theta2", "f22", "f22_per_photon", "f11"};
  const auto grid = make_range(o.start, o.stop, o.points, o.spacing == "log");
  for (double eps : o.eps) {
    const auto fi = parallel_map(grid.size(), g.threads, [&](std::size_t i) {
      return fisher::qfi_separation_closed(
          scene::SceneParams::reduced(eps, 0.0, grid[i], o.u0));
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto sc = scene::SceneParams::reduced(eps, 0.0, grid[i], o.u0);
      table.add_row({eps, grid[i], fi[i], fi[i] / (eps * o.u0 * o.u0),
                     fisher::qfi_centroid_closed(sc)});
    }
  }
  emit(table, g);
  return 0;
}

struct PmnScanOpts {
  double eps = 0.1;
  double start = 0.0, stop = 4.0 * M_PI;
  int points = 201;
  int mmax = 2, nmax = 2;
  std::string spacing = "linear";
};

int run_pmn_scan(const PmnScanOpts& o, const GlobalOpts& g) {
  auto table = base_table("pmn-scan", g);
  table.add_meta("eps", o.eps);
  table.columns = {"dphi"};
  for (int m = 0; m <= o.mmax; ++m)
    for (int n = 0; n <= o.nmax; ++n)
      table.columns.push_back("p_" + std::to_string(m) + "_" +
                              std::to_string(n));
  table.columns.push_back("tail");
  for (double dphi :
       make_range(o.start, o.stop, o.points, o.spacing == "log")) {
    const auto dist = povm::aligned_pmn(
        scene::SceneParams::reduced(o.eps, 0.0, dphi), o.mmax, o.nmax);
    std::vector<double> row{dphi};
    for (int m = 0; m <= o.mmax; ++m)
      for (int n = 0; n <= o.nmax; ++n) row.push_back(dist.p(m, n));
    row.push_back(dist.tail_mass);
    table.add_row(std::move(row));
  }
  emit(table, g);
  return 0;
}

struct TruncatedFiOpts {
  double eps = 0.1;
  double start = 1e-3, stop = 2.0 * M_PI;
  int points = 80;
  std::vector<int> windows{1, 2, 3, 4};
  std::string mode = "discard";
  std::string spacing = "linear";
  povm::IntegrationConfig cfg;
};

int run_truncated_fi(const TruncatedFiOpts& o, const GlobalOpts& g) {
  auto table = base_table("truncated-fi", g);
  table.add_meta("eps", o.eps);
  table.add_meta("mode", o.mode);
  add_quadrature_meta(table, o.cfg, o.eps);
  table.columns = {"window", "theta2", "fi", "qfi", "fi_over_qfi"};
  const auto mode = o.mode == "overflow" ? povm::TruncationMode::overflow
                                         : povm::TruncationMode::discard;
  const povm::IntegrationConfig& cfg = o.cfg;
  const auto grid = make_range(o.start, o.stop, o.points, o.spacing == "log");
  const auto base = scene::SceneParams::reduced(o.eps, 0.0, o.start);
  for (int w : o.windows) {
    const auto fi = parallel_map(grid.size(), g.threads, [&](std::size_t i) {
      const auto sc = base.with_positions(0.0, grid[i]);
      return povm::aligned_fi(sc, w, w, cfg, mode);
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double qfi = fisher::qfi_separation_closed(
          base.with_positions(0.0, grid[i]));
      table.add_row({double(w), grid[i], fi[i], qfi, fi[i] / qfi});
    }
  }
  emit(table, g);
  return 0;
}

struct CutoffScanOpts {
  double eps = 0.01;
  double theta2 = 1e-3;
  double c = 1e-6;
  double start = 0.05, stop = 1.2;
  int points = 24;
  int mmax = 3, nmax = 3;
  std::string spacing = "linear";
  povm::IntegrationConfig cfg;
};

int run_cutoff_scan(const CutoffScanOpts& o, const GlobalOpts& g) {
  auto table = base_table("cutoff-scan", g);
  table.add_meta("eps", o.eps);
  table.add_meta("theta2", o.theta2);
  table.add_meta("c", o.c);
  add_quadrature_meta(table, o.cfg, o.eps);
  table.columns = {"b", "fi"};
  const auto base = scene::SceneParams::reduced(o.eps, 0.0, o.theta2);
  const double delta = scene::centroid_phase(base) - o.c;
  const auto grid = make_range(o.start, o.stop, o.points, o.spacing == "log");
  const auto fi = parallel_map(grid.size(), g.threads, [&](std::size_t i) {
    povm::IntegrationConfig cfg = o.cfg;
    cfg.b = grid[i];
    return povm::misaligned_fi(base, delta, cfg, o.mmax, o.nmax);
  });
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.add_row({grid[i], fi[i]});
  emit(table, g);
  return 0;
}

struct MisalignScanOpts {
  std::string scan = "theta2";  // or "c"
  double eps = 0.01;
  double c = 1e-3;
  double theta2 = 1e-3;
  double start = 1e-4, stop = 1.0;
  int points = 41;
  int mmax = 3, nmax = 3;
  std::string spacing = "log";
  povm::IntegrationConfig cfg;
};

int run_misalignment_scan(const MisalignScanOpts& o, const GlobalOpts& g) {
  auto table = base_table("misalignment-scan", g);
  table.add_meta("eps", o.eps);
  table.add_meta("scan", o.scan);
  add_quadrature_meta(table, o.cfg, o.eps);
  const povm::IntegrationConfig& cfg = o.cfg;
  const auto grid = make_range(o.start, o.stop, o.points, o.spacing == "log");
  if (o.scan == "theta2") {
    table.add_meta("c", o.c);
    table.columns = {"theta2", "fi"};
    const auto base = scene::SceneParams::reduced(o.eps, 0.0, o.theta2);
    const double delta = scene::centroid_phase(base) - o.c;
    const auto fi = parallel_map(grid.size(), g.threads, [&](std::size_t i) {
      return povm::misaligned_fi(base.with_positions(0.0, grid[i]), delta,
                                 cfg, o.mmax, o.nmax);
    });
    for (std::size_t i = 0; i < grid.size(); ++i)
      table.add_row({grid[i], fi[i]});
  } else if (o.scan == "c") {
    table.add_meta("theta2", o.theta2);
    table.columns = {"c", "fi"};
    const auto base = scene::SceneParams::reduced(o.eps, 0.0, o.theta2);
    const double psi = scene::centroid_phase(base);
    const auto fi = parallel_map(grid.size(), g.threads, [&](std::size_t i) {
      return povm::misaligned_fi(base, psi - grid[i], cfg, o.mmax, o.nmax);
    });
    for (std::size_t i = 0; i < grid.size(); ++i)
      table.add_row({grid[i], fi[i]});
  } else {
    throw CLI::ValidationError("--scan must be theta2 or c");
  }
  emit(table, g);
  return 0;
}

struct CompareConventionalOpts {
  double lambda = 5e-3;    // wavelength [m]
  double baseline = 1e4;   // [m]
  double eps = 0.01;
  double centroid_phase = 2.0 * M_PI / 3.0;
  std::vector<double> sep_arcsec{0.05, 0.01, 0.005};
  std::string delays = "mirrored";  // or "quadrature"
  int scan_points = 0;  // > 0 switches to a separation scan
  double scan_start_arcsec = 2e-3, scan_stop_arcsec = 0.2;
  povm::IntegrationConfig cfg;
};

int run_compare_conventional(const CompareConventionalOpts& o,
                             const GlobalOpts& g) {
  auto table = base_table("compare-conventional", g);
  const double k = 2.0 * M_PI / o.lambda;
  const double u0 = k * o.baseline;  // phase per radian of sky angle
  table.add_meta("lambda_m", o.lambda);
  table.add_meta("baseline_m", o.baseline);
  table.add_meta("eps", o.eps);
  table.add_meta("centroid_phase", o.centroid_phase);
  table.add_meta("delays", o.delays);
  add_quadrature_meta(table, o.cfg, o.eps);
  table.columns = {"sep_arcsec", "dphi",      "fi_optimal",
                   "fi_conv_a",  "fi_conv_b", "fi_conventional",
                   "qfi",        "ratio"};
  const auto rule = o.delays == "quadrature"
                        ? limits::ConventionalDelays::quadrature_pair
                        : limits::ConventionalDelays::mirrored_pair;
  const povm::IntegrationConfig& cfg = o.cfg;

  std::vector<double> seps = o.sep_arcsec;
  if (o.scan_points > 0)
    seps = make_range(o.scan_start_arcsec, o.scan_stop_arcsec, o.scan_points,
                      true);

  std::vector<std::vector<double>> rows(seps.size());
  parallel_map(seps.size(), g.threads, [&](std::size_t i) {
    const double theta2 = seps[i] * arcsec_to_rad;  // angular separation
    const auto sc = scene::SceneParams(k, o.baseline, 1.0, 0.0, 0.5,
                                       2.0 * o.eps, 0.0, 0.0)
                        .with_positions(o.centroid_phase / u0, theta2);
    if (!sc.paraxial_ok())
      std::cerr << "warning: sources outside the small-angle regime "
                   "(|x|/s0 > 0.01); first-order phases extrapolated\n";
    const auto conv = limits::conventional_fi(sc, cfg, rule);
    const double opt = limits::optimal_fi(sc, cfg);
    rows[i] = {seps[i],
               u0 * theta2,
               opt,
               conv.fi[0],
               conv.fi[1],
               conv.combined,
               fisher::qfi_separation_closed(sc),
               opt / conv.combined};
    return 0.0;
  });
  for (auto& row : rows) table.add_row(std::move(row));
  emit(table, g);
  return 0;
}

struct WeakLimitOpts {
  double start = 1e-2, stop = 2.0 * M_PI - 1e-2;
  int points = 60;
  double xi = 0.0;
  bool consistency = false;
};

int run_weak_limit(const WeakLimitOpts& o, const GlobalOpts& g) {
  auto table = base_table("weak-limit", g);
  if (o.consistency) {
    table.add_meta("mode", "consistency");
    table.columns = {"eps",         "dphi",           "f22_over_weak_limit",
                     "d1_analytic", "d1_conditional", "f11_fit"};
    const auto report = limits::strong_weak_consistency(
        {1e-4, 3e-4, 1e-3}, make_range(0.3, 5.8, 12, false));
    for (const auto& r : report.rows)
      table.add_row({r.eps, r.dphi, r.f22_over_weak_limit, r.d1_analytic,
                     r.d1_conditional, r.f11_fit});
    emit(table, g);
    return 0;
  }
  table.add_meta("xi", o.xi);
  table.columns = {"dphi", "f11_weak", "f22_weak", "i11", "i22", "i12",
                   "d1",   "d2"};
  for (double dphi : make_range(o.start, o.stop, o.points, false)) {
    const auto sc = scene::SceneParams::reduced(1e-4, 0.2, dphi);
    const auto f = limits::weak_qfi(sc);
    const auto fi = limits::weak_fi_misaligned(sc, o.xi);
    const auto [d1, d2] = limits::weak_eigen_weights(sc);
    table.add_row({dphi, f(0, 0), f(1, 1), fi.i11, fi.i22, fi.i12, d1, d2});
  }
  emit(table, g);
  return 0;
}

struct DirtyBeamOpts {
  int grid = 256;
  int half_cells = 16;
  double du = 1.0;
  std::string kind = "beam";  // beam | image
  double source_l = 0.0, source_m = 0.0;  // point-source cell offsets
};

int run_dirty_beam(const DirtyBeamOpts& o, const GlobalOpts& g) {
  const auto pattern =
      limits::SamplingPattern::rectangle(o.grid, o.half_cells, o.du);
  Eigen::MatrixXd img;
  if (o.kind == "image") {
    Eigen::MatrixXd sky = Eigen::MatrixXd::Zero(o.grid, o.grid);
    const int c = o.grid / 2;
    sky(c + int(o.source_l), c + int(o.source_m)) = 1.0;
    img = limits::dirty_image(sky, pattern);
  } else {
    img = limits::dirty_beam(pattern);
  }

  std::ostringstream buffer;
  if (g.format == "pgm") {
    io::write_pgm(img, buffer);
  } else {
    buffer << "# tool = srif\n# version = " << srif::version
           << "\n# subcommand = dirty-beam\n# grid = " << o.grid
           << "\n# half_width_cells = " << o.half_cells
           << "\n# du = " << io::format_double(o.du)
           << "\n# image_spacing = " << io::format_double(pattern.image_spacing())
           << "\n# first_null_cells = "
           << limits::first_null_cells(o.kind == "image"
                                           ? limits::dirty_beam(pattern)
                                           : img)
           << "\n";
    io::write_matrix_csv(img, buffer);
  }
  if (g.out_path.empty() || g.out_path == "-")
    std::cout << buffer.str();
  else {
    std::ofstream out(g.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output: " + g.out_path);
    out << buffer.str();
  }
  return 0;
}

struct MultiQfiOpts {
  std::string scene_path;
  std::vector<std::string> params;  // e.g. 0x 0y 1x
  bool centroid_separation = false;
  double n_floor = 0.0;
  double step = 1e-5;
};

int run_multi_qfi(const MultiQfiOpts& o, const GlobalOpts& g) {
  if (o.scene_path.empty())
    throw CLI::ValidationError("multi-qfi requires --scene <file.json>");
  std::ifstream in(o.scene_path);
  if (!in) throw std::runtime_error("cannot open scene: " + o.scene_path);
  json doc = json::parse(in);
  const auto ms = multi::MultiScene::from_json(
      doc.contains("multiscene") ? doc.at("multiscene") : doc);

  auto table = base_table("multi-qfi", g);
  table.add_meta("scene", o.scene_path);
  table.add_meta("n_sources", std::to_string(ms.n_sources()));
  table.add_meta("n_detectors", std::to_string(ms.n_detectors()));

  if (o.centroid_separation) {
    if (ms.n_sources() != 2)
      throw CLI::ValidationError(
          "--centroid-separation needs exactly two sources");
    const auto f =
        multi::centroid_separation_qfi(ms, 0, 1, multi::CoordSelector::Axis::x,
                                       o.step, o.n_floor);
    table.columns = {"i", "j", "fi"};
    table.add_meta("parametrization", "centroid_separation_x");
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        table.add_row({double(i), double(j), f.values(i, j)});
    emit(table, g);
    return 0;
  }

  std::vector<multi::CoordSelector> selectors;
  std::string names;
  std::vector<std::string> picks = o.params;
  if (picks.empty())
    for (int s = 0; s < ms.n_sources(); ++s)
      picks.push_back(std::to_string(s) + "x");
  for (const auto& p : picks) {
    if (p.size() < 2) throw CLI::ValidationError("bad --param " + p);
    const int src = std::stoi(p.substr(0, p.size() - 1));
    const char axis = p.back();
    if (src < 0 || src >= ms.n_sources() || (axis != 'x' && axis != 'y'))
      throw CLI::ValidationError("bad --param " + p);
    selectors.push_back({src, axis == 'x' ? multi::CoordSelector::Axis::x
                                          : multi::CoordSelector::Axis::y});
    names += (names.empty() ? "" : ",") + p;
  }
  const auto f = multi::multi_qfi(ms, selectors, o.step, o.n_floor);
  table.add_meta("params", names);
  table.columns = {"i", "j", "fi"};
  for (Eigen::Index i = 0; i < f.values.rows(); ++i)
    for (Eigen::Index j = 0; j < f.values.cols(); ++j)
      table.add_row({double(i), double(j), f.values(i, j)});
  emit(table, g);
  return 0;
}

struct VerifyOpts {
  std::uint64_t samples = 1000000;
  std::string dump_counts;  // optional CSV of raw (m, n) tallies
  povm::IntegrationConfig cfg;
};

int run_verify(const VerifyOpts& o, const GlobalOpts& g) {
  auto table = base_table("verify", g);
  table.add_meta("samples", std::to_string(o.samples));
  table.columns = {"check", "value", "reference", "tolerance", "pass"};
  int check_id = 0;
  bool all_ok = true;
  const auto record = [&](double value, double reference, double tol) {
    const bool ok = std::abs(value - reference) <= tol;
    all_ok = all_ok && ok;
    table.add_row({double(++check_id), value, reference, tol, ok ? 1.0 : 0.0});
  };

  // Monte-Carlo counts against the analytic and quadrature distributions:
  // worst z-score over all outcomes with P > 1e-4 must stay below 4.
  const povm::IntegrationConfig& cfg = o.cfg;
  for (const double eps : {0.05, 0.3})
    for (const double c : {0.0, 0.5}) {
      const auto sc = scene::SceneParams::reduced(eps, 0.2, 1.0);
      const double delta = scene::centroid_phase(sc) - c;
      const auto batch =
          oracle::sample_counts(sc, delta, o.samples, g.seed, g.threads);
      if (!o.dump_counts.empty()) {
        io::Table counts = base_table("verify-counts", g);
        counts.add_meta("eps", eps);
        counts.add_meta("c", c);
        counts.columns = {"m", "n", "count"};
        for (const auto& [key, value] : batch.counts)
          counts.add_row({double(key.first), double(key.second),
                          double(value)});
        std::ostringstream name;
        name << o.dump_counts << "_eps" << eps << "_c" << c << ".csv";
        std::ofstream dump(name.str(), std::ios::binary);
        io::write_csv(counts, dump);
      }
      const auto emp = oracle::empirical_distribution(batch, 6, 6);
      const auto ana = c == 0.0 ? povm::aligned_pmn(sc, 6, 6)
                                : povm::misaligned_pmn(sc, delta, cfg, 6, 6);
      double worst_z = 0.0;
      for (int m = 0; m <= 6; ++m)
        for (int n = 0; n <= 6; ++n) {
          const double p = ana.p(m, n);
          if (p < 1e-4) continue;
          const double se = std::sqrt(p * (1.0 - p) / double(o.samples));
          worst_z = std::max(worst_z, std::abs(emp.p(m, n) - p) / se);
        }
      record(worst_z, 0.0, 4.0);
    }

  // aligned quadrature path equals the product form
  {
    const auto sc = scene::SceneParams::reduced(0.1, 0.3, 1.3);
    const auto a = povm::aligned_pmn(sc, 4, 4);
    const auto b =
        povm::misaligned_pmn(sc, scene::centroid_phase(sc), cfg, 4, 4);
    record((a.probs - b.probs).cwiseAbs().maxCoeff(), 0.0, 1e-6);
  }

  // counting FI saturates the separation QFI
  {
    const auto sc = scene::SceneParams::reduced(0.2, 0.0, 1.1);
    const auto [mm, nn] = povm::aligned_window_for_tail(sc, 1e-10);
    record(povm::aligned_fi(sc, mm, nn, cfg) /
               fisher::qfi_separation_closed(sc),
           1.0, 1e-4);
  }

  // numeric QFI agrees with the closed forms
  {
    const auto sc = scene::SceneParams::reduced(0.7, 0.1, 2.3);
    const auto f = fisher::qfi_two_telescope_numeric(sc);
    record(f.separation() / fisher::qfi_separation_closed(sc), 1.0, 1e-7);
    record(f.centroid() / fisher::qfi_centroid_closed(sc), 1.0, 1e-7);
  }

  // weak-source collapse
  {
    const auto report =
        limits::strong_weak_consistency({1e-4}, {0.7, 1.9, 3.1});
    record(report.max_f22_deviation, 0.0, 1e-3);
    record(report.max_d1_deviation, 0.0, 1e-3);
  }

  emit(table, g);
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information limits for two-telescope interferometric "
               "superresolution: figure-style data tables and verification "
               "suites"};
  app.require_subcommand(1);
  // global flags (--out, --seed, ...) may follow the subcommand name
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file (flags win)");
  app.add_option("--out", g.out_path, "output path ('-' for stdout)");
  app.add_option("--format", g.format, "csv | json (pgm for dirty-beam)")
      ->check(CLI::IsMember({"csv", "json", "pgm"}));
  app.add_option("--seed", g.seed, "RNG seed for sampling subcommands");
  app.add_option("--threads", g.threads, "worker threads for scans");

  QfiScanOpts qfi_opts;
  ConfigBinder qfi_bind;
  auto* cmd_qfi = app.add_subcommand("qfi-scan",
                                     "separation/centroid QFI versus "
                                     "separation, per-photon normalization "
                                     "included");
  qfi_bind.bind(cmd_qfi, "--eps", qfi_opts.eps, "effective strengths");
  qfi_bind.bind(cmd_qfi, "--start", qfi_opts.start, "theta2 range start");
  qfi_bind.bind(cmd_qfi, "--stop", qfi_opts.stop, "theta2 range stop");
  qfi_bind.bind(cmd_qfi, "--points", qfi_opts.points, "scan points");
  qfi_bind.bind(cmd_qfi, "--u0", qfi_opts.u0, "phase scale factor");
  qfi_bind.bind(cmd_qfi, "--spacing", qfi_opts.spacing, "linear | log grid");

  PmnScanOpts pmn_opts;
  ConfigBinder pmn_bind;
  auto* cmd_pmn = app.add_subcommand(
      "pmn-scan", "aligned counting probabilities versus phase separation");
  pmn_bind.bind(cmd_pmn, "--eps", pmn_opts.eps, "effective strength");
  pmn_bind.bind(cmd_pmn, "--start", pmn_opts.start, "dphi range start");
  pmn_bind.bind(cmd_pmn, "--stop", pmn_opts.stop, "dphi range stop");
  pmn_bind.bind(cmd_pmn, "--points", pmn_opts.points, "scan points");
  pmn_bind.bind(cmd_pmn, "--mmax", pmn_opts.mmax, "largest m column");
  pmn_bind.bind(cmd_pmn, "--nmax", pmn_opts.nmax, "largest n column");
  pmn_bind.bind(cmd_pmn, "--spacing", pmn_opts.spacing, "linear | log grid");

  TruncatedFiOpts trunc_opts;
  ConfigBinder trunc_bind;
  auto* cmd_trunc = app.add_subcommand(
      "truncated-fi", "counting FI with detectors that resolve only the "
                      "first few photon numbers");
  trunc_bind.bind(cmd_trunc, "--eps", trunc_opts.eps, "effective strength");
  trunc_bind.bind(cmd_trunc, "--start", trunc_opts.start, "theta2 start");
  trunc_bind.bind(cmd_trunc, "--stop", trunc_opts.stop, "theta2 stop");
  trunc_bind.bind(cmd_trunc, "--points", trunc_opts.points, "scan points");
  trunc_bind.bind(cmd_trunc, "--windows", trunc_opts.windows,
                  "square window sizes M = N");
  trunc_bind.bind(cmd_trunc, "--mode", trunc_opts.mode,
                  "discard | overflow handling of out-of-window events");
  trunc_bind.bind(cmd_trunc, "--spacing", trunc_opts.spacing,
                  "linear | log grid");
  bind_quadrature(cmd_trunc, trunc_bind, trunc_opts.cfg);

  CutoffScanOpts cut_opts;
  ConfigBinder cut_bind;
  auto* cmd_cut = app.add_subcommand(
      "cutoff-scan", "FI convergence in the amplitude integration cutoff");
  cut_bind.bind(cmd_cut, "--eps", cut_opts.eps, "effective strength");
  cut_bind.bind(cmd_cut, "--theta2", cut_opts.theta2, "separation");
  cut_bind.bind(cmd_cut, "--c", cut_opts.c, "misalignment");
  cut_bind.bind(cmd_cut, "--start", cut_opts.start, "cutoff range start");
  cut_bind.bind(cmd_cut, "--stop", cut_opts.stop, "cutoff range stop");
  cut_bind.bind(cmd_cut, "--points", cut_opts.points, "scan points");
  cut_bind.bind(cmd_cut, "--spacing", cut_opts.spacing, "linear | log grid");
  bind_quadrature(cmd_cut, cut_bind, cut_opts.cfg);

  MisalignScanOpts mis_opts;
  ConfigBinder mis_bind;
  auto* cmd_mis = app.add_subcommand(
      "misalignment-scan",
      "counting FI versus separation (fixed c) or versus c (fixed "
      "separation)");
  mis_bind.bind(cmd_mis, "--scan", mis_opts.scan, "theta2 | c");
  mis_bind.bind(cmd_mis, "--eps", mis_opts.eps, "effective strength");
  mis_bind.bind(cmd_mis, "--c", mis_opts.c, "misalignment (theta2 scan)");
  mis_bind.bind(cmd_mis, "--theta2", mis_opts.theta2,
                "separation (c scan)");
  mis_bind.bind(cmd_mis, "--start", mis_opts.start, "log range start");
  mis_bind.bind(cmd_mis, "--stop", mis_opts.stop, "log range stop");
  mis_bind.bind(cmd_mis, "--points", mis_opts.points, "scan points");
  mis_bind.bind(cmd_mis, "--spacing", mis_opts.spacing, "linear | log grid");
  mis_bind.bind(cmd_mis, "--mmax", mis_opts.mmax, "detector window M");
  mis_bind.bind(cmd_mis, "--nmax", mis_opts.nmax, "detector window N");
  bind_quadrature(cmd_mis, mis_bind, mis_opts.cfg);

  CompareConventionalOpts cmp_opts;
  ConfigBinder cmp_bind;
  auto* cmd_cmp = app.add_subcommand(
      "compare-conventional",
      "optimal counting versus fixed-delay coherence sampling, with the "
      "observation-time ratio");
  cmp_bind.bind(cmd_cmp, "--lambda", cmp_opts.lambda, "wavelength [m]");
  cmp_bind.bind(cmd_cmp, "--baseline", cmp_opts.baseline, "baseline [m]");
  cmp_bind.bind(cmd_cmp, "--eps", cmp_opts.eps, "effective strength");
  cmp_bind.bind(cmd_cmp, "--centroid-phase", cmp_opts.centroid_phase,
                "assumed centroid phase");
  cmp_bind.bind(cmd_cmp, "--sep-arcsec", cmp_opts.sep_arcsec,
                "angular separations [arcsec]");
  cmp_bind.bind(cmd_cmp, "--delays", cmp_opts.delays,
                "mirrored | quadrature delay pair");
  cmp_bind.bind(cmd_cmp, "--scan-points", cmp_opts.scan_points,
                "emit a log scan instead of the listed separations");
  cmp_bind.bind(cmd_cmp, "--scan-start-arcsec", cmp_opts.scan_start_arcsec,
                "scan start");
  cmp_bind.bind(cmd_cmp, "--scan-stop-arcsec", cmp_opts.scan_stop_arcsec,
                "scan stop");
  bind_quadrature(cmd_cmp, cmp_bind, cmp_opts.cfg);

  WeakLimitOpts weak_opts;
  ConfigBinder weak_bind;
  auto* cmd_weak = app.add_subcommand(
      "weak-limit", "weak-source formulas and the strong-to-weak collapse");
  weak_bind.bind(cmd_weak, "--start", weak_opts.start, "dphi start");
  weak_bind.bind(cmd_weak, "--stop", weak_opts.stop, "dphi stop");
  weak_bind.bind(cmd_weak, "--points", weak_opts.points, "scan points");
  weak_bind.bind(cmd_weak, "--xi", weak_opts.xi, "alignment deviation");
  cmd_weak->add_flag("--consistency", weak_opts.consistency,
                     "emit the strong/weak consistency table instead");

  DirtyBeamOpts beam_opts;
  ConfigBinder beam_bind;
  auto* cmd_beam = app.add_subcommand(
      "dirty-beam", "point-spread function of a rectangularly sampled "
                    "aperture plane");
  beam_bind.bind(cmd_beam, "--grid", beam_opts.grid, "grid size");
  beam_bind.bind(cmd_beam, "--half-width", beam_opts.half_cells,
                 "sampled half width in cells");
  beam_bind.bind(cmd_beam, "--du", beam_opts.du, "aperture grid spacing");
  beam_bind.bind(cmd_beam, "--kind", beam_opts.kind, "beam | image");
  beam_bind.bind(cmd_beam, "--source-l", beam_opts.source_l,
                 "point source row offset (image mode)");
  beam_bind.bind(cmd_beam, "--source-m", beam_opts.source_m,
                 "point source column offset (image mode)");

  MultiQfiOpts multi_opts;
  ConfigBinder multi_bind;
  auto* cmd_multi = app.add_subcommand(
      "multi-qfi", "numeric QFI for a multi-source, multi-detector scene "
                   "given as JSON");
  multi_bind.bind(cmd_multi, "--scene", multi_opts.scene_path,
                  "scene JSON path");
  multi_bind.bind(cmd_multi, "--param", multi_opts.params,
                  "coordinate selectors like 0x 1x 1y");
  multi_bind.bind(cmd_multi, "--n-floor", multi_opts.n_floor,
                  "thermal floor for vacuum detector modes");
  multi_bind.bind(cmd_multi, "--step", multi_opts.step,
                  "finite-difference step");
  cmd_multi->add_flag("--centroid-separation", multi_opts.centroid_separation,
                      "two-source centroid/separation parametrization");

  VerifyOpts verify_opts;
  ConfigBinder verify_bind;
  auto* cmd_verify = app.add_subcommand(
      "verify", "Monte-Carlo and cross-route consistency suite");
  verify_bind.bind(cmd_verify, "--samples", verify_opts.samples,
                   "Monte-Carlo sample count");
  verify_bind.bind(cmd_verify, "--dump-counts", verify_opts.dump_counts,
                   "path prefix for raw (m,n) tally CSVs");
  bind_quadrature(cmd_verify, verify_bind, verify_opts.cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? 0 : 2;
  }

  try {
    json cfg = json::object();
    if (!g.config_path.empty()) {
      std::ifstream in(g.config_path);
      if (!in) {
        std::cerr << "cannot open config: " << g.config_path << "\n";
        return 2;
      }
      cfg = json::parse(in);
    }
    if (cfg.contains("out") && g.out_path == "-")
      g.out_path = cfg.at("out").get<std::string>();
    if (cfg.contains("format") && app.count("--format") == 0)
      g.format = cfg.at("format").get<std::string>();
    if (cfg.contains("seed") && app.count("--seed") == 0)
      g.seed = cfg.at("seed").get<std::uint64_t>();
    if (cfg.contains("threads") && app.count("--threads") == 0)
      g.threads = cfg.at("threads").get<unsigned>();

    if (cmd_qfi->parsed()) {
      qfi_bind.apply(cfg);
      return run_qfi_scan(qfi_opts, g);
    }
    if (cmd_pmn->parsed()) {
      pmn_bind.apply(cfg);
      return run_pmn_scan(pmn_opts, g);
    }
    if (cmd_trunc->parsed()) {
      trunc_bind.apply(cfg);
      return run_truncated_fi(trunc_opts, g);
    }
    if (cmd_cut->parsed()) {
      cut_bind.apply(cfg);
      return run_cutoff_scan(cut_opts, g);
    }
    if (cmd_mis->parsed()) {
      mis_bind.apply(cfg);
      return run_misalignment_scan(mis_opts, g);
    }
    if (cmd_cmp->parsed()) {
      cmp_bind.apply(cfg);
      return run_compare_conventional(cmp_opts, g);
    }
    if (cmd_weak->parsed()) {
      weak_bind.apply(cfg);
      return run_weak_limit(weak_opts, g);
    }
    if (cmd_beam->parsed()) {
      beam_bind.apply(cfg);
      return run_dirty_beam(beam_opts, g);
    }
    if (cmd_multi->parsed()) {
      multi_bind.apply(cfg);
      return run_multi_qfi(multi_opts, g);
    }
    if (cmd_verify->parsed()) {
      verify_bind.apply(cfg);
      return run_verify(verify_opts, g);
    }
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
