#include "logschro/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "logschro/analysis.hpp"
#include "logschro/errors.hpp"
#include "logschro/field_io.hpp"
#include "logschro/functional.hpp"
#include "logschro/kernels.hpp"
#include "logschro/solver.hpp"

namespace logschro {

using nlohmann::json;

namespace {

json energy_json(const EnergyBreakdown& e) {
  return json{{"quad", e.quad}, {"hpart", e.hpart}, {"fpart", e.fpart},
              {"total", e.total}, {"mass", e.mass}};
}

json report_json(const SolveReport& rep) {
  json j;
  j["energy"] = energy_json(rep.energy);
  j["residual_l2"] = rep.residual_l2;
  j["residual_sup"] = rep.residual_sup;
  j["iterations"] = rep.iterations;
  j["nehari_t"] = rep.nehari_t;
  j["identity_gap"] = rep.identity_gap;
  j["positivity_min"] = rep.positivity_min;
  j["converged"] = rep.converged;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

json multibump_json(const MultibumpReport& rep) {
  json j;
  j["solve"] = report_json(rep.base);
  j["distance_to_glued"] = rep.distance_to_glued;
  j["attach_radius"] = rep.attach_radius;
  j["annulus_energy"] = rep.annulus_energy;
  j["annulus_budget"] = rep.annulus_budget;
  j["r0"] = rep.r0;
  j["ground_level"] = rep.ground_level;
  j["bump_energies"] = rep.bump_energies;
  j["level_window"] = json::array({rep.level_lo, rep.level_hi});
  j["level_in_window"] = rep.level_in_window;
  return j;
}

json decomposition_json(const BumpDecomposition& dec, const PeriodicGrid& grid) {
  json centers = json::array();
  for (const LatticePoint& c : dec.centers) {
    json pt = json::array();
    for (int d = 0; d < grid.dim; ++d) pt.push_back(grid.coordinate(c[d]));
    centers.push_back(pt);
  }
  return json{{"centers", centers},
              {"energies", dec.energies},
              {"remainder_norm", dec.remainder_norm},
              {"pairwise_distances", dec.pairwise_distances},
              {"total_energy", dec.total_energy}};
}

struct Failure {
  std::string check;
  std::string detail;
};

class Driver {
 public:
  Driver(const ExperimentConfig& cfg, const RunOptions& ropts) : cfg_(cfg), ropts_(ropts) {
    std::filesystem::create_directories(ropts_.out_dir);
    start_ = std::chrono::steady_clock::now();
  }

  std::string path(const std::string& name) const { return ropts_.out_dir + "/" + name; }

  void check(bool ok, const std::string& what, const std::string& detail) {
    if (!ok) failures_.push_back({what, detail});
  }

  void record_report(const std::string& key, const SolveReport& rep) {
    results_[key] = report_json(rep);
    check(rep.converged, key + ".converged", "solver report not converged");
    check(rep.identity_gap <= 1e-6 * (1.0 + rep.energy.mass), key + ".identity",
          "identity gap " + std::to_string(rep.identity_gap));
    check(rep.positivity_min > 0.0, key + ".positivity",
          "min value " + std::to_string(rep.positivity_min));
  }

  void save_field(const std::string& name, const GridField& f) {
    io::write_fields(path(name + ".bin"), {f});
    if (ropts_.dump_csv || cfg_.csv) io::write_csv(path(name + ".csv"), f);
  }

  int finish() {
    json failures = json::array();
    for (const Failure& f : failures_) failures.push_back({{"check", f.check}, {"detail", f.detail}});
    results_["failures"] = failures;
    results_["pass"] = failures_.empty();
    {
      std::ofstream os(path("results.json"));
      os << results_.dump(2) << "\n";
    }
    json manifest;
    manifest["version"] = kVersion;
    manifest["experiment"] = kind_name(cfg_.kind);
    manifest["config"] = cfg_.raw;
    manifest["seed"] = cfg_.seed;
    manifest["threads"] = ropts_.threads;
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
    manifest["wall_ms"] = wall;
    manifest["results"] = results_;
    {
      std::ofstream os(path("manifest.json"));
      os << manifest.dump(2) << "\n";
    }
    return failures_.empty() ? 0 : 2;
  }

  json results_;
  std::vector<Failure> failures_;

 private:
  const ExperimentConfig& cfg_;
  const RunOptions& ropts_;
  std::chrono::steady_clock::time_point start_;
};

CoefficientPair make_pair(const ExperimentConfig& cfg, const PeriodicGrid& grid, json* results) {
  CoefficientPair pair = sample_coefficients(grid, cfg.coeff);
  if (cfg.coeff.normalize) {
    NormalizedPotential np = normalize_potential(pair);
    if (results) (*results)["lambda"] = np.lambda;
    return np.pair;
  }
  return pair;
}

int run_gausson_check(const ExperimentConfig& cfg, Driver& drv) {
  if (cfg.coeff.family != CoefficientSpec::Family::constant)
    throw ConfigError("gausson-check requires constant coefficients");
  PeriodicGrid grid = build_grid(cfg.dim, cfg.L, cfg.M);
  CoefficientPair pair = make_pair(cfg, grid, &drv.results_);
  SolveReport rep = ground_state(pair, grid, cfg.solver);
  drv.record_report("ground", rep);
  drv.save_field("ground", rep.field);

  GridField exact = gausson_field(grid, cfg.coeff.v0, cfg.coeff.q0);
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.sites; ++i)
    sup = std::max(sup, std::fabs(rep.field.values[i] - exact.values[i]));
  double level = gausson_level(cfg.dim, cfg.coeff.v0, cfg.coeff.q0);
  double level_gap = std::fabs(rep.energy.total - level);
  drv.results_["profile_sup_error"] = sup;
  drv.results_["level"] = level;
  drv.results_["level_gap"] = level_gap;
  drv.check(sup <= 5e-3, "profile", "sup error " + std::to_string(sup));
  drv.check(level_gap <= 5e-3, "level", "gap " + std::to_string(level_gap));
  return drv.finish();
}

int run_ground(const ExperimentConfig& cfg, Driver& drv) {
  PeriodicGrid grid = build_grid(cfg.dim, cfg.L, cfg.M);
  CoefficientPair pair = make_pair(cfg, grid, &drv.results_);
  SolveReport rep = ground_state(pair, grid, cfg.solver);
  drv.record_report("ground", rep);
  drv.save_field("ground", rep.field);
  return drv.finish();
}

int run_blimit(const ExperimentConfig& cfg, Driver& drv, const RunOptions& ropts) {
  CoefficientSpec coeff = cfg.coeff;
  if (coeff.normalize) throw ConfigError("blimit does not support potential normalization");
  std::vector<BLevelRow> rows = b_of_L(coeff, cfg.dim, cfg.L_list, cfg.M, cfg.solver, ropts.threads);
  json table = json::array();
  std::ofstream csv(drv.path("blimit.csv"));
  csv.precision(17);
  csv << "L,b_L\n";
  for (const BLevelRow& r : rows) {
    table.push_back({{"L", r.L}, {"b_L", r.b_L}});
    csv << r.L << "," << r.b_L << "\n";
  }
  drv.results_["table"] = table;
  return drv.finish();
}

int run_multibump(const ExperimentConfig& cfg, Driver& drv) {
  PeriodicGrid grid = build_grid(cfg.dim, cfg.L, cfg.M);
  CoefficientPair pair = make_pair(cfg, grid, &drv.results_);
  MultibumpReport rep = solve_multibump(cfg.glue, pair, grid, cfg.solver);
  drv.results_["multibump"] = multibump_json(rep);
  drv.record_report("solve", rep.base);
  drv.save_field("multibump", rep.base.field);
  try {
    DecayFit fit = decay_fit(rep.base.field, cfg.glue.centers, cfg.glue.R, cfg.glue.R + 6.0);
    drv.results_["decay"] = json{{"radii", fit.radii},
                                 {"max_abs", fit.max_abs},
                                 {"slope", fit.slope},
                                 {"intercept", fit.intercept},
                                 {"r_squared", fit.r_squared}};
    std::ofstream shells(drv.path("decay_shells.csv"));
    shells.precision(17);
    shells << "r,max_abs\n";
    for (std::size_t i = 0; i < fit.radii.size(); ++i)
      shells << fit.radii[i] << "," << fit.max_abs[i] << "\n";
    drv.check(fit.slope < 0.0, "decay", "slope " + std::to_string(fit.slope));
  } catch (const CheckError& e) {
    drv.results_["decay"] = json{{"note", e.what()}};
  }
  drv.check(rep.distance_to_glued <= 2.0 * rep.attach_radius, "attach",
            "distance " + std::to_string(rep.distance_to_glued) + " vs 2r = " +
                std::to_string(2.0 * rep.attach_radius));
  drv.check(rep.annulus_energy <= rep.annulus_budget, "annulus",
            "energy " + std::to_string(rep.annulus_energy));
  drv.check(rep.level_in_window, "level_window",
            "level " + std::to_string(rep.base.energy.total) + " outside [" +
                std::to_string(rep.level_lo) + ", " + std::to_string(rep.level_hi) + "]");
  return drv.finish();
}

int run_decompose(const ExperimentConfig& cfg, Driver& drv) {
  std::vector<GridField> fields = io::read_fields(cfg.field_in);
  if (fields.empty()) throw ConfigError("decompose: no fields in " + cfg.field_in);
  const GridField& u = fields.front();
  CoefficientPair pair = sample_coefficients(u.grid, cfg.coeff);
  if (cfg.coeff.normalize) pair = normalize_potential(pair).pair;
  BumpDecomposition dec = decompose_bumps(u, pair, cfg.decompose_R, cfg.threshold);
  drv.results_["decomposition"] = decomposition_json(dec, u.grid);
  drv.results_["splitting_gap"] = energy_splitting_check(dec, dec.total_energy);
  return drv.finish();
}

}  // namespace

GridField gausson_field(const PeriodicGrid& grid, double V, double Q) {
  double alpha = (grid.dim * Q + V) / (2.0 * Q);
  GridField u(grid);
  LatticePoint origin = origin_point(grid);
  for (std::size_t i = 0; i < grid.sites; ++i) {
    double d = torus_distance(grid.site(i), origin, grid);
    u.values[i] = std::exp(alpha - 0.5 * Q * d * d);
  }
  return u;
}

double gausson_level(int dim, double V, double Q) {
  return 0.5 * Q * std::exp((dim * Q + V) / Q) * std::pow(std::numbers::pi / Q, 0.5 * dim);
}

int run_experiment(const ExperimentConfig& cfg, const RunOptions& ropts) {
  Driver drv(cfg, ropts);
  try {
    switch (cfg.kind) {
      case ExperimentConfig::Kind::gausson_check: return run_gausson_check(cfg, drv);
      case ExperimentConfig::Kind::ground: return run_ground(cfg, drv);
      case ExperimentConfig::Kind::blimit: return run_blimit(cfg, drv, ropts);
      case ExperimentConfig::Kind::multibump: return run_multibump(cfg, drv);
      case ExperimentConfig::Kind::decompose: return run_decompose(cfg, drv);
    }
    return 3;
  } catch (const ConfigError& e) {
    drv.check(false, "config", e.what());
    drv.finish();
    return 3;
  } catch (const CheckError& e) {
    drv.check(false, "assertion", e.what());
    drv.finish();
    return 2;
  } catch (const SolverError& e) {
    drv.check(false, "solver", e.what());
    drv.finish();
    return 4;
  }
}

}  // namespace logschro
