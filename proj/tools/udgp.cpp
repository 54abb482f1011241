// udgp: command-line front end.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udgp/udgp.hpp"

namespace fs = std::filesystem;
using udgp::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitBudget = 4;
constexpr std::size_t kLargeGrid = 2'000'000;

struct Global {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string format = "json";
};

// Process exit status chosen by a command that still produced output.
struct Outcome {
  int code = 0;
};

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
};

std::string num(double v) { return udgp::format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

void print(const Global& g, const json& j, const Table& t) {
  if (g.format == "csv") {
    auto line = [](const Row& r) {
      std::string s;
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      return s + "\n";
    };
    std::cout << line(t.header);
    for (const auto& r : t.rows) std::cout << line(r);
  } else {
    std::cout << j.dump(2) << "\n";
  }
}

udgp::GeometryKind parse_geometry(const std::string& s) {
  if (s == "line") return udgp::GeometryKind::Line;
  if (s == "loop") return udgp::GeometryKind::Loop;
  throw udgp::Error(udgp::ErrorCode::InvalidArgument, "geometry must be line or loop");
}

// ---- experiment specs ----------------------------------------------------

struct SpecOptions {
  std::string preset;
  std::string geometry;
  std::size_t n = 0;
  double d_min = 0, d_max = 0, delta_l = 0;
  std::vector<double> xi;
  std::size_t runs = 0;
  std::string init;
  std::vector<double> sigma;
  std::size_t max_iterations = 0;
  double delta_d = 0;
  std::uint64_t budget = 0;
  CLI::App* app = nullptr;

  bool given(const std::string& name) const {
    const auto* opt = app->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

void add_spec_options(CLI::App* app, SpecOptions& o, bool solver_knobs) {
  o.app = app;
  app->add_option("--preset", o.preset, "n10-line, n100-line, n10-loop or n100-loop")
      ->check(CLI::IsMember({"n10-line", "n100-line", "n10-loop", "n100-loop"}));
  app->add_option("--geometry", o.geometry, "line or loop")->check(CLI::IsMember({"line", "loop"}));
  app->add_option("--n", o.n, "number of points");
  app->add_option("--d-min", o.d_min, "minimum separation");
  app->add_option("--d-max", o.d_max, "largest distance (line) / L - d_min (loop)");
  app->add_option("--delta-l", o.delta_l, "grid step");
  app->add_option("--xi", o.xi, "noise standard deviations")->delimiter(',');
  app->add_option("--runs", o.runs, "runs per noise level");
  if (solver_knobs) {
    app->add_option("--init", o.init, "spectral, random or uniform")
        ->check(CLI::IsMember({"spectral", "random", "uniform"}));
    app->add_option("--sigma", o.sigma, "smoothing widths (default: 8 log-spaced in [min(d_min/50, delta_l/5), 0.9 d_min])")
        ->delimiter(',');
    app->add_option("--max-iterations", o.max_iterations, "solver iteration cap");
    app->add_option("--delta-d", o.delta_d, "backtracking tolerance (default 5 d_min)");
    app->add_option("--budget", o.budget, "backtracking node budget");
  }
}

udgp::ExperimentSpec build_spec(const SpecOptions& o, const Global& g) {
  udgp::ExperimentSpec s = o.preset.empty() ? udgp::ExperimentSpec{} : udgp::preset(o.preset);
  if (o.given("--geometry")) s.geometry = parse_geometry(o.geometry);
  if (o.given("--n")) s.n = o.n;
  if (o.given("--d-min")) s.d_min = o.d_min;
  if (o.given("--d-max")) s.d_max = o.d_max;
  if (o.given("--delta-l")) s.delta_l = o.delta_l;
  if (o.given("--xi")) s.xi_list = o.xi;
  if (o.given("--runs")) s.num_runs = o.runs;
  if (o.given("--init")) s.init_scheme = udgp::parse_init_scheme(o.init);
  if (o.given("--sigma")) s.sigma_grid = o.sigma;
  if (o.given("--max-iterations")) s.solve.max_iterations = o.max_iterations;
  if (o.given("--delta-d")) s.backtrack_delta_d = o.delta_d;
  if (o.given("--budget")) s.backtrack_budget = o.budget;
  s.seed = g.seed;
  s.validate();
  return s;
}

json spec_json(const udgp::ExperimentSpec& s) {
  json j;
  j["geometry"] = udgp::to_string(s.geometry);
  j["N"] = s.n;
  j["d_min"] = s.d_min;
  j["d_max"] = s.d_max;
  j["delta_l"] = s.delta_l;
  if (s.geometry == udgp::GeometryKind::Loop) j["loop_length"] = s.loop_length();
  j["M"] = udgp::make_grid(s).size();
  j["xi"] = s.xi_list;
  j["runs"] = s.num_runs;
  j["seed"] = s.seed;
  j["init"] = udgp::to_string(s.init_scheme);
  j["sigma_grid"] = s.sigmas();
  j["solver"] = {{"eta0", s.solve.eta0},
                 {"beta", s.solve.beta},
                 {"epsilon", s.solve.epsilon},
                 {"max_iterations", s.solve.max_iterations},
                 {"max_linesearch", s.solve.max_linesearch}};
  j["backtrack"] = {{"delta_d", s.delta_d()}, {"node_budget", s.backtrack_budget}};
  return j;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  SpecOptions spec;
  std::string out_dir;
};

Outcome cmd_simulate(const SimulateOptions& o, const Global& g) {
  const auto spec = build_spec(o.spec, g);
  fs::create_directories(o.out_dir);
  json manifest;
  manifest["metadata"] = spec_json(spec);
  json instances = json::array();
  Table t{{"run", "xi_index", "xi", "truth", "distances"}, {}};
  char name[64];
  for (std::size_t r = 0; r < spec.num_runs; ++r) {
    std::string truth_path;
    for (std::size_t i = 0; i < spec.xi_list.size(); ++i) {
      const auto inst = udgp::make_instance(spec, i, r);
      if (i == 0) {
        std::snprintf(name, sizeof(name), "truth_r%04zu.json", r);
        truth_path = (fs::path(o.out_dir) / name).string();
        udgp::write_text(truth_path, udgp::to_json(inst.truth).dump(2) + "\n");
      }
      std::snprintf(name, sizeof(name), "dist_x%02zu_r%04zu.txt", i, r);
      const std::string dist_path = (fs::path(o.out_dir) / name).string();
      udgp::write_distances(dist_path, inst.distances);
      instances.push_back({{"run", r}, {"xi_index", i}, {"xi", inst.xi}, {"truth", truth_path}, {"distances", dist_path}});
      t.rows.push_back({num(r), num(i), num(inst.xi), truth_path, dist_path});
    }
  }
  manifest["instances"] = std::move(instances);
  print(g, manifest, t);
  return {};
}

// ---- digest ----------------------------------------------------------------

struct DigestOptions {
  std::string fasta, enzyme = "SmaI", recognition, out;
  std::size_t cut_offset = 0;
  CLI::App* app = nullptr;
};

Outcome cmd_digest(const DigestOptions& o, const Global& g) {
  udgp::Enzyme e;
  if (o.enzyme == "custom") {
    udgp::require(o.app->count("--recognition") && o.app->count("--cut-offset"),
                  "--enzyme custom needs --recognition and --cut-offset");
    e = {"custom", o.recognition, o.cut_offset};
  } else {
    e = udgp::find_enzyme(o.enzyme);
  }
  const std::string seq = udgp::parse_fasta(o.fasta);
  const auto res = udgp::digest(seq, e);
  if (!o.out.empty()) udgp::write_distances(o.out, res.distances);
  json j;
  j["enzyme"] = e.name;
  j["recognition"] = e.recognition;
  j["cut_offset"] = e.cut_offset;
  j["sequence_length"] = seq.size();
  j["N"] = res.points();
  j["sites"] = res.sites;
  j["distances_file"] = o.out.empty() ? json(nullptr) : json(o.out);
  Table t{{"index", "site"}, {}};
  for (std::size_t i = 0; i < res.sites.size(); ++i) t.rows.push_back({num(i), num(res.sites[i])});
  print(g, j, t);
  return {};
}

// ---- solve -----------------------------------------------------------------

struct SolveOptions {
  std::string distances, geometry, init = "spectral", density_out;
  std::size_t n = 0;
  double loop_length = 0, delta_l = 0, d_min = 0, d_max = 0;
  std::vector<double> sigma;
  std::size_t sigma_count = 8;
  udgp::SolveConfig solve;
  bool allow_large = false, require_converged = false;
  CLI::App* app = nullptr;
};

Outcome cmd_solve(const SolveOptions& o, const Global& g) {
  std::optional<udgp::MultisetKind> kind;
  if (o.app->count("--geometry"))
    kind = parse_geometry(o.geometry) == udgp::GeometryKind::Loop ? udgp::MultisetKind::BeltwayRaw
                                                                   : udgp::MultisetKind::TurnpikeRaw;
  std::optional<std::size_t> n;
  if (o.app->count("--n")) n = o.n;
  const auto dm = udgp::read_distances(o.distances, kind, n);
  if (kind) udgp::require(udgp::is_beltway(*kind) == udgp::is_beltway(dm.kind()), "--geometry disagrees with the file header");
  const bool loop = udgp::is_beltway(dm.kind());

  std::optional<udgp::Grid> grid;
  if (loop) {
    udgp::require(o.app->count("--loop-length") > 0, "loop problems need --loop-length");
    grid = udgp::Grid::loop_for(o.loop_length, o.delta_l);
  } else {
    grid = udgp::Grid::line_for(std::max(o.d_max, dm.max()), o.delta_l);
  }
  udgp::require(grid->size() <= kLargeGrid || o.allow_large,
                "grid has " + std::to_string(grid->size()) + " cells; pass --allow-large to run it");

  udgp::PipelineConfig cfg;
  cfg.init = udgp::parse_init_scheme(o.init);
  cfg.solve = o.solve;
  cfg.d_min = o.d_min;
  cfg.seed = g.seed;
  const auto sigmas = o.sigma.empty() ? udgp::default_sigma_grid(o.d_min, o.delta_l, o.sigma_count) : o.sigma;
  const auto sel = udgp::select_sigma(dm, *grid, sigmas, cfg, g.jobs);
  const auto& best = sel.chosen();

  json j;
  j["geometry"] = loop ? "loop" : "line";
  j["N"] = dm.points();
  j["M"] = grid->size();
  j["delta_l"] = grid->step();
  if (loop) j["loop_length"] = grid->geometry().loop_length();
  j["init"] = o.init;
  j["seed"] = g.seed;
  j["sigma"] = best.sigma;
  j["sigma_ref"] = sel.sigma_ref;
  j["emd"] = best.emd;
  j["locations"] = best.extraction->locations;
  j["weights"] = best.extraction->weights;
  j["deficient"] = best.extraction->deficient;
  j["iterations"] = best.solve->iterations;
  j["converged"] = best.solve->converged;
  j["objective"] = best.solve->objective_trace.back();
  json runs = json::array();
  for (const auto& r : sel.runs) {
    json rj;
    rj["sigma"] = r.sigma;
    rj["ok"] = r.ok;
    rj["emd"] = r.ok ? json(r.emd) : json(nullptr);
    rj["iterations"] = r.solve ? json(r.solve->iterations) : json(nullptr);
    rj["converged"] = r.solve ? json(r.solve->converged) : json(nullptr);
    rj["objective"] = r.solve ? json(r.solve->objective_trace.back()) : json(nullptr);
    if (!r.error.empty()) rj["error"] = r.error;
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);

  if (!o.density_out.empty()) {
    json d;
    d["z"] = best.solve->z.values();
    d["objective_trace"] = best.solve->objective_trace;
    d["iterations"] = best.solve->iterations;
    d["converged"] = best.solve->converged;
    udgp::write_text(o.density_out, d.dump() + "\n");
  }
  Table t{{"index", "location", "weight"}, {}};
  for (std::size_t i = 0; i < best.extraction->locations.size(); ++i)
    t.rows.push_back({num(i), num(best.extraction->locations[i]), num(best.extraction->weights[i])});
  print(g, j, t);
  return {o.require_converged && !best.solve->converged ? kExitBudget : 0};
}

// ---- backtrack -------------------------------------------------------------

struct BacktrackOptions {
  std::string distances;
  std::size_t n = 0;
  double delta_d = 0.0;
  std::uint64_t budget = 10'000'000;
  bool find_all = false, exhaustive = false;
  CLI::App* app = nullptr;
};

Outcome cmd_backtrack(const BacktrackOptions& o, const Global& g) {
  std::optional<std::size_t> n;
  if (o.app->count("--n")) n = o.n;
  const auto dm = udgp::read_distances(o.distances, udgp::MultisetKind::TurnpikeRaw, n);
  udgp::require(!udgp::is_beltway(dm.kind()), "backtracking is only defined on a line");
  json j;
  Table t{{"solution", "index", "location"}, {}};
  auto add_rows = [&](std::size_t s, const std::vector<double>& u) {
    for (std::size_t i = 0; i < u.size(); ++i) t.rows.push_back({num(s), num(i), num(u[i])});
  };
  if (o.exhaustive) {
    const auto ranked = udgp::exhaustive_turnpike(dm, dm.max(), o.budget);
    j["mode"] = "exhaustive";
    j["status"] = ranked.empty() ? "infeasible" : "found";
    json sols = json::array();
    for (std::size_t s = 0; s < ranked.size(); ++s) {
      sols.push_back({{"locations", ranked[s].config.locations()}, {"emd", ranked[s].emd}});
      add_rows(s, ranked[s].config.locations());
    }
    j["solutions"] = std::move(sols);
    print(g, j, t);
    return {ranked.empty() ? kExitData : 0};
  }
  udgp::BacktrackConfig cfg;
  cfg.delta_d = o.delta_d;
  cfg.node_budget = o.budget;
  cfg.find_all = o.find_all;
  const auto res = udgp::backtrack_turnpike(dm, cfg);
  j["mode"] = "backtrack";
  j["delta_d"] = o.delta_d;
  j["status"] = udgp::to_string(res.status);
  j["nodes"] = res.nodes;
  json sols = json::array();
  for (std::size_t s = 0; s < res.solutions.size(); ++s) {
    sols.push_back(res.solutions[s].locations());
    add_rows(s, res.solutions[s].locations());
  }
  j["solutions"] = std::move(sols);
  print(g, j, t);
  if (res.status == udgp::BacktrackStatus::BudgetExhausted) return {kExitBudget};
  if (res.status == udgp::BacktrackStatus::Infeasible && res.solutions.empty()) return {kExitData};
  return {};
}

// ---- extract ---------------------------------------------------------------

struct ExtractOptions {
  std::string density, geometry = "line";
  std::size_t n = 0;
  double d_min = 0, delta_l = 0, loop_length = 0;
  CLI::App* app = nullptr;
};

std::vector<double> read_density_values(const std::string& path) {
  std::ifstream in(path);
  udgp::require(static_cast<bool>(in), "cannot open " + path, udgp::ErrorCode::Data);
  char c = 0;
  in >> std::ws;
  c = static_cast<char>(in.peek());
  if (c == '{') {
    const auto j = udgp::read_json(path);
    udgp::require(j.contains("z"), path + ": JSON input needs a \"z\" array", udgp::ErrorCode::Data);
    return j["z"].get<std::vector<double>>();
  }
  return udgp::parse_vector(in, path);
}

Outcome cmd_extract(const ExtractOptions& o, const Global& g) {
  const auto z = read_density_values(o.density);
  udgp::require(!z.empty(), o.density + ": empty density", udgp::ErrorCode::Data);
  const bool loop = parse_geometry(o.geometry) == udgp::GeometryKind::Loop;
  udgp::Grid grid(z.size(), o.delta_l, udgp::Geometry::line());
  if (loop) {
    udgp::require(o.app->count("--loop-length") > 0, "loop densities need --loop-length");
    grid = udgp::Grid(z.size(), o.loop_length / static_cast<double>(z.size()), udgp::Geometry::loop(o.loop_length));
  }
  const udgp::Density density(z, o.n, grid);
  const auto ex = udgp::extract_points(density, o.d_min, o.n, g.seed);
  json j;
  j["locations"] = ex.locations;
  j["weights"] = ex.weights;
  j["deficient"] = ex.deficient;
  Table t{{"index", "location", "weight"}, {}};
  for (std::size_t i = 0; i < ex.locations.size(); ++i)
    t.rows.push_back({num(i), num(ex.locations[i]), num(ex.weights[i])});
  print(g, j, t);
  return {};
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  std::string truth, estimate;
  double d_min = 0;
};

Outcome cmd_eval(const EvalOptions& o, const Global& g) {
  const auto truth = udgp::read_config(o.truth);
  const auto est = udgp::read_config(o.estimate);
  const auto sc = udgp::score_recovery(truth, est, o.d_min);
  json j;
  j["matched"] = sc.matched;
  j["N"] = truth.size();
  j["transform"] = {{"shift", sc.transform.shift}, {"reflected", sc.transform.reflected}};
  json pairs = json::array();
  Table t{{"truth_index", "estimate_index", "error", "recovered"}, {}};
  for (std::size_t k = 0; k < sc.assignment.size(); ++k) {
    pairs.push_back({{"truth", sc.assignment[k].first},
                     {"estimate", sc.assignment[k].second},
                     {"error", sc.errors[k]},
                     {"recovered", sc.errors[k] < o.d_min / 2}});
    t.rows.push_back({num(sc.assignment[k].first), num(sc.assignment[k].second), num(sc.errors[k]),
                      sc.errors[k] < o.d_min / 2 ? "1" : "0"});
  }
  j["assignment"] = std::move(pairs);
  j["aligned_estimate"] = sc.aligned_estimate.locations();
  j["total_cost"] = sc.total_cost;
  print(g, j, t);
  return {};
}

// ---- project ---------------------------------------------------------------

struct ProjectOptions {
  std::string in, out;
  std::size_t n = 0;
};

Outcome cmd_project(const ProjectOptions& o, const Global& g) {
  const auto z = udgp::read_vector(o.in);
  udgp::require(!z.empty(), o.in + ": empty vector", udgp::ErrorCode::Data);
  const auto res = udgp::project_l1_box(z, o.n);
  if (!o.out.empty()) udgp::write_text(o.out, udgp::format_vector(res.s));
  json j;
  j["case"] = res.kind == udgp::ProjectionCase::Interior ? "interior" : "all_saturated";
  j["r"] = res.r ? json(*res.r) : json(nullptr);
  j["rho"] = res.rho ? json(*res.rho) : json(nullptr);
  j["kappa"] = res.kappa ? json(*res.kappa) : json(nullptr);
  if (o.out.empty()) j["s"] = res.s;
  Table t{{"index", "s"}, {}};
  for (std::size_t i = 0; i < res.s.size(); ++i) t.rows.push_back({num(i), num(res.s[i])});
  print(g, j, t);
  return {};
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeOptions {
  std::string config;
  double delta_l = 0, q = 0.75;
  udgp::LambdaConfig lambda;
};

Outcome cmd_analyze(const AnalyzeOptions& o, const Global& g) {
  const auto cfg = udgp::read_config(o.config);
  const udgp::Geometry& geo = cfg.geometry();
  std::vector<double> u = cfg.locations();
  std::optional<udgp::Grid> grid;
  if (geo.is_loop()) {
    grid = udgp::Grid::loop_for(geo.loop_length(), o.delta_l);
  } else {
    const double lo = *std::min_element(u.begin(), u.end());
    for (double& x : u) x -= lo;  // translation does not change the problem
    grid = udgp::Grid::line_for(*std::max_element(u.begin(), u.end()), o.delta_l);
  }
  const auto cells = udgp::quantize_config(udgp::PointConfig(u, geo), *grid);
  const auto x = udgp::Density::indicator(cells, *grid);
  const auto est = udgp::estimate_lambda_E(x, o.lambda);
  const double tau = udgp::convergence_radius(est.lambda_E, o.q);
  const auto cert = udgp::null_space_certified(*grid, x.values());
  json j;
  j["M"] = grid->size();
  j["N"] = x.points();
  j["lambda_E"] = est.lambda_E;
  j["q"] = o.q;
  j["tau"] = tau;
  j["iterations"] = est.iterations;
  j["converged"] = est.converged;
  j["null_space_certified"] = cert ? json(*cert) : json(nullptr);
  Table t{{"key", "value"},
          {{"M", num(grid->size())},
           {"N", num(x.points())},
           {"lambda_E", num(est.lambda_E)},
           {"q", num(o.q)},
           {"tau", num(tau)},
           {"iterations", num(est.iterations)},
           {"converged", est.converged ? "true" : "false"},
           {"null_space_certified", cert ? (*cert ? "true" : "false") : "null"}}};
  print(g, j, t);
  return {};
}

// ---- bench -----------------------------------------------------------------

struct BenchOptions {
  SpecOptions spec;
  std::vector<std::string> methods = {"pgd", "backtrack"};
  bool timing = false;
  std::string summary_out;
};

Outcome cmd_bench(const BenchOptions& o, const Global& g) {
  const auto spec = build_spec(o.spec, g);
  std::vector<udgp::Method> methods;
  for (const auto& m : o.methods) methods.push_back(udgp::parse_method(m));
  const auto recs = udgp::run_bench(spec, methods, g.jobs);
  const auto summary = udgp::summarize(spec, recs);

  json j;
  j["metadata"] = spec_json(spec);
  j["metadata"]["methods"] = o.methods;
  json rj = json::array();
  Table t{{"method", "xi", "run", "matched", "failed", "sigma", "runtime_ms"}, {}};
  for (const auto& r : recs) {
    json e;
    e["method"] = udgp::to_string(r.method);
    e["xi"] = r.xi;
    e["run"] = r.run;
    e["matched"] = r.matched;
    e["failed"] = r.failed;
    e["sigma"] = r.sigma ? json(*r.sigma) : json(nullptr);
    if (o.timing) e["runtime_ms"] = r.runtime_ms;
    rj.push_back(std::move(e));
    t.rows.push_back({udgp::to_string(r.method), num(r.xi), num(r.run), num(r.matched), r.failed ? "1" : "0",
                      r.sigma ? num(*r.sigma) : "", o.timing ? num(r.runtime_ms) : ""});
  }
  json sj = json::array();
  std::string summary_csv = "method,xi,mean_matched,full_fraction,failures\n";
  for (const auto& s : summary) {
    sj.push_back({{"method", udgp::to_string(s.method)},
                  {"xi", s.xi},
                  {"mean_matched", s.mean_matched},
                  {"full_fraction", s.full_fraction},
                  {"failures", s.failures}});
    summary_csv += udgp::to_string(s.method) + "," + num(s.xi) + "," + num(s.mean_matched) + "," +
                   num(s.full_fraction) + "," + num(s.failures) + "\n";
  }
  j["records"] = std::move(rj);
  j["summary"] = std::move(sj);
  if (!o.summary_out.empty()) udgp::write_text(o.summary_out, summary_csv);
  print(g, j, t);
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point reconstruction from unassigned distances on a line or a loop"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "sample configurations and write noisy distance files");
  add_spec_options(c_sim, sim.spec, false);
  c_sim->add_option("--out-dir", sim.out_dir, "output directory")->required();

  DigestOptions dig;
  auto* c_dig = app.add_subcommand("digest", "restriction-site distances from a FASTA file");
  dig.app = c_dig;
  c_dig->add_option("--fasta", dig.fasta, "FASTA file")->required();
  c_dig->add_option("--enzyme", dig.enzyme, "SmaI, BamHI or custom")->capture_default_str();
  c_dig->add_option("--recognition", dig.recognition, "recognition sequence (custom enzyme)");
  c_dig->add_option("--cut-offset", dig.cut_offset, "cut offset within the recognition sequence (custom enzyme)");
  c_dig->add_option("--out", dig.out, "distance file to write");

  SolveOptions sol;
  auto* c_sol = app.add_subcommand("solve", "reconstruct points from a distance file");
  sol.app = c_sol;
  c_sol->add_option("--distances", sol.distances, "distance file")->required();
  c_sol->add_option("--n", sol.n, "number of points (default: header or inferred)");
  c_sol->add_option("--geometry", sol.geometry, "line or loop (default: file header)")
      ->check(CLI::IsMember({"line", "loop"}));
  c_sol->add_option("--loop-length", sol.loop_length, "loop circumference");
  c_sol->add_option("--delta-l", sol.delta_l, "grid step")->required();
  c_sol->add_option("--d-min", sol.d_min, "minimum separation")->required();
  c_sol->add_option("--d-max", sol.d_max, "line length (default: largest distance)");
  c_sol->add_option("--init", sol.init, "spectral, random or uniform")
      ->check(CLI::IsMember({"spectral", "random", "uniform"}))
      ->capture_default_str();
  c_sol->add_option("--sigma", sol.sigma, "smoothing widths")->delimiter(',');
  c_sol->add_option("--sigma-count", sol.sigma_count, "size of the default width grid")->capture_default_str();
  c_sol->add_option("--max-iterations", sol.solve.max_iterations)->capture_default_str();
  c_sol->add_option("--eta0", sol.solve.eta0)->capture_default_str();
  c_sol->add_option("--beta", sol.solve.beta)->capture_default_str();
  c_sol->add_option("--epsilon", sol.solve.epsilon)->capture_default_str();
  c_sol->add_option("--max-linesearch", sol.solve.max_linesearch)->capture_default_str();
  c_sol->add_option("--density-out", sol.density_out, "write z and the objective trace as JSON");
  c_sol->add_flag("--allow-large", sol.allow_large, "permit grids above 2e6 cells");
  c_sol->add_flag("--require-converged", sol.require_converged, "exit 4 if the chosen solve did not converge");

  BacktrackOptions bt;
  auto* c_bt = app.add_subcommand("backtrack", "interval backtracking baseline (line only)");
  bt.app = c_bt;
  c_bt->add_option("--distances", bt.distances, "distance file")->required();
  c_bt->add_option("--n", bt.n, "number of points");
  c_bt->add_option("--delta-d", bt.delta_d, "match tolerance")->capture_default_str();
  c_bt->add_option("--budget", bt.budget, "node budget")->capture_default_str();
  c_bt->add_flag("--find-all", bt.find_all, "collect every solution");
  c_bt->add_flag("--exhaustive", bt.exhaustive, "tolerance = largest distance, rank all solutions (N <= 12)");

  ExtractOptions ex;
  auto* c_ex = app.add_subcommand("extract", "point locations from a density");
  ex.app = c_ex;
  c_ex->add_option("--density", ex.density, "whitespace-separated z, or JSON with a \"z\" array")->required();
  c_ex->add_option("--n", ex.n, "number of points")->required();
  c_ex->add_option("--d-min", ex.d_min, "minimum separation")->required();
  c_ex->add_option("--delta-l", ex.delta_l, "grid step (line)");
  c_ex->add_option("--geometry", ex.geometry)->check(CLI::IsMember({"line", "loop"}))->capture_default_str();
  c_ex->add_option("--loop-length", ex.loop_length, "loop circumference");

  EvalOptions ev;
  auto* c_ev = app.add_subcommand("eval", "score an estimate against the truth");
  c_ev->add_option("--truth", ev.truth, "truth configuration JSON")->required();
  c_ev->add_option("--estimate", ev.estimate, "estimated configuration JSON")->required();
  c_ev->add_option("--d-min", ev.d_min, "minimum separation")->required();

  ProjectOptions pr;
  auto* c_pr = app.add_subcommand("project", "projection onto {0 <= s <= 1, sum s = N}");
  c_pr->add_option("--n", pr.n, "target sum")->required();
  c_pr->add_option("--in", pr.in, "input vector file")->required();
  c_pr->add_option("--out", pr.out, "output vector file");

  AnalyzeOptions an;
  auto* c_an = app.add_subcommand("analyze", "lambda_E and the convergence radius of a configuration");
  c_an->add_option("--config", an.config, "configuration JSON")->required();
  c_an->add_option("--delta-l", an.delta_l, "grid step")->required();
  c_an->add_option("--q", an.q, "contraction parameter in (0.5, 1)")->capture_default_str();
  c_an->add_option("--tol", an.lambda.tol, "relative objective tolerance")->capture_default_str();
  c_an->add_option("--max-iterations", an.lambda.max_iterations)->capture_default_str();

  BenchOptions be;
  auto* c_be = app.add_subcommand("bench", "run a protocol with several methods");
  add_spec_options(c_be, be.spec, true);
  c_be->add_option("--methods", be.methods, "pgd, pgd-spectral, pgd-random, pgd-uniform, backtrack, exhaustive")
      ->delimiter(',');
  c_be->add_flag("--timing", be.timing, "report wall-clock runtime_ms (not reproducible)");
  c_be->add_option("--summary-out", be.summary_out, "write per-(method, xi) means as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    Outcome out;
    if (*c_sim) out = cmd_simulate(sim, g);
    else if (*c_dig) out = cmd_digest(dig, g);
    else if (*c_sol) out = cmd_solve(sol, g);
    else if (*c_bt) out = cmd_backtrack(bt, g);
    else if (*c_ex) out = cmd_extract(ex, g);
    else if (*c_ev) out = cmd_eval(ev, g);
    else if (*c_pr) out = cmd_project(pr, g);
    else if (*c_an) out = cmd_analyze(an, g);
    else if (*c_be) out = cmd_bench(be, g);
    std::cout.flush();
    return out.code;
  } catch (const udgp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case udgp::ErrorCode::InvalidArgument: return kExitUsage;
      case udgp::ErrorCode::Data: return kExitData;
      case udgp::ErrorCode::Budget: return kExitBudget;
    }
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
