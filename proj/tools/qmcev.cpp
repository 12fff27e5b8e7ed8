// SPDX-License-Identifier: Apache-2.0

// Batch driver: generating vectors, convergence studies and theory checks.

#include "qmcev/config.hpp"
#include "qmcev/estimator.hpp"
#include "qmcev/fem.hpp"
#include "qmcev/lattice.hpp"
#include "qmcev/numerics.hpp"
#include "qmcev/validate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace qmcev;

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct Options
{
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string kind;
};

ConfigFile load_config(const Options& opt, bool seed_required)
{
  ConfigFile cfg = ConfigFile::load(opt.config);
  cfg.check_known(known_config_keys());
  if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
  if (opt.threads) cfg.set("threads", std::to_string(*opt.threads));
  if (!opt.out.empty()) cfg.set("out", opt.out);
  if (seed_required && !cfg.has("seed"))
    throw ConfigError(opt.config + ": a master seed is required (config key 'seed' or --seed)");
  cfg.set_default("threads", "1");
  cfg.set_default("out", ".");
  return cfg;
}

std::filesystem::path output_path(const ConfigFile& cfg, const std::string& name)
{
  const std::filesystem::path dir = cfg.get("out");
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> artifact_header(const std::string& command, const ConfigFile& cfg)
{
  std::vector<std::string> lines{"qmcev " + command, "seed = " + (cfg.has("seed") ? cfg.get("seed") : "none")};
  for (const std::string& line : cfg.resolved_lines()) lines.push_back(line);
  return lines;
}

void write_header(std::ostream& os, const std::vector<std::string>& lines)
{
  for (const std::string& line : lines) os << "# " << line << '\n';
}

std::ofstream open_output(const std::filesystem::path& path)
{
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void require_prime(const ConfigFile& cfg, const std::string& key, std::uint64_t N)
{
  if (is_prime(N)) return;
  const auto [below, above] = neighbouring_primes(N);
  cfg.fail(key, key + " = " + std::to_string(N) + " is not prime; nearest primes are " +
                    (below ? std::to_string(below) + " and " : std::string()) + std::to_string(above));
}

int cmd_cbc(const Options& opt)
{
  ConfigFile cfg = load_config(opt, false);
  cfg.require({"family", "N", "s"});
  const std::uint64_t N = cfg.get_u64("N");
  require_prime(cfg, "N", N);
  const int s = cfg.get_int("s");
  const CoefficientField field = field_from_config(cfg);

  const CbcResult cbc = cbc_construct(N, s, pod_weights_from_field(field, s));
  const auto path = output_path(cfg, "cbc_N" + std::to_string(N) + "_s" + std::to_string(s) + ".txt");
  std::ofstream os = open_output(path);
  write_header(os, artifact_header("cbc", cfg));
  char e2[64];
  std::snprintf(e2, sizeof e2, "%.17g", cbc.error_sq.back());
  os << "# e2 = " << e2 << '\n';
  write_generating_vector(os, cbc.gen);
  std::cout << "wrote " << path.string() << "\ne2 = " << e2 << '\n';
  return 0;
}

StudyResult run_study(const std::string& kind, ConfigFile& cfg)
{
  if (kind == "qmc" || kind == "mc") {
    cfg.require({"family", "s", "m"});
    cfg.set_default("R", "8");
    std::vector<std::uint64_t> N_list;
    if (cfg.has("N_list")) {
      N_list = cfg.get_u64_list("N_list");
    } else {
      cfg.set_default("N_max", "4001");
      N_list = default_N_list(cfg.get_u64("N_max"));
      if (N_list.size() < 3) cfg.fail("N_max", "N_max leaves fewer than 3 points in the default N-list");
    }
    for (std::uint64_t N : N_list) require_prime(cfg, "N_list", N);
    const RunConfig run = run_config_from(cfg);
    return kind == "qmc" ? qmc_convergence_study(run, N_list) : mc_convergence_study(run, N_list);
  }
  if (kind == "truncation") {
    cfg.require({"family", "m", "N", "s_list", "s_ref"});
    require_prime(cfg, "N", cfg.get_u64("N"));
    const std::vector<int> s_list = cfg.get_int_list("s_list");
    const int s_ref = cfg.get_int("s_ref");
    if (s_ref <= *std::max_element(s_list.begin(), s_list.end()))
      cfg.fail("s_ref", "s_ref must exceed every entry of s_list");
    RunConfig run = run_config_from(cfg);
    run.R = 1;
    return truncation_study(run, s_list, s_ref);
  }
  if (kind == "fe") {
    cfg.require({"family", "s", "N", "m_list", "m_ref"});
    require_prime(cfg, "N", cfg.get_u64("N"));
    const std::vector<int> m_list = cfg.get_int_list("m_list");
    const int m_ref = cfg.get_int("m_ref");
    if (m_ref <= *std::max_element(m_list.begin(), m_list.end()))
      cfg.fail("m_ref", "m_ref must exceed every entry of m_list");
    RunConfig run = run_config_from(cfg);
    run.R = 1;
    run.m = m_list.front();
    return fe_study(run, m_list, m_ref);
  }
  throw ConfigError("unknown study kind '" + kind + "' (expected truncation, fe, qmc or mc)");
}

int cmd_study(const Options& opt)
{
  ConfigFile cfg = load_config(opt, true);
  cfg.set_default("quantity", "eigenvalue");
  const StudyResult study = run_study(opt.kind, cfg);

  const auto path = output_path(cfg, "study_" + opt.kind + ".csv");
  std::ofstream os = open_output(path);
  write_study_csv(os, study, cfg.get_u64("seed"), artifact_header("study --kind " + opt.kind, cfg));

  std::cout << "wrote " << path.string() << '\n';
  for (const StudyRow& row : study.rows)
    std::cout << row.var << " = " << num(row.value) << "  error = " << num(row.error) << "  mean = " << num(row.mean)
              << '\n';
  std::cout << "wall time " << num(study.wall_time) << " s, " << study.solver.solves << " solves, max residual "
            << num(study.solver.max_residual) << '\n';
  if (!study.note.empty()) std::cout << "note: " << study.note << '\n';
  if (study.rows.size() >= 5) std::cout << "tail rate (last 5) = " << num(study.tail_rate) << '\n';
  std::cout << "rate = " << num(study.rate) << std::endl;
  return 0;
}

int cmd_validate(const Options& opt)
{
  ConfigFile cfg = load_config(opt, true);
  cfg.require({"family", "m"});
  cfg.set_default("s", "64");
  cfg.set_default("samples", "100");
  cfg.set_default("fd_step", "1e-4");
  cfg.set_default("fd_samples", "2");
  cfg.set_default("fe_m_list", "8, 16, 32");
  cfg.set_default("fe_m_ref", "64");
  const int s = cfg.get_int("s");
  if (!cfg.has("fd_j")) {
    std::string js;
    for (int j = 1; j <= std::min(s, 16); ++j) js += (j > 1 ? ", " : "") + std::to_string(j);
    cfg.set("fd_j", js);
  }

  const CoefficientField field = field_from_config(cfg);
  SampleConfig sample;
  sample.m = cfg.get_int("m");
  sample.s = s;
  sample.n_samples = cfg.get_int("samples");
  sample.seed = cfg.get_u64("seed");
  sample.threads = cfg.get_int("threads");
  if (cfg.has("tol")) sample.solver.tol = cfg.get_double("tol");
  if (cfg.has("max_iter")) sample.solver.max_iter = cfg.get_int("max_iter");
  const double step = cfg.get_double("fd_step");
  const std::vector<int> fd_j = cfg.get_int_list("fd_j");

  std::ostringstream report;
  const BoundsReport bounds = check_bounds(field, sample);
  write_report(report, bounds);
  const GapReport gap = check_gap(field, sample);
  write_report(report, gap);

  bool ok = (bounds.skipped || bounds.passed()) && gap.passed();
  const ParamVector y_fe = sample_parameter(sample.seed, 0, s);
  const FeChainReport chain =
      fe_from_above(field, y_fe, cfg.get_int_list("fe_m_list"), cfg.get_int("fe_m_ref"), sample.solver);
  write_report(report, chain);
  ok = ok && chain.passed();

  // y = 0 and fd_samples random points pulled one step inside the cube
  const int fd_samples = cfg.get_int("fd_samples");
  for (int t = 0; t <= fd_samples; ++t) {
    ParamVector y = ParamVector::Zero(s);
    if (t > 0) y = sample_parameter(sample.seed, sample.n_samples + t, s).cwiseMax(-0.5 + 2 * step).cwiseMin(0.5 - 2 * step);
    report << (t == 0 ? "derivatives at y = 0\n" : "derivatives at random y #" + std::to_string(t) + "\n");
    const DerivProfile profile = fd_derivative_profile(field, sample.m, y, fd_j, step, sample.solver);
    write_report(report, profile);
    ok = ok && profile.passed();
  }
  report << "validate: " << (ok ? "PASS" : "FAIL") << '\n';

  const auto header = artifact_header("validate", cfg);
  const auto report_path = output_path(cfg, "validate_report.txt");
  std::ofstream ro = open_output(report_path);
  write_header(ro, header);
  ro << report.str();
  const auto csv_path = output_path(cfg, "validate_samples.csv");
  std::ofstream co = open_output(csv_path);
  write_header(co, header);
  write_samples_csv(co, bounds, gap);

  std::cout << report.str() << "wrote " << report_path.string() << " and " << csv_path.string() << '\n';
  return 0;
}

int cmd_pencil(const Options& opt)
{
  ConfigFile cfg = load_config(opt, false);
  cfg.require({"family", "m"});
  cfg.set_default("s", "1");
  const CoefficientField field = field_from_config(cfg);
  const TriMesh mesh = build_mesh(cfg.get_int("m"));
  if (!compatible(mesh, field)) cfg.fail("m", "m does not resolve the field's material regions");
  const Pencil pencil = assemble_pencil(mesh, field, ParamVector::Zero(cfg.get_int("s")));

  const auto header = artifact_header("pencil", cfg);
  for (const auto& [name, matrix] : {std::pair{"A", &pencil.A}, std::pair{"M", &pencil.M}}) {
    const auto path = output_path(cfg, std::string("pencil_") + name + ".txt");
    std::ofstream os = open_output(path);
    write_header(os, header);
    os << "# " << name << " at y = 0, lower triangle, " << matrix->rows() << " x " << matrix->cols() << '\n';
    write_coordinate(os, *matrix);
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Quasi-Monte Carlo for random elliptic eigenvalue problems"};
  app.require_subcommand(1);
  Options opt;

  const auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "key = value configuration file")->required();
    sub->add_option("--out", opt.out, "output directory (default: config key 'out' or .)");
    sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
    sub->add_option("--threads", opt.threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  };
  CLI::App* cbc = app.add_subcommand("cbc", "construct a generating vector by CBC");
  common(cbc);
  CLI::App* study = app.add_subcommand("study", "run a convergence study and fit its rate");
  common(study);
  study->add_option("--kind", opt.kind, "truncation, fe, qmc or mc")
      ->required()
      ->check(CLI::IsMember({"truncation", "fe", "qmc", "mc"}));
  CLI::App* validate = app.add_subcommand("validate", "eigenvalue bounds, spectral gap, FE monotonicity, derivative decay");
  common(validate);
  CLI::App* pencil = app.add_subcommand("pencil", "dump the pencil at y = 0 in coordinate format");
  common(pencil);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (cbc->parsed()) return cmd_cbc(opt);
    if (study->parsed()) return cmd_study(opt);
    if (validate->parsed()) return cmd_validate(opt);
    if (pencil->parsed()) return cmd_pencil(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_config;
}
