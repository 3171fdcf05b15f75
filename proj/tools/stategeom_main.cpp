#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <atomic>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stategeom/alpha_fs.hpp"
#include "stategeom/biortho.hpp"
#include "stategeom/checks.hpp"
#include "stategeom/format.hpp"
#include "stategeom/models.hpp"
#include "stategeom/qng.hpp"

namespace sg = stategeom;
using sg::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void emit_error(const sg::Error& e) {
  nlohmann::json j;
  j["code"] = e.code();
  j["message"] = e.what();
  if (e.theta()) {
    std::vector<double> th(e.theta()->data(), e.theta()->data() + e.theta()->size());
    j["theta"] = th;
  }
  std::cerr << j.dump() << "\n";
}

int exit_code_for(const sg::Error& e) {
  return e.code() == sg::errc::config ? kExitConfig : kExitNumerical;
}

void write_output(const sg::Table& table, const RunConfig& cfg) {
  const std::string fmt = cfg.str("format", "csv");
  std::string payload;
  if (fmt == "csv")
    payload = table.to_csv();
  else if (fmt == "json")
    payload = table.to_json();
  else
    throw sg::Error(sg::errc::config, "format must be csv or json");
  const std::string out = cfg.str("out");
  if (out.empty()) {
    std::cout << payload;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw sg::Error(sg::errc::config, "cannot open output file: " + out);
    f << payload;
  }
}

sg::DerivMode parse_deriv(const RunConfig& cfg) {
  const std::string d = cfg.str("deriv", "analytic");
  if (d == "analytic") return sg::DerivMode::analytic;
  if (d == "fd") return sg::DerivMode::central_fd;
  if (d == "richardson") return sg::DerivMode::richardson_fd;
  throw sg::Error(sg::errc::config, "deriv must be analytic, fd or richardson");
}

void apply_deriv_mode(sg::StateFamily& fam, const RunConfig& cfg) {
  sg::DerivMode mode = parse_deriv(cfg);
  if (mode == sg::DerivMode::analytic && !fam.has_analytic())
    mode = cfg.has("deriv") ? throw sg::Error(sg::errc::config,
                                              "model has no analytic derivatives")
                            : sg::DerivMode::central_fd;
  fam.mode = mode;
}

std::vector<sg::RVec> parse_points(const RunConfig& cfg, const std::vector<std::string>& names) {
  if (cfg.has("grid")) return sg::parse_grid(cfg.str("grid"), names);
  if (!cfg.has("params"))
    throw sg::Error(sg::errc::config, "either params or grid is required");
  std::vector<sg::RVec> pts;
  for (const std::string& piece : sg::split(cfg.str("params"), ';'))
    if (!sg::detail::trim(piece).empty()) pts.push_back(sg::parse_point(piece, names));
  if (pts.empty()) throw sg::Error(sg::errc::config, "empty point list");
  return pts;
}

std::vector<double> alphas_for_kind(const RunConfig& cfg, const std::string& kind) {
  const bool needs = (kind == "case1" || kind == "case2");
  if (!cfg.has("alpha")) {
    if (needs) throw sg::Error(sg::errc::config, "kind " + kind + " requires --alpha");
    return {0.0};
  }
  return sg::parse_alpha_list(cfg.str("alpha"));
}

// Deterministic parallel map: results land in slot order no matter which
// thread produced them.
template <typename Fn>
std::vector<std::vector<double>> parallel_rows(size_t count, Fn&& fn) {
  std::vector<std::vector<double>> rows(count);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t idx = next.fetch_add(1);
        if (idx >= count) return;
        try {
          rows[idx] = fn(idx);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

struct KindContext {
  std::string kind;
  sg::StateFamily fam;            // fs/case kinds
  sg::NhBandFamilies nh;          // lr/rl/ll/rr kinds
  bool is_nh = false;
  int n = 0;
};

KindContext make_kind_context(const RunConfig& cfg, const sg::ModelInfo& model,
                              const std::string& kind) {
  KindContext ctx;
  ctx.kind = kind;
  ctx.is_nh = (kind == "lr" || kind == "rl" || kind == "ll" || kind == "rr");
  if (ctx.is_nh) {
    if (!model.build_nh)
      throw sg::Error(sg::errc::config, "model " + model.name + " has no left/right families");
    ctx.nh = model.build_nh();
    ctx.n = ctx.nh.right_lr.n;
    if (cfg.str("deriv", "fd") == "analytic")
      throw sg::Error(sg::errc::config, "eigenvector families are finite-difference only");
  } else {
    if (!model.build)
      throw sg::Error(sg::errc::config, "model " + model.name + " is a left/right pair model");
    if (cfg.has("model_grid")) {
      if (!model.build_grid)
        throw sg::Error(sg::errc::config, "model " + model.name + " is not grid-backed");
      const auto parts = sg::split(cfg.str("model_grid"), ':');
      if (parts.size() != 3)
        throw sg::Error(sg::errc::config, "model_grid must be min:max:points");
      sg::GridSpec grid;
      try {
        grid.lo = std::stod(parts[0]);
        grid.hi = std::stod(parts[1]);
        grid.points = std::stoi(parts[2]);
      } catch (const std::exception&) {
        throw sg::Error(sg::errc::config, "bad model_grid spec");
      }
      if (grid.points < 2 || grid.hi <= grid.lo)
        throw sg::Error(sg::errc::config, "model_grid needs hi > lo and at least 2 points");
      ctx.fam = model.build_grid(grid);
    } else {
      ctx.fam = model.build();
    }
    apply_deriv_mode(ctx.fam, cfg);
    ctx.n = ctx.fam.n;
  }
  return ctx;
}

sg::GeometricTensor tensor_for(const KindContext& ctx, const sg::RVec& th, double alpha,
                               double* defect) {
  if (ctx.kind == "fs") return sg::fs_tensor(ctx.fam, th);
  if (ctx.kind == "case1") {
    const sg::Case1Result r = sg::case1_tensor(ctx.fam, th, alpha);
    if (defect) *defect = r.normalization_defect;
    return r.tensor;
  }
  if (ctx.kind == "case2") return sg::case2_tensor(ctx.fam, th, alpha);
  sg::NhKind k = sg::NhKind::LR;
  if (ctx.kind == "rl") k = sg::NhKind::RL;
  if (ctx.kind == "ll") k = sg::NhKind::LL;
  if (ctx.kind == "rr") k = sg::NhKind::RR;
  const bool pair = (k == sg::NhKind::LR || k == sg::NhKind::RL);
  const sg::StateFamily& l = pair ? ctx.nh.left_lr : ctx.nh.left_unit;
  const sg::StateFamily& r = pair ? ctx.nh.right_lr : ctx.nh.right_unit;
  return sg::nh_fs_tensor(l, r, th, k);
}

const std::set<std::string> kTensorKeys = {"command", "model",  "params",     "grid",
                                           "alpha",   "kind",   "deriv",      "out",
                                           "format",  "model_grid"};

int run_tensor(const RunConfig& cfg) {
  cfg.validate(kTensorKeys);
  const sg::ModelInfo& model = sg::find_model(cfg.str("model"));
  const std::string kind = cfg.str("kind", "fs");
  const KindContext ctx = make_kind_context(cfg, model, kind);
  const std::vector<sg::RVec> points = parse_points(cfg, model.params);
  const std::vector<double> alphas = alphas_for_kind(cfg, kind);
  const bool with_alpha = (kind == "case1" || kind == "case2");
  const int n = ctx.n;

  sg::Table table;
  for (const std::string& p : model.params) table.header.push_back(p);
  if (with_alpha) table.header.push_back("alpha");
  if (kind == "case1") table.header.push_back("defect");
  auto part_cols = [&](const std::string& tag) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        table.header.push_back(tag + "." + std::to_string(i) + std::to_string(j));
  };
  part_cols("g");
  part_cols("omega");
  part_cols("gtilde");
  part_cols("omtilde");

  const size_t count = points.size() * alphas.size();
  table.rows = parallel_rows(count, [&](size_t idx) {
    const sg::RVec& th = points[idx / alphas.size()];
    const double a = alphas[idx % alphas.size()];
    double defect = 0.0;
    sg::GeometricTensor T;
    try {
      T = tensor_for(ctx, th, a, &defect);
    } catch (const sg::Error& e) {
      if (!e.theta()) throw sg::Error(e.code(), e.what(), th);
      throw;
    }
    std::vector<double> row;
    for (int i = 0; i < th.size(); ++i) row.push_back(th[i]);
    if (with_alpha) row.push_back(a);
    if (kind == "case1") row.push_back(defect);
    auto push_part = [&](const sg::RMat& m) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) row.push_back(m(i, j));
    };
    push_part(T.g());
    push_part(T.omega());
    push_part(T.gtilde());
    push_part(T.omtilde());
    return row;
  });
  write_output(table, cfg);
  return kExitOk;
}

int run_connections(const RunConfig& cfg) {
  cfg.validate(kTensorKeys);
  const sg::ModelInfo& model = sg::find_model(cfg.str("model"));
  const std::string kind = cfg.str("kind", "fs");
  const KindContext ctx = make_kind_context(cfg, model, kind);
  const std::vector<sg::RVec> points = parse_points(cfg, model.params);
  const std::vector<double> alphas = alphas_for_kind(cfg, kind);
  const bool with_alpha = (kind == "case1" || kind == "case2");
  if (kind == "case1")
    throw sg::Error(sg::errc::config, "case1 is a tensor diagnostic; no connections");
  const int n = ctx.n;

  sg::Table table;
  for (const std::string& p : model.params) table.header.push_back(p);
  if (with_alpha) table.header.push_back("alpha");
  auto conn_cols = [&](const std::string& tag, bool complex_valued) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const std::string idx =
              std::to_string(i) + std::to_string(j) + std::to_string(k);
          if (complex_valued) {
            table.header.push_back(tag + "." + idx + ".re");
            table.header.push_back(tag + "." + idx + ".im");
          } else {
            table.header.push_back(tag + "." + idx);
          }
        }
  };
  if (kind == "fs") {
    conn_cols("gammac", false);
    if (cfg.has("alpha")) conn_cols("n", false);
  } else {
    conn_cols("gamma1", true);
    conn_cols("gamma2", true);
  }

  const size_t count = points.size() * alphas.size();
  table.rows = parallel_rows(count, [&](size_t idx) {
    const sg::RVec& th = points[idx / alphas.size()];
    const double a = alphas[idx % alphas.size()];
    std::vector<double> row;
    for (int i = 0; i < th.size(); ++i) row.push_back(th[i]);
    if (with_alpha) row.push_back(a);
    auto with_context = [&th](auto&& fn) {
      try {
        return fn();
      } catch (const sg::Error& e) {
        if (!e.theta()) throw sg::Error(e.code(), e.what(), th);
        throw;
      }
    };
    auto push_conn = [&](const sg::ConnectionField& c, bool complex_valued) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            row.push_back(std::real(c.at(i, j, k)));
            if (complex_valued) row.push_back(std::imag(c.at(i, j, k)));
          }
    };
    if (kind == "fs") {
      push_conn(with_context([&] { return sg::metric_connection(ctx.fam, th); }), false);
      if (cfg.has("alpha"))
        push_conn(with_context([&] { return sg::nonmetricity(ctx.fam, th, a); }), false);
    } else if (kind == "case2") {
      const sg::DualConnectionPair dc =
          with_context([&] { return sg::dual_connections(ctx.fam, th, a); });
      push_conn(dc.gamma1, true);
      push_conn(dc.gamma2, true);
    } else {
      sg::NhKind k = sg::NhKind::LR;
      if (kind == "rl") k = sg::NhKind::RL;
      if (kind == "ll") k = sg::NhKind::LL;
      if (kind == "rr") k = sg::NhKind::RR;
      const bool pair = (k == sg::NhKind::LR || k == sg::NhKind::RL);
      const sg::StateFamily& l = pair ? ctx.nh.left_lr : ctx.nh.left_unit;
      const sg::StateFamily& r = pair ? ctx.nh.right_lr : ctx.nh.right_unit;
      const sg::NhConnectionPair pc = with_context([&] { return sg::nh_connections(l, r, th, k); });
      push_conn(pc.first, true);
      push_conn(pc.second, true);
    }
    return row;
  });
  write_output(table, cfg);
  return kExitOk;
}

sg::Mat parse_operator(const std::string& spec) {
  if (spec == "sz") {
    sg::Mat m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
  }
  if (spec == "sx") {
    sg::Mat m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
  }
  if (spec == "sy") {
    sg::Mat m(2, 2);
    m << 0.0, -sg::I, sg::I, 0.0;
    return m;
  }
  if (spec.rfind("pt:", 0) == 0) {
    const auto parts = sg::split(spec.substr(3), ',');
    if (parts.size() != 2) throw sg::Error(sg::errc::config, "expected pt:gamma,g");
    try {
      return sg::pt_two_level(std::stod(parts[0]), std::stod(parts[1]));
    } catch (const std::exception&) {
      throw sg::Error(sg::errc::config, "bad pt operator spec: " + spec);
    }
  }
  throw sg::Error(sg::errc::config, "unknown operator: " + spec);
}

const std::set<std::string> kOptimizeKeys = {
    "command", "model",     "params",  "deriv", "out",      "format", "cost",
    "op",      "eta",       "eta_r",   "eta_i", "cutoff",   "iters",  "grad_tol",
    "cost_tol"};

int run_optimize(const RunConfig& cfg) {
  cfg.validate(kOptimizeKeys);
  const sg::ModelInfo& model = sg::find_model(cfg.str("model"));
  const std::string costname = cfg.str("cost", "hermitian");
  const sg::Mat op = parse_operator(cfg.str("op", "sz"));
  sg::OptimizerOptions opt;  // config keys override the library defaults
  opt.eta = cfg.num("eta", opt.eta);
  opt.eta_r = cfg.num("eta_r", opt.eta_r);
  opt.eta_i = cfg.num("eta_i", opt.eta_i);
  opt.svd_cutoff = cfg.num("cutoff", opt.svd_cutoff);
  opt.max_iters = cfg.integer("iters", opt.max_iters);
  opt.grad_tol = cfg.num("grad_tol", opt.grad_tol);
  opt.cost_tol = cfg.num("cost_tol", opt.cost_tol);

  sg::Table table;
  table.header = {"iter"};
  for (const std::string& p : model.params) table.header.push_back(p);
  for (const char* c : {"cost.re", "cost.im", "aux", "grad_norm", "cond", "incompatibility"})
    table.header.push_back(c);
  std::string termination = "NONE";
  std::vector<double> final_theta;

  auto push_steps = [&](const sg::OptimizerTrace& trace) {
    int it = 0;
    for (const auto& s : trace.steps) {
      std::vector<double> row{static_cast<double>(it++)};
      for (int i = 0; i < s.theta.size(); ++i) row.push_back(s.theta[i]);
      row.push_back(std::real(s.cost));
      row.push_back(std::imag(s.cost));
      row.push_back(s.aux);
      row.push_back(s.grad_norm);
      row.push_back(s.cond);
      row.push_back(s.incompatibility);
      table.rows.push_back(row);
    }
    termination = trace.termination;
    for (int i = 0; i < trace.final_theta.size(); ++i)
      final_theta.push_back(trace.final_theta[i]);
  };

  if (costname == "hermitian" || costname == "rr") {
    if (!model.build)
      throw sg::Error(sg::errc::config, "cost " + costname + " needs a state-family model");
    sg::StateFamily fam = model.build();
    apply_deriv_mode(fam, cfg);
    const sg::RVec th0 = sg::parse_point(cfg.str("params"), model.params);
    if (costname == "hermitian") {
      sg::CostSpec cost{op, sg::CostKind::hermitian_expectation};
      push_steps(sg::qng_optimize_hermitian(fam, cost, th0, opt));
    } else {
      push_steps(sg::rr_variational_eigensolver(fam, op, th0, opt));
    }
  } else if (costname == "biortho") {
    if (!model.build_nh)
      throw sg::Error(sg::errc::config, "cost biortho needs a left/right pair model");
    const sg::NhBandFamilies nh = model.build_nh();
    const sg::RVec th0 = sg::parse_point(cfg.str("params"), model.params);
    sg::CostSpec cost{op, sg::CostKind::biortho_expectation};
    sg::OptimizerTrace trace;
    sg::RVec th = th0;
    for (int it = 0; it < opt.max_iters; ++it) {
      const sg::NhDualStep s = sg::qng_step_nh_dual(nh.left_lr, nh.right_lr, cost, th, opt);
      trace.steps.push_back({th, s.cost, 0.0,
                             std::max(s.dtheta_r.norm(), s.dtheta_i.norm()), 0.0,
                             s.incompatibility});
      // the real-part flow advances the iterate; both steps are logged
      th += s.dtheta_r;
    }
    trace.termination = "MAX_ITERS";
    trace.final_theta = th;
    push_steps(trace);
  } else {
    throw sg::Error(sg::errc::config, "cost must be hermitian, biortho or rr");
  }

  const std::string fmt = cfg.str("format", "csv");
  if (fmt == "csv") {
    std::string payload = table.to_csv();
    payload += "# termination = " + termination + "\n# final =";
    for (double v : final_theta) payload += " " + sg::fmt_sci17(v);
    payload += "\n";
    const std::string out = cfg.str("out");
    if (out.empty()) {
      std::cout << payload;
    } else {
      std::ofstream f(out, std::ios::binary);
      if (!f) throw sg::Error(sg::errc::config, "cannot open output file: " + out);
      f << payload;
    }
  } else {
    write_output(table, cfg);
  }
  return kExitOk;
}

const std::set<std::string> kValidateKeys = {"command", "check", "tol_scale", "out", "format"};

int run_validate(const RunConfig& cfg) {
  cfg.validate(kValidateKeys);
  const double ts = cfg.num("tol_scale", 1.0);
  std::vector<sg::CheckResult> results;
  if (cfg.has("check"))
    results.push_back(sg::run_check(cfg.str("check"), ts));
  else
    results = sg::run_all_checks(ts);
  size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  std::vector<std::string> failing;
  for (const auto& r : results) {
    std::printf("%-*s  residual %.3e  %s %.3e  [%s]\n", static_cast<int>(width),
                r.name.c_str(), r.residual, r.lower_bound ? ">=" : "<=", r.tolerance,
                r.pass ? "PASS" : "FAIL");
    if (!r.pass) failing.push_back(r.name);
  }
  if (!failing.empty()) {
    std::printf("failing checks:");
    for (const auto& n : failing) std::printf(" %s", n.c_str());
    std::printf("\n");
    return kExitCheckFailed;
  }
  return kExitOk;
}

int run_models() {
  for (const auto& m : sg::model_registry()) {
    std::string params;
    for (const auto& p : m.params) params += (params.empty() ? "" : ", ") + p;
    const char* tag = m.build_nh ? " [left/right pair]" : (m.build_grid ? " [grid-backed]" : "");
    std::printf("%-16s (%s)  %s%s\n", m.name.c_str(), params.c_str(), m.description.c_str(),
                tag);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stategeom: information geometry of parametrized quantum states"};
  app.require_subcommand(1);

  std::string config_path, model, params, grid, alpha, kind, deriv, out, format, model_grid;
  std::string cost, op, check;
  double tol_scale = 0.0, eta = 0.0, eta_r = 0.0, eta_i = 0.0, cutoff = 0.0;
  int iters = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--out", out, "output path (default stdout)");
    sub->add_option("--format", format, "csv or json");
  };
  auto add_model_opts = [&](CLI::App* sub) {
    sub->add_option("--model", model, "model name (see `models`)");
    sub->add_option("--params", params, "point list, e.g. theta=1.1,phi=0.4");
    sub->add_option("--grid", grid, "grid spec, e.g. theta=0:3.14:25;phi=0");
    sub->add_option("--alpha", alpha, "comma-separated alpha list");
    sub->add_option("--kind", kind, "fs, case1, case2, lr, rl, ll or rr");
    sub->add_option("--deriv", deriv, "analytic, fd or richardson");
    sub->add_option("--model-grid", model_grid, "grid-backed models: min:max:points");
  };

  CLI::App* c_tensor = app.add_subcommand("tensor", "geometric tensor at points");
  add_common(c_tensor);
  add_model_opts(c_tensor);
  CLI::App* c_sweep = app.add_subcommand("sweep", "geometric tensor over a grid");
  add_common(c_sweep);
  add_model_opts(c_sweep);
  CLI::App* c_conn = app.add_subcommand("connections", "connection coefficients at points");
  add_common(c_conn);
  add_model_opts(c_conn);
  CLI::App* c_opt = app.add_subcommand("optimize", "natural-gradient optimisation run");
  add_common(c_opt);
  c_opt->add_option("--model", model, "model name");
  c_opt->add_option("--params", params, "start point");
  c_opt->add_option("--deriv", deriv, "analytic, fd or richardson");
  c_opt->add_option("--cost", cost, "hermitian, biortho or rr");
  c_opt->add_option("--op", op, "operator: sz, sx, sy or pt:gamma,g");
  c_opt->add_option("--eta", eta, "step size");
  c_opt->add_option("--eta-r", eta_r, "real-flow step size");
  c_opt->add_option("--eta-i", eta_i, "imaginary-flow step size");
  c_opt->add_option("--cutoff", cutoff, "pseudo-inverse relative cutoff");
  c_opt->add_option("--iters", iters, "iteration budget");
  CLI::App* c_val = app.add_subcommand("validate", "run the identity/residual check suite");
  add_common(c_val);
  c_val->add_option("--check", check, "run a single named check");
  c_val->add_option("--tol-scale", tol_scale, "scale all tolerances (e.g. 0.01 tightens 100x)");
  CLI::App* c_models = app.add_subcommand("models", "list built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    nlohmann::json j;
    j["code"] = sg::errc::config;
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return kExitConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = sg::parse_config_file(config_path);
    auto override_if = [&](const std::string& key, const std::string& v) {
      if (!v.empty()) cfg.set(key, v);
    };
    override_if("model", model);
    override_if("model_grid", model_grid);
    override_if("params", params);
    override_if("grid", grid);
    override_if("alpha", alpha);
    override_if("kind", kind);
    override_if("deriv", deriv);
    override_if("out", out);
    override_if("format", format);
    override_if("cost", cost);
    override_if("op", op);
    override_if("check", check);
    if (tol_scale > 0.0) cfg.set("tol_scale", sg::fmt_sci17(tol_scale));
    if (eta > 0.0) cfg.set("eta", sg::fmt_sci17(eta));
    if (eta_r > 0.0) cfg.set("eta_r", sg::fmt_sci17(eta_r));
    if (eta_i > 0.0) cfg.set("eta_i", sg::fmt_sci17(eta_i));
    if (cutoff > 0.0) cfg.set("cutoff", sg::fmt_sci17(cutoff));
    if (iters >= 0) cfg.set("iters", std::to_string(iters));

    if (c_models->parsed()) return run_models();
    if (c_val->parsed()) {
      cfg.set("command", "validate");
      return run_validate(cfg);
    }
    if (c_opt->parsed()) {
      cfg.set("command", "optimize");
      return run_optimize(cfg);
    }
    if (c_conn->parsed()) {
      cfg.set("command", "connections");
      return run_connections(cfg);
    }
    cfg.set("command", c_sweep->parsed() ? "sweep" : "tensor");
    if (c_sweep->parsed() && !cfg.has("grid"))
      throw sg::Error(sg::errc::config, "sweep requires --grid");
    return run_tensor(cfg);
  } catch (const sg::Error& e) {
    emit_error(e);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    nlohmann::json j;
    j["code"] = sg::errc::numerical;
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return kExitNumerical;
  }
}
