// Command-line front door: filter generation/validation, reference solving,
// IC sampling, training, prediction, evaluation, and plot emission. Every
// run is reproducible from its resolved-config dump plus the input files.
//
// Exit codes: 0 success, 2 config/shape error, 3 numeric failure, 4 I/O error.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pdnet/config.hpp"
#include "pdnet/grid.hpp"
#include "pdnet/metrics.hpp"
#include "pdnet/network.hpp"
#include "pdnet/pddo.hpp"
#include "pdnet/physics.hpp"
#include "pdnet/reference.hpp"
#include "pdnet/render.hpp"
#include "pdnet/sequence_io.hpp"
#include "pdnet/trainer.hpp"

namespace {

using namespace pdnet;

// Stable machine-parsable category tokens for the one-line error output.
const char* category_token(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::shape: return "shape-mismatch";
  }
  return "unknown";
}

int exit_code(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::shape: return 2;
    case ErrorCategory::numeric: return 3;
    case ErrorCategory::io: return 4;
  }
  return 1;
}

void maybe_dump(const RunConfig& cfg, const std::string& dump_path) {
  if (dump_path.empty()) return;
  std::ofstream out(dump_path);
  if (!out) throw IoError("cannot open '" + dump_path + "' for writing");
  out << dump_resolved_config(cfg);
  if (!out) throw IoError("write failed on '" + dump_path + "'");
}

Field load_ic(const std::string& path, const RunConfig& cfg) {
  FieldSequence seq = read_sequence(path, cfg.grid.x_min, cfg.grid.x_max);
  Field ic = seq.fields.front();
  if (!(ic.grid == cfg.grid))
    throw ShapeError("initial condition grid (n=" + std::to_string(ic.grid.n) +
                     ") does not match configured grid (n=" +
                     std::to_string(cfg.grid.n) + ")");
  return ic;
}

struct CommonArgs {
  std::string config_path;
  std::string dump_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run config (JSON)")->required();
    cmd->add_option("--dump-config", dump_path,
                    "Write the resolved config (defaults echoed) to this path");
  }
  RunConfig load() const {
    RunConfig cfg = load_run_config(config_path);
    maybe_dump(cfg, dump_path);
    return cfg;
  }
};

struct FilterGenArgs {
  std::string config_path;
  std::string dump_path;
  int m = 0;
  double dx = 0.0;
  double horizon_factor = 0.0;
  bool m_set = false, dx_set = false, factor_set = false;
};

int cmd_filters_gen(const FilterGenArgs& args, const std::string& out) {
  int m = 2;
  double dx = 0.0, factor = 3.015;
  bool have_dx = false;
  if (!args.config_path.empty()) {
    RunConfig cfg = load_run_config(args.config_path);
    maybe_dump(cfg, args.dump_path);
    m = cfg.filter_m;
    dx = cfg.grid.dx();
    factor = cfg.horizon_factor;
    have_dx = true;
  }
  if (args.m_set) m = args.m;
  if (args.dx_set) {
    dx = args.dx;
    have_dx = true;
  }
  if (args.factor_set) factor = args.horizon_factor;
  if (!have_dx)
    throw ConfigError("filters gen needs --config or --dx to fix the grid spacing");
  DerivativeFilterSet filters = DerivativeFilterSet::build(m, dx, factor);
  filters.save(out);
  std::cout << "wrote " << filters.k() << "x" << filters.k()
            << " derivative filters (m=" << m << ", dx=" << dx << ") to " << out
            << "\n";
  return 0;
}

int cmd_filters_check(const std::string& path, double tol) {
  DerivativeFilterSet filters = DerivativeFilterSet::load(path);
  OrthogonalityReport report = check_orthogonality(filters, tol);
  std::cout << "max orthogonality defect: " << report.max_defect << "\n";
  if (!report.pass)
    throw NumericError("orthogonality defect " + std::to_string(report.max_defect) +
                       " exceeds tolerance " + std::to_string(tol));
  return 0;
}

int cmd_ic_sample(const CommonArgs& common, const std::string& out) {
  RunConfig cfg = common.load();
  Field ic = sample_burgers_ic(cfg.ic_seed, cfg.grid, cfg.ic_amplitude);
  FieldSequence seq;
  seq.fields.push_back(ic);
  seq.dt = cfg.dt;
  write_sequence(seq, out);
  std::cout << "wrote seeded initial condition (n=" << cfg.grid.n
            << ", seed=" << cfg.ic_seed << ") to " << out << "\n";
  return 0;
}

int cmd_ref_solve(const CommonArgs& common, const std::string& ic_path,
                  const std::string& out) {
  RunConfig cfg = common.load();
  Field ic = load_ic(ic_path, cfg);
  SolveConfig solve_cfg = make_solve_config(cfg);
  FieldSequence seq = solve(solve_cfg, ic);
  write_sequence(seq, out);
  std::cout << "wrote " << seq.steps() << " states (dt=" << seq.dt << ", t_end="
            << seq.fields.back().t << ") to " << out << "\n";
  return 0;
}

int cmd_train(const CommonArgs& common, const std::string& ic_path,
              const std::string& out, const std::string& loss_path) {
  RunConfig cfg = common.load();
  Field ic = load_ic(ic_path, cfg);
  TrainConfig train_cfg = make_train_config(cfg);
  if (train_cfg.checkpoint_every > 0) train_cfg.checkpoint_path = out;
  TrainResult result = train(train_cfg, ic);
  save_checkpoint(result.params, out);
  if (!loss_path.empty()) write_loss_history_csv(result.history, loss_path);
  if (result.aborted) {
    std::cout << "wrote last good checkpoint to " << out << "\n";
    throw NumericError(result.message);
  }
  if (!result.history.empty())
    std::cout << "trained " << result.history.size() << " epochs, final loss "
              << result.history.back().loss_total << "\n";
  std::cout << "wrote checkpoint to " << out << "\n";
  return 0;
}

int cmd_predict(const CommonArgs& common, const std::string& checkpoint_path,
                const std::string& ic_path, int steps, bool steps_set,
                const std::string& out) {
  RunConfig cfg = common.load();
  ModelParams params = load_checkpoint(checkpoint_path);
  if (params.grid_n != cfg.grid.n)
    throw ShapeError("checkpoint grid (n=" + std::to_string(params.grid_n) +
                     ") does not match configured grid (n=" +
                     std::to_string(cfg.grid.n) + ")");
  Field ic = load_ic(ic_path, cfg);
  // Default horizon: the training window plus the configured extrapolation.
  int n_steps = steps_set ? steps : cfg.train_steps + cfg.extrapolation_steps;
  if (n_steps < 0) throw ConfigError("steps must be >= 0");
  FieldSequence seq;
  if (n_steps == 0) {
    // a zero-length rollout is just the initial state
    seq.fields.push_back(ic);
    seq.dt = params.dt;
  } else {
    seq = rollout(ic, n_steps, params).seq;
  }
  write_sequence(seq, out);
  std::cout << "wrote " << seq.steps() << " predicted states to " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& out, double x_min, double x_max) {
  FieldSequence pred = read_sequence(pred_path, x_min, x_max);
  FieldSequence truth = read_sequence(truth_path, x_min, x_max);
  ErrorReport report = relative_l2_error(pred, truth);
  if (!out.empty()) write_error_csv(report, out);
  std::cout << "aggregate rel_l2_u " << report.aggregate_u << "\n"
            << "aggregate rel_l2_v " << report.aggregate_v << "\n"
            << "aggregate rel_l2_all " << report.aggregate_all << "\n";
  return 0;
}

int cmd_plot_loss(const std::string& history_path, const std::string& out) {
  std::vector<EpochStats> history = read_loss_history_csv(history_path);
  render_loss_curve(history, out);
  std::cout << "wrote loss curve (" << history.size() << " epochs) to " << out << "\n";
  return 0;
}

int cmd_plot_field(const std::string& seq_path, int index, int channel,
                   const std::string& out) {
  FieldSequence seq = read_sequence(seq_path);
  if (index < 0 || index >= seq.steps())
    throw ConfigError("--index " + std::to_string(index) + " out of range [0, " +
                      std::to_string(seq.steps()) + ")");
  render_field(seq.fields[index], channel, out);
  std::cout << "wrote field snapshot (step " << index << ", channel " << channel
            << ") to " << out << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Physics-informed PDE surrogate: filters, reference solver, "
               "training, prediction, evaluation, plots"};
  app.require_subcommand(1);

  // filters gen | check
  CLI::App* filters = app.add_subcommand("filters", "Derivative filter utilities");
  filters->require_subcommand(1);
  CLI::App* fgen = filters->add_subcommand("gen", "Build filters and write PDFLT1");
  FilterGenArgs fgen_args;
  std::string fgen_out;
  fgen->add_option("--config", fgen_args.config_path, "Run config (JSON)");
  fgen->add_option("--dump-config", fgen_args.dump_path,
                   "Write the resolved config to this path");
  CLI::Option* fgen_m = fgen->add_option("--m", fgen_args.m, "Kernel half-width");
  CLI::Option* fgen_dx = fgen->add_option("--dx", fgen_args.dx, "Grid spacing");
  CLI::Option* fgen_factor =
      fgen->add_option("--horizon-factor", fgen_args.horizon_factor,
                       "Horizon as a multiple of dx");
  fgen->add_option("--out", fgen_out, "Output PDFLT1 path")->required();

  CLI::App* fcheck = filters->add_subcommand("check", "Verify filter orthogonality");
  std::string fcheck_path;
  double fcheck_tol = 1e-9;
  fcheck->add_option("--in,--filters", fcheck_path, "PDFLT1 path")->required();
  fcheck->add_option("--tol", fcheck_tol, "Orthogonality tolerance");

  // ref solve
  CLI::App* ref = app.add_subcommand("ref", "Classical reference solver");
  ref->require_subcommand(1);
  CLI::App* rsolve = ref->add_subcommand("solve", "Integrate the configured PDE");
  CommonArgs rsolve_common;
  rsolve_common.attach(rsolve);
  std::string rsolve_ic, rsolve_out;
  rsolve->add_option("--ic", rsolve_ic, "Initial condition (PDSEQ1, first state)")
      ->required();
  rsolve->add_option("--out", rsolve_out, "Output PDSEQ1 path")->required();

  // ic sample
  CLI::App* ic = app.add_subcommand("ic", "Initial condition utilities");
  ic->require_subcommand(1);
  CLI::App* isample = ic->add_subcommand("sample", "Draw a seeded random field IC");
  CommonArgs isample_common;
  isample_common.attach(isample);
  std::string isample_out;
  isample->add_option("--out", isample_out, "Output PDSEQ1 path")->required();

  // train
  CLI::App* trn = app.add_subcommand("train", "Train the surrogate on one IC");
  CommonArgs trn_common;
  trn_common.attach(trn);
  std::string trn_ic, trn_out, trn_loss;
  trn->add_option("--ic", trn_ic, "Initial condition (PDSEQ1, first state)")->required();
  trn->add_option("--out", trn_out, "Output checkpoint (PDCKP1)")->required();
  trn->add_option("--loss", trn_loss, "Loss history CSV path");

  // predict
  CLI::App* pred = app.add_subcommand("predict", "Roll out a trained checkpoint");
  CommonArgs pred_common;
  pred_common.attach(pred);
  std::string pred_ckpt, pred_ic, pred_out;
  int pred_steps = 0;
  pred->add_option("--checkpoint", pred_ckpt, "Checkpoint (PDCKP1)")->required();
  pred->add_option("--ic", pred_ic, "Initial condition (PDSEQ1, first state)")->required();
  CLI::Option* pred_steps_opt = pred->add_option(
      "--steps", pred_steps, "Rollout length (default: train steps + extrapolation)");
  pred->add_option("--out", pred_out, "Output PDSEQ1 path")->required();

  // eval
  CLI::App* ev = app.add_subcommand("eval", "Relative L2 error between sequences");
  std::string ev_pred, ev_truth, ev_out;
  double ev_xmin = 0.0, ev_xmax = 1.0;
  ev->add_option("--pred", ev_pred, "Predicted sequence (PDSEQ1)")->required();
  ev->add_option("--truth", ev_truth, "Reference sequence (PDSEQ1)")->required();
  ev->add_option("--out", ev_out, "Per-step error CSV path");
  ev->add_option("--x-min", ev_xmin, "Domain lower bound");
  ev->add_option("--x-max", ev_xmax, "Domain upper bound");

  // plot loss | field
  CLI::App* plot = app.add_subcommand("plot", "Data-artifact plots (PGM)");
  plot->require_subcommand(1);
  CLI::App* ploss = plot->add_subcommand("loss", "Loss curve from a history CSV");
  std::string ploss_hist, ploss_out;
  ploss->add_option("--history", ploss_hist, "Loss history CSV")->required();
  ploss->add_option("--out", ploss_out, "Output PGM path")->required();

  CLI::App* pfield = plot->add_subcommand("field", "Grayscale field snapshot");
  std::string pfield_seq, pfield_out;
  int pfield_index = 0, pfield_channel = 0;
  pfield->add_option("--seq", pfield_seq, "Sequence (PDSEQ1)")->required();
  pfield->add_option("--index", pfield_index, "Step index");
  pfield->add_option("--channel", pfield_channel, "Channel index");
  pfield->add_option("--out", pfield_out, "Output PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  }

  if (fgen->parsed()) {
    fgen_args.m_set = fgen_m->count() > 0;
    fgen_args.dx_set = fgen_dx->count() > 0;
    fgen_args.factor_set = fgen_factor->count() > 0;
    return cmd_filters_gen(fgen_args, fgen_out);
  }
  if (fcheck->parsed()) return cmd_filters_check(fcheck_path, fcheck_tol);
  if (rsolve->parsed()) return cmd_ref_solve(rsolve_common, rsolve_ic, rsolve_out);
  if (isample->parsed()) return cmd_ic_sample(isample_common, isample_out);
  if (trn->parsed()) return cmd_train(trn_common, trn_ic, trn_out, trn_loss);
  if (pred->parsed())
    return cmd_predict(pred_common, pred_ckpt, pred_ic, pred_steps,
                       pred_steps_opt->count() > 0, pred_out);
  if (ev->parsed()) return cmd_eval(ev_pred, ev_truth, ev_out, ev_xmin, ev_xmax);
  if (ploss->parsed()) return cmd_plot_loss(ploss_hist, ploss_out);
  if (pfield->parsed())
    return cmd_plot_field(pfield_seq, pfield_index, pfield_channel, pfield_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pdnet::Error& e) {
    std::cerr << "error: " << category_token(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
