#include "pdnet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pdnet/ops.hpp"
#include "pdnet/pddo.hpp"

namespace pdnet {

void TrainConfig::validate() const {
  pde.validate();
  if (steps < 3) throw ConfigError("train: steps must be >= 3, got " + std::to_string(steps));
  if (bptt_window < 3 || bptt_window > steps)
    throw ConfigError("train: bptt_window must lie in [3, steps], got " +
                      std::to_string(bptt_window));
  if (!(dt > 0.0)) throw ConfigError("train: dt must be positive");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(lr0 >= lr_final) || !(lr_final > 0.0))
    throw ConfigError("train: learning rates must satisfy lr0 >= lr_final > 0");
  if (w_out < 0.0 || w_lat < 0.0) throw ConfigError("train: loss weights must be >= 0");
  if (grid.n % 8 != 0)
    throw ConfigError("train: grid side must be divisible by 8, got " +
                      std::to_string(grid.n));
  if (checkpoint_every < 0) throw ConfigError("train: checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_path.empty())
    throw ConfigError("train: checkpoint cadence set but checkpoint_path is empty");
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw ConfigError("lr_schedule: epoch must be >= 0");
  if (cfg.epochs <= 1) return cfg.lr0;
  double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  return cfg.lr0 * std::pow(cfg.lr_final / cfg.lr0, frac);
}

AdamState AdamState::init(const ModelParams& params) {
  AdamState st;
  for (const auto& [name, t] : params.named_params()) {
    st.m.emplace_back(t->size(), 0.0);
    st.v.emplace_back(t->size(), 0.0);
  }
  return st;
}

void adam_update(ModelParams& params, const std::vector<std::vector<double>>& grads,
                 AdamState& state, double lr) {
  auto named = params.named_params();
  if (grads.size() != named.size() || state.m.size() != named.size())
    throw ShapeError("adam_update: gradient/state list does not match parameter list");
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (grads[i].size() != static_cast<std::size_t>(named[i].second->size()))
      throw ShapeError("adam_update: gradient shape mismatch for '" + named[i].first + "'");
    for (double g : grads[i])
      if (!std::isfinite(g))
        throw NumericError("adam_update: non-finite gradient for parameter '" +
                           named[i].first + "'");
  }
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < named.size(); ++i) {
    double* p = named[i].second->data();
    const std::vector<double>& g = grads[i];
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (std::size_t j = 0; j < g.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

namespace {

struct WindowLoss {
  double out_sse = 0.0;
  double lat_sse = 0.0;
  std::size_t out_count = 0;
  std::size_t lat_count = 0;
  double total = 0.0;
};

std::vector<std::vector<double>> collect_grads(Tape& tape, ModelParams& tracked) {
  std::vector<std::vector<double>> grads;
  for (const auto& [name, t] : tracked.named_params())
    grads.push_back(tape.grad_or_zeros(*t));
  return grads;
}

void clip_global_norm(std::vector<std::vector<double>>& grads, double ceiling) {
  if (ceiling <= 0.0) return;
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g) sq += v * v;
  double norm = std::sqrt(sq);
  if (norm <= ceiling) return;
  double s = ceiling / norm;
  for (auto& g : grads)
    for (double& v : g) v *= s;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Field& ic) {
  cfg.validate();
  if (!(ic.grid == cfg.grid))
    throw ShapeError("train: initial condition grid does not match configured grid");
  if (ic.channels != 2) throw ShapeError("train: initial condition must have 2 channels");
  if (!ic.all_finite()) throw NumericError("train: initial condition is not finite");

  DerivativeFilterSet filters =
      DerivativeFilterSet::build(cfg.filter_m, cfg.grid.dx(), cfg.horizon_factor);
  Grid latent_grid = make_grid(cfg.grid.n / 8, cfg.grid.x_min, cfg.grid.x_max);
  DerivativeFilterSet latent_filters =
      DerivativeFilterSet::build(cfg.filter_m, latent_grid.dx(), cfg.horizon_factor);

  TrainResult result;
  result.params = init_params(cfg.seed, cfg.grid.n, cfg.dt, cfg.options);
  if (cfg.epochs == 0) return result;

  AdamState adam = AdamState::init(result.params);
  Tensor ic_tensor({cfg.grid.n, cfg.grid.n, 2}, ic.data);

  // Snapshot for abort recovery: parameters at the end of the last completed
  // epoch (initialization counts as epoch 0).
  auto snapshot = [&]() {
    ModelParams copy = result.params;
    for (auto& [name, t] : copy.named_params()) *t = t->clone();
    return copy;
  };
  ModelParams last_good = snapshot();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = lr_schedule(epoch, cfg);
    double epoch_out_sse = 0.0, epoch_lat_sse = 0.0;
    std::size_t epoch_out_count = 0, epoch_lat_count = 0;

    Tensor u = ic_tensor;
    Tensor h = zero_state(cfg.grid.n);
    Tensor c = zero_state(cfg.grid.n);

    int done = 0, window_index = 0;
    bool failed = false;
    std::string fail_message;
    while (done < cfg.steps && !failed) {
      int w = std::min(cfg.bptt_window, cfg.steps - done);
      Tape tape;
      ModelParams tracked = result.params.tracked(tape);

      std::vector<Tensor> window_seq{u};
      std::vector<Tensor> lat_u, lat_v;
      for (int i = 0; i < w; ++i) {
        StepOutput so = network_step(window_seq.back(), h, c, tracked);
        window_seq.push_back(so.u);
        lat_u.push_back(so.latent_u);
        lat_v.push_back(so.latent_v);
        h = so.h;
        c = so.c;
      }

      // A trailing stub shorter than 3 states cannot host the central time
      // stencil; it still advances the state so every epoch covers T steps.
      bool has_loss = static_cast<int>(window_seq.size()) >= 3 && lat_u.size() >= 3;
      if (has_loss) {
        std::vector<Tensor> out_res = output_residual(cfg.pde, window_seq, cfg.dt, filters);
        std::vector<Tensor> lat_in_u = lat_u, lat_in_v = lat_v;
        if (cfg.w_lat == 0.0) {
          for (auto& t : lat_in_u) t = t.detached();
          for (auto& t : lat_in_v) t = t.detached();
        }
        std::vector<Tensor> lat_res =
            latent_residual(cfg.pde, lat_in_u, lat_in_v, cfg.dt, latent_grid, latent_filters);

        Tensor mse_out = residual_mse(out_res);
        Tensor mse_lat = residual_mse(lat_res);
        Tensor loss = add(scale(mse_out, cfg.w_out), scale(mse_lat, cfg.w_lat));

        double loss_value = loss.value();
        if (!std::isfinite(loss_value)) {
          failed = true;
          std::ostringstream os;
          os << "non-finite loss in epoch " << (epoch + 1) << ", window " << window_index;
          fail_message = os.str();
          break;
        }

        std::size_t oc = 0, lc = 0;
        for (const auto& r : out_res) oc += static_cast<std::size_t>(r.size());
        for (const auto& r : lat_res) lc += static_cast<std::size_t>(r.size());
        epoch_out_sse += mse_out.value() * static_cast<double>(oc);
        epoch_lat_sse += mse_lat.value() * static_cast<double>(lc);
        epoch_out_count += oc;
        epoch_lat_count += lc;

        tape.backward(loss);
        std::vector<std::vector<double>> grads = collect_grads(tape, tracked);
        clip_global_norm(grads, cfg.grad_clip);
        try {
          adam_update(result.params, grads, adam, lr);
        } catch (const NumericError& e) {
          failed = true;
          fail_message = e.what();
          break;
        }
        if (cfg.on_window_end)
          cfg.on_window_end(result.params, epoch, window_index, loss_value);
      }

      // Sever gradient flow at the window boundary: carry values only.
      u = window_seq.back().detached();
      h = h.detached();
      c = c.detached();
      done += w;
      ++window_index;
    }

    if (failed) {
      result.params = last_good;
      result.aborted = true;
      result.message = fail_message;
      return result;
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss_output = epoch_out_count ? epoch_out_sse / epoch_out_count : 0.0;
    stats.loss_latent = epoch_lat_count ? epoch_lat_sse / epoch_lat_count : 0.0;
    stats.loss_total = cfg.w_out * stats.loss_output + cfg.w_lat * stats.loss_latent;
    stats.lr = lr;
    if (!std::isfinite(stats.loss_total)) {
      result.params = last_good;
      result.aborted = true;
      result.message = "non-finite epoch loss at epoch " + std::to_string(epoch + 1);
      return result;
    }
    result.history.push_back(stats);
    last_good = snapshot();

    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(result.params, cfg.checkpoint_path);
  }
  return result;
}

void write_loss_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "epoch,loss_output,loss_latent,loss_total,lr\n";
  out.precision(17);
  for (const auto& row : history)
    out << row.epoch << "," << row.loss_output << "," << row.loss_latent << ","
        << row.loss_total << "," << row.lr << "\n";
  if (!out) throw IoError("write failed on '" + path + "'");
}

std::vector<EpochStats> read_loss_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != "epoch,loss_output,loss_latent,loss_total,lr")
    throw IoError("loss history '" + path + "' has an unexpected header");
  std::vector<EpochStats> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochStats row;
    char comma;
    std::istringstream ls(line);
    if (!(ls >> row.epoch >> comma >> row.loss_output >> comma >> row.loss_latent >>
          comma >> row.loss_total >> comma >> row.lr))
      throw IoError("loss history '" + path + "' has a malformed row: " + line);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pdnet
