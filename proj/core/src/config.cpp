#include "pdnet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pdnet {

using ordered_json = nlohmann::ordered_json;

const char* ref_scheme_name(RefScheme s) {
  switch (s) {
    case RefScheme::pddo: return "pddo";
    case RefScheme::fdm: return "fdm";
  }
  throw ConfigError("unknown reference scheme enum value");
}

RefScheme ref_scheme_from_name(const std::string& name) {
  if (name == "pddo") return RefScheme::pddo;
  if (name == "fdm") return RefScheme::fdm;
  throw ConfigError("ref.scheme must be \"pddo\" or \"fdm\", got \"" + name + "\"");
}

namespace {

// Wraps one JSON object level: typed reads with defaults, a consumed-key
// ledger, and an unknown-key sweep on finish().
class ObjectReader {
 public:
  ObjectReader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ConfigError(path_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    const ordered_json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(at(key) + " must be a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const ordered_json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(at(key) + " must be an integer");
    return v->get<int>();
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) {
    const ordered_json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned())
      throw ConfigError(at(key) + " must be a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const ordered_json* v = take(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key) + " must be a boolean");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const ordered_json* v = take(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(at(key) + " must be a string");
    return v->get<std::string>();
  }

  // Nested object; an absent block keeps all its defaults.
  ObjectReader object(const std::string& key) {
    const ordered_json* v = take(key);
    if (!v) return ObjectReader(empty_, at(key));
    return ObjectReader(*v, at(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!consumed_.count(key))
        throw ConfigError("unknown key " + at(key));
  }

 private:
  const ordered_json* take(const std::string& key) {
    consumed_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  static const ordered_json empty_;
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

const ordered_json ObjectReader::empty_ = ordered_json::object();

}  // namespace

void RunConfig::validate() const {
  pde.validate();
  make_grid(grid.n, grid.x_min, grid.x_max);  // re-run construction checks
  if (filter_m < 1) throw ConfigError("filter.m must be >= 1");
  if (!(horizon_factor > filter_m))
    throw ConfigError("filter.horizon_factor must exceed filter.m");
  if (!(ic_amplitude > 0.0)) throw ConfigError("ic.amplitude must be positive");
  if (extrapolation_steps < 0) throw ConfigError("eval.extrapolation_steps must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  // The checkpoint path is a CLI output argument, supplied later; validate
  // the rest of the train block without the cadence/path pairing rule.
  TrainConfig t = make_train_config(*this);
  t.checkpoint_every = 0;
  t.validate();
  // Reference block checks that do not need the filters built.
  if (!(dt_ref > 0.0)) throw ConfigError("ref.dt_ref must be positive");
  if (save_every < 1) throw ConfigError("ref.save_every must be >= 1");
  if (t_end < 0.0) throw ConfigError("ref.t_end must be >= 0");
}

RunConfig parse_run_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ObjectReader root(j, "");
  int version = root.integer("schema_version", -1);
  if (version != RunConfig::kSchemaVersion)
    throw ConfigError("schema_version must be present and equal to " +
                      std::to_string(RunConfig::kSchemaVersion));

  RunConfig cfg;

  {
    ObjectReader pde = root.object("pde");
    cfg.pde.kind = pde_kind_from_name(pde.text("kind", pde_kind_name(cfg.pde.kind)));
    {
      ObjectReader b = pde.object("burgers");
      cfg.pde.burgers.nu = b.number("nu", cfg.pde.burgers.nu);
      cfg.pde.burgers.advection = b.boolean("advection", cfg.pde.burgers.advection);
      b.finish();
    }
    {
      ObjectReader lo = pde.object("lambda_omega");
      cfg.pde.lambda_omega.diffusion = lo.number("diffusion", cfg.pde.lambda_omega.diffusion);
      cfg.pde.lambda_omega.literal_form =
          lo.boolean("literal_form", cfg.pde.lambda_omega.literal_form);
      cfg.pde.lambda_omega.beta = lo.number("beta", cfg.pde.lambda_omega.beta);
      lo.finish();
    }
    {
      ObjectReader gs = pde.object("gray_scott");
      cfg.pde.gray_scott.eps1 = gs.number("eps1", cfg.pde.gray_scott.eps1);
      cfg.pde.gray_scott.eps2 = gs.number("eps2", cfg.pde.gray_scott.eps2);
      cfg.pde.gray_scott.b = gs.number("b", cfg.pde.gray_scott.b);
      cfg.pde.gray_scott.d = gs.number("d", cfg.pde.gray_scott.d);
      gs.finish();
    }
    pde.finish();
  }
  {
    ObjectReader grid = root.object("grid");
    int n = grid.integer("n", cfg.grid.n);
    double x_min = grid.number("x_min", cfg.grid.x_min);
    double x_max = grid.number("x_max", cfg.grid.x_max);
    grid.finish();
    cfg.grid = make_grid(n, x_min, x_max);
  }
  {
    ObjectReader filter = root.object("filter");
    cfg.filter_m = filter.integer("m", cfg.filter_m);
    cfg.horizon_factor = filter.number("horizon_factor", cfg.horizon_factor);
    filter.finish();
  }
  {
    ObjectReader lstm = root.object("lstm");
    cfg.options.output_gate_bias =
        lstm.boolean("output_gate_bias", cfg.options.output_gate_bias);
    lstm.finish();
  }
  {
    ObjectReader decoder = root.object("decoder");
    cfg.options.final_linear = decoder.boolean("final_linear", cfg.options.final_linear);
    decoder.finish();
  }
  {
    ObjectReader ic = root.object("ic");
    cfg.ic_seed = ic.uinteger("seed", cfg.ic_seed);
    cfg.ic_amplitude = ic.number("amplitude", cfg.ic_amplitude);
    ic.finish();
  }
  {
    ObjectReader train = root.object("train");
    cfg.train_steps = train.integer("steps", cfg.train_steps);
    cfg.dt = train.number("dt", cfg.dt);
    cfg.epochs = train.integer("epochs", cfg.epochs);
    cfg.lr0 = train.number("lr0", cfg.lr0);
    cfg.lr_final = train.number("lr_final", cfg.lr_final);
    cfg.bptt_window = train.integer("bptt_window", cfg.bptt_window);
    cfg.w_out = train.number("w_out", cfg.w_out);
    cfg.w_lat = train.number("w_lat", cfg.w_lat);
    cfg.train_seed = train.uinteger("seed", cfg.train_seed);
    cfg.grad_clip = train.number("grad_clip", cfg.grad_clip);
    cfg.checkpoint_every = train.integer("checkpoint_every", cfg.checkpoint_every);
    train.finish();
  }
  {
    ObjectReader ref = root.object("ref");
    cfg.dt_ref = ref.number("dt_ref", cfg.dt_ref);
    cfg.save_every = ref.integer("save_every", cfg.save_every);
    cfg.t_end = ref.number("t_end", cfg.t_end);
    cfg.scheme = ref_scheme_from_name(ref.text("scheme", ref_scheme_name(cfg.scheme)));
    ref.finish();
  }
  {
    ObjectReader eval = root.object("eval");
    cfg.extrapolation_steps =
        eval.integer("extrapolation_steps", cfg.extrapolation_steps);
    eval.finish();
  }
  root.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed on config '" + path + "'");
  return parse_run_config(buf.str());
}

std::string dump_resolved_config(const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["pde"] = {
      {"kind", pde_kind_name(cfg.pde.kind)},
      {"burgers",
       {{"nu", cfg.pde.burgers.nu}, {"advection", cfg.pde.burgers.advection}}},
      {"lambda_omega",
       {{"diffusion", cfg.pde.lambda_omega.diffusion},
        {"literal_form", cfg.pde.lambda_omega.literal_form},
        {"beta", cfg.pde.lambda_omega.beta}}},
      {"gray_scott",
       {{"eps1", cfg.pde.gray_scott.eps1},
        {"eps2", cfg.pde.gray_scott.eps2},
        {"b", cfg.pde.gray_scott.b},
        {"d", cfg.pde.gray_scott.d}}},
  };
  j["grid"] = {{"n", cfg.grid.n}, {"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max}};
  j["filter"] = {{"m", cfg.filter_m}, {"horizon_factor", cfg.horizon_factor}};
  j["lstm"] = {{"output_gate_bias", cfg.options.output_gate_bias}};
  j["decoder"] = {{"final_linear", cfg.options.final_linear}};
  j["ic"] = {{"seed", cfg.ic_seed}, {"amplitude", cfg.ic_amplitude}};
  j["train"] = {
      {"steps", cfg.train_steps},   {"dt", cfg.dt},
      {"epochs", cfg.epochs},       {"lr0", cfg.lr0},
      {"lr_final", cfg.lr_final},   {"bptt_window", cfg.bptt_window},
      {"w_out", cfg.w_out},         {"w_lat", cfg.w_lat},
      {"seed", cfg.train_seed},     {"grad_clip", cfg.grad_clip},
      {"checkpoint_every", cfg.checkpoint_every},
  };
  j["ref"] = {{"dt_ref", cfg.dt_ref},
              {"save_every", cfg.save_every},
              {"t_end", cfg.t_end},
              {"scheme", ref_scheme_name(cfg.scheme)}};
  j["eval"] = {{"extrapolation_steps", cfg.extrapolation_steps}};
  return j.dump(2) + "\n";
}

TrainConfig make_train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.pde = cfg.pde;
  t.grid = cfg.grid;
  t.filter_m = cfg.filter_m;
  t.horizon_factor = cfg.horizon_factor;
  t.steps = cfg.train_steps;
  t.dt = cfg.dt;
  t.epochs = cfg.epochs;
  t.lr0 = cfg.lr0;
  t.lr_final = cfg.lr_final;
  t.bptt_window = cfg.bptt_window;
  t.w_out = cfg.w_out;
  t.w_lat = cfg.w_lat;
  t.seed = cfg.train_seed;
  t.grad_clip = cfg.grad_clip;
  t.options = cfg.options;
  t.checkpoint_every = cfg.checkpoint_every;
  return t;
}

SolveConfig make_solve_config(const RunConfig& cfg) {
  SolveConfig s;
  s.pde = cfg.pde;
  s.grid = cfg.grid;
  s.t_end = cfg.t_end;
  s.dt_ref = cfg.dt_ref;
  s.save_every = cfg.save_every;
  s.filters = cfg.scheme == RefScheme::fdm
                  ? DerivativeFilterSet::fdm(cfg.grid.dx())
                  : DerivativeFilterSet::build(cfg.filter_m, cfg.grid.dx(),
                                               cfg.horizon_factor);
  return s;
}

}  // namespace pdnet
