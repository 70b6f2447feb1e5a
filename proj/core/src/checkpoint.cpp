#include <map>

#include "binio.hpp"
#include "pdnet/network.hpp"

namespace pdnet {

namespace {

const char kMagic[6] = {'P', 'D', 'C', 'K', 'P', '1'};

void write_tensor(binio::Writer& w, const std::string& name, const Tensor& t) {
  if (name.size() > 0xFFFF) throw IoError("checkpoint tensor name too long");
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (int d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
  w.f64s(t.data(), static_cast<std::size_t>(t.size()));
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  auto named = params.named_params();
  binio::Writer w(path);
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(named.size()) + 4);
  for (const auto& [name, t] : named) {
    if (!t->defined()) throw ConfigError("save_checkpoint: parameter '" + name + "' undefined");
    write_tensor(w, name, *t);
  }
  write_tensor(w, "meta.dt", Tensor::scalar(params.dt));
  write_tensor(w, "meta.grid_n", Tensor::scalar(static_cast<double>(params.grid_n)));
  write_tensor(w, "meta.final_linear", Tensor::scalar(params.options.final_linear ? 1.0 : 0.0));
  write_tensor(w, "meta.output_gate_bias",
               Tensor::scalar(params.options.output_gate_bias ? 1.0 : 0.0));
  w.close();
}

ModelParams load_checkpoint(const std::string& path) {
  binio::Reader r(path);
  r.magic(kMagic);
  std::uint32_t count = r.u32();
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t len = r.u16();
    std::string name(len, '\0');
    r.bytes(name.data(), len);
    std::uint32_t rank = r.u32();
    if (rank > 8) throw IoError("checkpoint '" + path + "': tensor '" + name +
                                "' has implausible rank " + std::to_string(rank));
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<int>(r.u32()));
    Tensor t(shape);
    r.f64s(t.data(), static_cast<std::size_t>(t.size()));
    if (!tensors.emplace(name, std::move(t)).second)
      throw IoError("checkpoint '" + path + "': duplicate tensor '" + name + "'");
  }
  if (!r.at_eof()) throw IoError("trailing bytes in checkpoint '" + path + "'");

  auto take = [&](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw IoError("checkpoint '" + path + "' is missing tensor '" + name + "'");
    Tensor t = std::move(it->second);
    tensors.erase(it);
    return t;
  };

  ModelParams p;
  p.dt = take("meta.dt").value();
  double grid_n = take("meta.grid_n").value();
  p.grid_n = static_cast<int>(grid_n);
  p.options.final_linear = take("meta.final_linear").value() != 0.0;
  p.options.output_gate_bias = take("meta.output_gate_bias").value() != 0.0;
  if (p.grid_n < 8 || p.grid_n % 8 != 0 || grid_n != p.grid_n)
    throw IoError("checkpoint '" + path + "' has invalid grid side");
  if (!(p.dt > 0.0)) throw IoError("checkpoint '" + path + "' has non-positive dt");

  // Template of the expected parameter set (shapes included) for this size.
  ModelParams tmpl = init_params(0, p.grid_n, p.dt, p.options);
  auto tmpl_named = tmpl.named_params();
  auto dst_named = p.named_params();
  for (std::size_t i = 0; i < tmpl_named.size(); ++i) {
    Tensor loaded = take(tmpl_named[i].first);
    if (loaded.shape() != tmpl_named[i].second->shape())
      throw IoError("checkpoint '" + path + "': tensor '" + tmpl_named[i].first +
                    "' has shape " + shape_str(loaded.shape()) + ", expected " +
                    shape_str(tmpl_named[i].second->shape()));
    *dst_named[i].second = std::move(loaded);
  }
  if (!tensors.empty())
    throw IoError("checkpoint '" + path + "': unexpected tensor '" +
                  tensors.begin()->first + "'");
  for (const auto& [name, t] : p.named_params())
    if (!t->all_finite())
      throw NumericError("checkpoint '" + path + "': tensor '" + name +
                         "' contains non-finite values");
  return p;
}

}  // namespace pdnet
