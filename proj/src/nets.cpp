#include "mpgan/nets.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"

namespace mpgan {

using nlohmann::json;

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "leaky_relu") return Activation::leaky_relu;
  throw FormatError("unknown activation tag: " + s);
}

namespace {

double act(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::leaky_relu: return x > 0.0 ? x : kLeakySlope * x;
  }
  return x;
}

double dact(Activation a, double pre) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return pre > 0.0 ? 1.0 : kLeakySlope;
  }
  return 1.0;
}

Matrix apply_act(Activation a, const Matrix& pre) {
  Matrix out(pre.rows, pre.cols);
  for (std::size_t i = 0; i < pre.size(); ++i) out.data[i] = act(a, pre.data[i]);
  return out;
}

Matrix act_mask(Activation a, const Matrix& pre) {
  Matrix out(pre.rows, pre.cols);
  for (std::size_t i = 0; i < pre.size(); ++i) out.data[i] = dact(a, pre.data[i]);
  return out;
}

}  // namespace

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

Mlp make_mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
             const Rng& rng) {
  if (dims.size() < 2) throw DimensionMismatch("an Mlp needs at least input and output dims");
  Mlp net;
  net.hidden = hidden;
  net.output = output;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Rng layer_rng = rng.substream("layer").substream(l);
    Dense d;
    d.w = Matrix(dims[l + 1], dims[l]);
    const double bound = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    for (double& v : d.w.data) v = layer_rng.uniform(-bound, bound);
    d.b.assign(dims[l + 1], 0.0);
    net.layers.push_back(std::move(d));
  }
  return net;
}

const Matrix& forward(const Mlp& net, const Matrix& batch, ForwardCache& cache) {
  if (batch.cols != net.input_dim())
    throw DimensionMismatch("forward: batch cols " + std::to_string(batch.cols) +
                            " != net input dim " + std::to_string(net.input_dim()));
  cache.input = batch;
  cache.pre.clear();
  cache.post.clear();
  const Matrix* cur = &cache.input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix pre = add_row_broadcast(matmul_nt(*cur, net.layers[l].w), net.layers[l].b);
    cache.post.push_back(apply_act(net.activation_of(l), pre));
    cache.pre.push_back(std::move(pre));
    cur = &cache.post.back();
  }
  return cache.post.back();
}

Matrix forward(const Mlp& net, const Matrix& batch) {
  ForwardCache cache;
  return forward(net, batch, cache);
}

MlpGrads zero_grads(const Mlp& net) {
  MlpGrads g;
  for (const auto& l : net.layers) {
    g.dw.emplace_back(l.w.rows, l.w.cols);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other, double s) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    for (std::size_t i = 0; i < dw[l].size(); ++i) dw[l].data[i] += s * other.dw[l].data[i];
    for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += s * other.db[l][i];
  }
}

void MlpGrads::scale(double s) {
  for (auto& m : dw) scale_inplace(m, s);
  for (auto& v : db)
    for (double& x : v) x *= s;
}

Matrix backward(const Mlp& net, const ForwardCache& cache, const Matrix& out_grad,
                MlpGrads& grads) {
  const std::size_t n_layers = net.layers.size();
  if (out_grad.rows != cache.input.rows || out_grad.cols != net.output_dim())
    throw DimensionMismatch("backward: out_grad shape mismatch");

  Matrix delta = hadamard(out_grad, act_mask(net.output, cache.pre.back()));
  for (std::size_t l = n_layers; l-- > 0;) {
    const Matrix& below = l == 0 ? cache.input : cache.post[l - 1];
    Matrix dw = matmul_tn(delta, below);
    for (std::size_t i = 0; i < dw.size(); ++i) grads.dw[l].data[i] += dw.data[i];
    Vector db = column_sums(delta);
    for (std::size_t i = 0; i < db.size(); ++i) grads.db[l][i] += db[i];

    Matrix dbelow = matmul(delta, net.layers[l].w);
    if (l == 0) return dbelow;
    delta = hadamard(dbelow, act_mask(net.activation_of(l - 1), cache.pre[l - 1]));
  }
  return {};
}

GradientPenaltyResult gradient_penalty_selected(const Mlp& net, const Matrix& batch,
                                                std::size_t out_index) {
  if (out_index >= net.output_dim())
    throw NonScalarOutput("penalised output index out of range");
  const std::size_t n_layers = net.layers.size();
  const std::size_t n = batch.rows;

  ForwardCache cache;
  forward(net, batch, cache);

  std::vector<Matrix> masks(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l)
    masks[l] = act_mask(net.activation_of(l), cache.pre[l]);

  // First backward pass: per-sample gradient of output[out_index] w.r.t. x.
  // The u_l = mask .* delta products are kept; the second pass needs them.
  std::vector<Matrix> u(n_layers);
  {
    Matrix sel(n, net.output_dim());
    for (std::size_t i = 0; i < n; ++i) sel(i, out_index) = 1.0;
    u[n_layers - 1] = hadamard(sel, masks[n_layers - 1]);
  }
  for (std::size_t l = n_layers - 1; l-- > 0;)
    u[l] = hadamard(matmul(u[l + 1], net.layers[l + 1].w), masks[l]);

  GradientPenaltyResult res;
  res.input_grads = matmul(u[0], net.layers[0].w);  // n x input_dim
  res.param_grads = zero_grads(net);

  // penalty = mean_i (||g_i|| - 1)^2 and its sensitivity w.r.t. g_i.
  Matrix sens(n, res.input_grads.cols);
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = res.input_grads.row(i);
    const double norm = l2_norm(g, res.input_grads.cols);
    res.penalty += (norm - 1.0) * (norm - 1.0);
    if (norm > 1e-12) {
      const double coeff = 2.0 * (norm - 1.0) / (norm * static_cast<double>(n));
      double* s = sens.row(i);
      for (std::size_t d = 0; d < res.input_grads.cols; ++d) s[d] = coeff * g[d];
    }
  }
  res.penalty /= static_cast<double>(n);

  // Second pass through the (piecewise-linear) backward graph. Masks are
  // locally constant, so only the explicit weight appearances contribute;
  // biases get exactly zero, matching finite differences away from kinks.
  Matrix s_delta = std::move(sens);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Matrix dw = matmul_tn(u[l], s_delta);
    for (std::size_t i = 0; i < dw.size(); ++i) res.param_grads.dw[l].data[i] += dw.data[i];
    if (l + 1 < n_layers)
      s_delta = hadamard(matmul_nt(s_delta, net.layers[l].w), masks[l]);
  }
  return res;
}

GradientPenaltyResult gradient_penalty(const Mlp& critic, const Matrix& batch) {
  if (critic.output_dim() != 1)
    throw NonScalarOutput("gradient penalty needs a scalar critic output, got dim " +
                          std::to_string(critic.output_dim()));
  return gradient_penalty_selected(critic, batch, 0);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* in = logits.row(i);
    double* o = out.row(i);
    double mx = in[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) o[j] /= sum;
  }
  return out;
}

XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows)
    throw DimensionMismatch("softmax_xent: one label per logits row required");
  const std::size_t n = logits.rows, c = logits.cols;
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw LabelOutOfRange("label " + std::to_string(y) + " for " + std::to_string(c) + " classes");

  XentResult res;
  res.grad_logits = softmax_rows(logits);
  for (std::size_t i = 0; i < n; ++i) {
    const double* in = logits.row(i);
    double mx = in[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, in[j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(in[j] - mx);
    lse = std::log(lse) + mx;
    res.loss += lse - in[labels[i]];
  }
  res.loss /= static_cast<double>(n);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* g = res.grad_logits.row(i);
    g[labels[i]] -= 1.0;
    for (std::size_t j = 0; j < c; ++j) g[j] *= inv_n;
  }
  return res;
}

AdamState make_adam(const Mlp& net, AdamConfig cfg) {
  AdamState st;
  st.cfg = cfg;
  for (const auto& l : net.layers) {
    st.mw.emplace_back(l.w.rows, l.w.cols);
    st.vw.emplace_back(l.w.rows, l.w.cols);
    st.mb.emplace_back(l.b.size(), 0.0);
    st.vb.emplace_back(l.b.size(), 0.0);
  }
  return st;
}

void adam_step(AdamState& st, Mlp& net, const MlpGrads& grads) {
  ++st.step;
  const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));

  auto update = [&](double& p, double g, double& m, double& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    p -= st.cfg.lr * (m / c1) / (std::sqrt(v / c2) + st.cfg.eps);
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    for (std::size_t i = 0; i < layer.w.size(); ++i)
      update(layer.w.data[i], grads.dw[l].data[i], st.mw[l].data[i], st.vw[l].data[i]);
    for (std::size_t i = 0; i < layer.b.size(); ++i)
      update(layer.b[i], grads.db[l][i], st.mb[l][i], st.vb[l][i]);
  }
}

std::uint64_t param_hash(const Mlp& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const double* p, std::size_t n) {
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : net.layers) {
    mix(l.w.data.data(), l.w.size());
    mix(l.b.data(), l.b.size());
  }
  return h;
}

namespace {

json net_shape_json(const Mlp& net) {
  json j;
  std::vector<std::size_t> dims{net.input_dim()};
  for (const auto& l : net.layers) dims.push_back(l.w.rows);
  j["dims"] = dims;
  j["hidden"] = to_string(net.hidden);
  j["output"] = to_string(net.output);
  return j;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& extra_header_json,
                     std::span<const Mlp* const> nets) {
  json header;
  header["meta"] = extra_header_json.empty() ? json::object() : json::parse(extra_header_json);
  header["nets"] = json::array();
  for (const Mlp* net : nets) header["nets"].push_back(net_shape_json(*net));

  io::atomic_write_file(path, [&](std::ostream& os) {
    os << header.dump() << "\n";
    io::write_magic(os, "MPCK");
    for (const Mlp* net : nets)
      for (const auto& l : net->layers) {
        io::write_f64_block(os, l.w.data.data(), l.w.size());
        io::write_f64_block(os, l.b.data(), l.b.size());
      }
  });
}

std::string load_checkpoint(const std::filesystem::path& path, std::vector<Mlp>& nets) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingCheckpoint("cannot open checkpoint: " + path.string());
  std::string header_line;
  if (!std::getline(is, header_line)) throw FormatError("checkpoint has no header line");
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw FormatError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }
  io::expect_magic(is, "MPCK", "checkpoint");

  nets.clear();
  for (const auto& shape : header.at("nets")) {
    const auto dims = shape.at("dims").get<std::vector<std::size_t>>();
    Mlp net;
    net.hidden = activation_from_string(shape.at("hidden").get<std::string>());
    net.output = activation_from_string(shape.at("output").get<std::string>());
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Dense d;
      d.w = Matrix(dims[l + 1], dims[l]);
      d.b.assign(dims[l + 1], 0.0);
      net.layers.push_back(std::move(d));
    }
    nets.push_back(std::move(net));
  }
  for (auto& net : nets)
    for (auto& l : net.layers) {
      io::read_f64_block(is, l.w.data.data(), l.w.size(), "checkpoint weights");
      io::read_f64_block(is, l.b.data(), l.b.size(), "checkpoint biases");
    }
  if (is.peek() != std::ifstream::traits_type::eof())
    throw FormatError("trailing bytes after checkpoint payload");
  return header.at("meta").dump();
}

}  // namespace mpgan
