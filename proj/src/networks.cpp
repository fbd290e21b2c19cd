#include <bit>
#include <cstring>
#include <fstream>

#include "tda/kernels.hpp"
#include "tda/networks.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace tda {

namespace k = tda::kernels;

EncoderParams init_encoder(const EncoderSpec& spec, Rng rng) {
  if (spec.input <= 0 || spec.latent <= 0) throw ShapeError("init_encoder: bad widths");
  EncoderParams p;
  p.spec = spec;
  int fan_in = spec.input;
  for (int width : spec.hidden) {
    if (width <= 0) throw ShapeError("init_encoder: bad hidden width");
    p.w.push_back(init_weight(fan_in, width, rng));
    p.b.emplace_back(1, width);
    fan_in = width;
  }
  p.w_mu = init_weight(fan_in, spec.latent, rng);
  p.b_mu = Matrix(1, spec.latent);
  p.w_logvar = init_weight(fan_in, spec.latent, rng);
  p.b_logvar = Matrix(1, spec.latent);
  return p;
}

EncodeNodes encoder_nodes(Graph& g, const EncoderParams& p, const std::string& prefix,
                          NodeId x, std::optional<NodeId> eps, bool trainable) {
  NodeId a = x;
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    const std::string tag = std::to_string(i);
    const NodeId w = g.param(prefix + "/w" + tag, p.w[i], trainable);
    const NodeId b = g.param(prefix + "/b" + tag, p.b[i], trainable);
    a = g.leaky_relu(g.bias_add(g.matmul(a, w), b), p.spec.leaky_slope);
  }
  EncodeNodes out;
  const NodeId w_mu = g.param(prefix + "/w_mu", p.w_mu, trainable);
  const NodeId b_mu = g.param(prefix + "/b_mu", p.b_mu, trainable);
  out.mu = g.bias_add(g.matmul(a, w_mu), b_mu);
  const NodeId w_lv = g.param(prefix + "/w_lv", p.w_logvar, trainable);
  const NodeId b_lv = g.param(prefix + "/b_lv", p.b_logvar, trainable);
  out.logvar = g.bias_add(g.matmul(a, w_lv), b_lv);
  if (eps) {
    out.sigma = g.exp_op(g.scale(out.logvar, 0.5));
    out.z = g.add(out.mu, g.mul(out.sigma, *eps));
  } else {
    out.z = out.mu;
  }
  return out;
}

LatentBatch encode(const EncoderParams& p, const Matrix& x, const Matrix& eps) {
  if (eps.rows() != x.rows() || eps.cols() != p.spec.latent)
    throw ShapeError("encode: eps must be batch x latent");
  LatentBatch out;
  Matrix a = x;
  Matrix t;
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    k::matmul(a, false, p.w[i], false, t, false);
    Matrix lin;
    k::bias_add(t, p.b[i], lin);
    k::leaky_relu(lin, p.spec.leaky_slope, a);
  }
  k::matmul(a, false, p.w_mu, false, t, false);
  k::bias_add(t, p.b_mu, out.mu);
  Matrix logvar;
  k::matmul(a, false, p.w_logvar, false, t, false);
  k::bias_add(t, p.b_logvar, logvar);
  Matrix half;
  k::scale(logvar, 0.5, half);
  k::exp_fwd(half, out.sigma);
  Matrix noise;
  k::hadamard(out.sigma, eps, noise);
  k::add(out.mu, noise, out.z);
  return out;
}

Matrix encode_mean(const EncoderParams& p, const Matrix& x) {
  Matrix a = x;
  Matrix t;
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    k::matmul(a, false, p.w[i], false, t, false);
    Matrix lin;
    k::bias_add(t, p.b[i], lin);
    k::leaky_relu(lin, p.spec.leaky_slope, a);
  }
  k::matmul(a, false, p.w_mu, false, t, false);
  Matrix mu;
  k::bias_add(t, p.b_mu, mu);
  return mu;
}

Model init_model(int input_dim, int k_classes, const ArchConfig& arch, std::uint64_t seed) {
  if (input_dim <= 0) throw ShapeError("init_model: input_dim must be positive");
  if (k_classes < 2) throw ShapeError("init_model: need at least two classes");
  const Rng master(seed);
  Model m;
  m.k = k_classes;
  m.input_dim = input_dim;
  m.encoder = init_encoder(
      EncoderSpec{input_dim, arch.encoder_hidden, arch.latent_dim, arch.leaky_slope},
      master.split(kStreamInitEncoder));
  m.classifier = init_mlp(
      MlpSpec{arch.latent_dim, arch.classifier_hidden, k_classes, arch.leaky_slope, Head::softmax},
      master.split(kStreamInitClassifier));
  m.task_disc = init_mlp(
      MlpSpec{arch.latent_dim, arch.task_disc_hidden, k_classes + 1, arch.leaky_slope,
              Head::softmax},
      master.split(kStreamInitTaskDisc));
  m.prior_disc = init_mlp(
      MlpSpec{arch.latent_dim, arch.binary_disc_hidden, 1, arch.leaky_slope, Head::logistic},
      master.split(kStreamInitPriorDisc));
  m.domain_disc = init_mlp(
      MlpSpec{arch.latent_dim, arch.task_disc_hidden, 1, arch.leaky_slope, Head::logistic},
      master.split(kStreamInitDomainDisc));
  return m;
}

Matrix classify(const Model& m, const Matrix& z) { return mlp_apply(m.classifier, z); }

Matrix discriminate_task(const Model& m, const Matrix& z) { return mlp_apply(m.task_disc, z); }

Matrix discriminate_binary(const MlpParams& disc, const Matrix& z) {
  if (disc.spec.head != Head::logistic)
    throw Error("discriminate_binary: discriminator must have a logistic head");
  const Matrix pair = mlp_apply(disc, z);
  Matrix out(pair.rows(), 1);
  for (int i = 0; i < pair.rows(); ++i) out(i, 0) = pair(i, 0);
  return out;
}

std::vector<ParamRef> encoder_param_refs(EncoderParams& p, const std::string& prefix) {
  std::vector<ParamRef> refs;
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    const std::string tag = std::to_string(i);
    refs.push_back({prefix + "/w" + tag, &p.w[i]});
    refs.push_back({prefix + "/b" + tag, &p.b[i]});
  }
  refs.push_back({prefix + "/w_mu", &p.w_mu});
  refs.push_back({prefix + "/b_mu", &p.b_mu});
  refs.push_back({prefix + "/w_lv", &p.w_logvar});
  refs.push_back({prefix + "/b_lv", &p.b_logvar});
  return refs;
}

std::vector<ParamRef> mlp_param_refs(MlpParams& p, const std::string& prefix) {
  std::vector<ParamRef> refs;
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    const std::string tag = std::to_string(i);
    refs.push_back({prefix + "/w" + tag, &p.w[i]});
    refs.push_back({prefix + "/b" + tag, &p.b[i]});
  }
  return refs;
}

std::vector<ParamRef> model_param_refs(Model& m) {
  std::vector<ParamRef> refs = encoder_param_refs(m.encoder, kPrefixEncoder);
  for (auto& r : mlp_param_refs(m.classifier, kPrefixClassifier)) refs.push_back(r);
  for (auto& r : mlp_param_refs(m.task_disc, kPrefixTaskDisc)) refs.push_back(r);
  for (auto& r : mlp_param_refs(m.prior_disc, kPrefixPriorDisc)) refs.push_back(r);
  for (auto& r : mlp_param_refs(m.domain_disc, kPrefixDomainDisc)) refs.push_back(r);
  return refs;
}

namespace {

constexpr char kMagic[4] = {'T', 'D', 'A', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_widths(std::ostream& os, const std::vector<int>& widths) {
  put_u32(os, static_cast<std::uint32_t>(widths.size()));
  for (int w : widths) put_u32(os, static_cast<std::uint32_t>(w));
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw IoError("checkpoint: truncated file");
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw IoError("checkpoint: truncated file");
  return v;
}

double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw IoError("checkpoint: truncated file");
  return v;
}

std::vector<int> get_widths(std::istream& is) {
  const std::uint32_t n = get_u32(is);
  if (n > 64) throw IoError("checkpoint: implausible layer count");
  std::vector<int> out(n);
  for (auto& w : out) w = static_cast<int>(get_u32(is));
  return out;
}

}  // namespace

void save_model(const std::string& path, const Model& m, const std::string& config_echo) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  put_u64(os, config_echo.size());
  os.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
  put_u32(os, static_cast<std::uint32_t>(m.input_dim));
  put_u32(os, static_cast<std::uint32_t>(m.k));
  put_u32(os, static_cast<std::uint32_t>(m.latent_dim()));
  put_f64(os, m.encoder.spec.leaky_slope);
  put_widths(os, m.encoder.spec.hidden);
  put_widths(os, m.classifier.spec.hidden);
  put_widths(os, m.task_disc.spec.hidden);
  put_widths(os, m.prior_disc.spec.hidden);

  auto refs = model_param_refs(const_cast<Model&>(m));
  put_u32(os, static_cast<std::uint32_t>(refs.size()));
  for (const auto& r : refs) {
    put_u32(os, static_cast<std::uint32_t>(r.name.size()));
    os.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    put_u32(os, static_cast<std::uint32_t>(r.tensor->rows()));
    put_u32(os, static_cast<std::uint32_t>(r.tensor->cols()));
    os.write(reinterpret_cast<const char*>(r.tensor->data()),
             static_cast<std::streamsize>(r.tensor->size() * sizeof(double)));
  }
  if (!os) throw IoError("checkpoint: write to '" + path + "' failed");
}

Model load_model(const std::string& path, std::string* config_echo) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
  char magic[4];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw IoError("checkpoint: '" + path + "' is not a model checkpoint");
  const std::uint32_t version = get_u32(is);
  if (version != kVersion)
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  const std::uint64_t echo_len = get_u64(is);
  if (echo_len > (1ull << 24)) throw IoError("checkpoint: implausible config block");
  std::string echo(echo_len, '\0');
  is.read(echo.data(), static_cast<std::streamsize>(echo_len));
  if (!is) throw IoError("checkpoint: truncated file");
  if (config_echo) *config_echo = echo;

  ArchConfig arch;
  const int input_dim = static_cast<int>(get_u32(is));
  const int k_classes = static_cast<int>(get_u32(is));
  arch.latent_dim = static_cast<int>(get_u32(is));
  arch.leaky_slope = get_f64(is);
  arch.encoder_hidden = get_widths(is);
  arch.classifier_hidden = get_widths(is);
  arch.task_disc_hidden = get_widths(is);
  arch.binary_disc_hidden = get_widths(is);

  Model m = init_model(input_dim, k_classes, arch, 0);
  auto refs = model_param_refs(m);
  const std::uint32_t count = get_u32(is);
  if (count != refs.size()) throw IoError("checkpoint: tensor count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(is);
    if (name_len > 256) throw IoError("checkpoint: implausible tensor name");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const int rows = static_cast<int>(get_u32(is));
    const int cols = static_cast<int>(get_u32(is));
    if (name != refs[i].name || rows != refs[i].tensor->rows() ||
        cols != refs[i].tensor->cols())
      throw IoError("checkpoint: tensor '" + name + "' does not match the declared architecture");
    is.read(reinterpret_cast<char*>(refs[i].tensor->data()),
            static_cast<std::streamsize>(refs[i].tensor->size() * sizeof(double)));
    if (!is) throw IoError("checkpoint: truncated tensor data");
    if (!k::all_finite(*refs[i].tensor))
      throw NonFiniteError("checkpoint: tensor '" + name + "' has non-finite entries");
  }
  return m;
}

}  // namespace tda
