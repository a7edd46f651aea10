#include "selfalign/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "binio.hpp"
#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"
#include "selfalign/rng.hpp"

namespace selfalign::enc {
namespace {

constexpr double kNormFloor = 1e-12;

struct Forward {
  std::vector<double> h_c;       // dim
  Mat n_feat;                    // deg x dim, neighbor input features
  Mat h_n;                       // deg x dim
  std::vector<double> z;         // raw attention logits
  std::vector<double> alpha;     // softmax weights
  std::vector<double> u;         // h_c + aggregate
  double norm = 0.0;
};

void check_ctx(const EncoderParams& p, const EncodeContext& ctx) {
  if (!ctx.entity_store || !ctx.graph) {
    throw ConfigError("encode context is missing the entity store or graph");
  }
  if (ctx.entity_store->dim != p.dim) {
    throw DimensionMismatch("entity embedding dim does not match encoder dim");
  }
  if (ctx.relation_mode) {
    if (!ctx.relation_store) {
      throw ConfigError("relation mode requires a relation embedding store");
    }
    if (ctx.relation_store->dim != p.dim) {
      throw DimensionMismatch("relation embedding dim does not match encoder dim");
    }
  }
}

Forward run_forward(const EncoderParams& p, const EncodeContext& ctx,
                    kg::EntityId e) {
  const std::size_t dim = p.dim;
  const auto v = ctx.entity_store->vec(e);
  Forward f;
  f.h_c.resize(dim);
  kernels::matvec(p.w_center.data(), dim, dim, v.data(), f.h_c.data());

  const auto& nbrs = ctx.graph->neighbors[e];
  const std::size_t deg = nbrs.size();
  f.u = f.h_c;
  if (deg > 0) {
    f.n_feat = Mat(deg, dim);
    f.h_n = Mat(deg, dim);
    f.z.resize(deg);
    f.alpha.resize(deg);
    const double* a_center = p.attn.data();
    const double* a_nbr = p.attn.data() + dim;
    double base = kernels::dot(a_center, f.h_c.data(), dim);
    for (std::size_t j = 0; j < deg; ++j) {
      double* nf = f.n_feat.row(j);
      const auto vj = ctx.entity_store->vec(nbrs[j].entity);
      std::copy(vj.begin(), vj.end(), nf);
      if (ctx.relation_mode) {
        const auto vr = ctx.relation_store->vec(nbrs[j].relation);
        for (std::size_t c = 0; c < dim; ++c) nf[c] += vr[c];
        double nn = kernels::nrm2(nf, dim);
        if (nn < kNormFloor) {
          throw DegenerateNorm("neighbor feature norm below 1e-12");
        }
        kernels::scale(nf, 1.0 / nn, dim);
      }
      kernels::matvec(p.w_neighbor.data(), dim, dim, nf, f.h_n.row(j));
      double raw = base + kernels::dot(a_nbr, f.h_n.row(j), dim);
      f.z[j] = raw;
    }
    // stabilized softmax over leaky_relu(z)
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> s(deg);
    for (std::size_t j = 0; j < deg; ++j) {
      s[j] = f.z[j] > 0 ? f.z[j] : p.leaky_slope * f.z[j];
      mx = std::max(mx, s[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < deg; ++j) {
      f.alpha[j] = std::exp(s[j] - mx);
      denom += f.alpha[j];
    }
    for (std::size_t j = 0; j < deg; ++j) {
      f.alpha[j] /= denom;
      kernels::axpy(f.alpha[j], f.h_n.row(j), f.u.data(), dim);
    }
  }
  f.norm = kernels::nrm2(f.u.data(), dim);
  if (f.norm < kNormFloor) {
    throw DegenerateNorm("encoder output norm below 1e-12 for entity " +
                         std::to_string(e));
  }
  return f;
}

}  // namespace

EncoderParams EncoderParams::init(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("encoder dim must be positive");
  Rng rng(seed);
  EncoderParams p;
  p.dim = dim;
  p.leaky_slope = 0.2;
  p.w_center = Mat(dim, dim);
  p.w_neighbor = Mat(dim, dim);
  p.attn.assign(2 * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      p.w_center(i, j) =
          kInitScale * ((i == j ? 1.0 : 0.0) + rng.uniform(-1e-3, 1e-3));
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      p.w_neighbor(i, j) =
          0.1 * kInitScale * ((i == j ? 1.0 : 0.0) + rng.uniform(-1e-3, 1e-3));
    }
  }
  double bound = 1.0 / std::sqrt(2.0 * static_cast<double>(dim));
  for (auto& a : p.attn) a = rng.uniform(-bound, bound);
  return p;
}

std::array<std::span<double>, 3> EncoderParams::tensors() {
  return {std::span<double>(w_center.data(), w_center.size()),
          std::span<double>(w_neighbor.data(), w_neighbor.size()),
          std::span<double>(attn)};
}

std::array<std::span<const double>, 3> EncoderParams::tensors() const {
  return {std::span<const double>(w_center.data(), w_center.size()),
          std::span<const double>(w_neighbor.data(), w_neighbor.size()),
          std::span<const double>(attn)};
}

void momentum_update(EncoderPair& pair) {
  auto t = pair.target.tensors();
  auto o = pair.online.tensors();
  for (std::size_t i = 0; i < t.size(); ++i) {
    kernels::mix(t[i].data(), o[i].data(), pair.momentum, t[i].size());
  }
}

void encode_into(const EncoderParams& p, const EncodeContext& ctx,
                 kg::EntityId e, double* out) {
  check_ctx(p, ctx);
  Forward f = run_forward(p, ctx, e);
  for (std::size_t c = 0; c < p.dim; ++c) out[c] = f.u[c] / f.norm;
}

std::vector<double> encode(const EncoderParams& p, const EncodeContext& ctx,
                           kg::EntityId e) {
  std::vector<double> out(p.dim);
  encode_into(p, ctx, e, out.data());
  return out;
}

Mat encode_batch(const EncoderParams& p, const EncodeContext& ctx,
                 std::span<const kg::EntityId> ids) {
  Mat out(ids.size(), p.dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    encode_into(p, ctx, ids[i], out.row(i));
  }
  return out;
}

void EncoderGrads::zero() {
  w_center.fill(0.0);
  w_neighbor.fill(0.0);
  std::fill(attn.begin(), attn.end(), 0.0);
}

std::array<std::span<double>, 3> EncoderGrads::tensors() {
  return {std::span<double>(w_center.data(), w_center.size()),
          std::span<double>(w_neighbor.data(), w_neighbor.size()),
          std::span<double>(attn)};
}

std::array<std::span<const double>, 3> EncoderGrads::tensors() const {
  return {std::span<const double>(w_center.data(), w_center.size()),
          std::span<const double>(w_neighbor.data(), w_neighbor.size()),
          std::span<const double>(attn)};
}

void grad_encode(const EncoderParams& p, const EncodeContext& ctx,
                 kg::EntityId e, std::span<const double> upstream,
                 EncoderGrads& accum) {
  check_ctx(p, ctx);
  if (upstream.size() != p.dim) {
    throw DimensionMismatch("upstream gradient has wrong length");
  }
  const std::size_t dim = p.dim;
  Forward f = run_forward(p, ctx, e);
  const auto v = ctx.entity_store->vec(e);

  // f = u / |u|  =>  dL/du = (g - f (f.g)) / |u|
  std::vector<double> fvec(dim);
  for (std::size_t c = 0; c < dim; ++c) fvec[c] = f.u[c] / f.norm;
  double fg = kernels::dot(fvec.data(), upstream.data(), dim);
  std::vector<double> gu(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    gu[c] = (upstream[c] - fvec[c] * fg) / f.norm;
  }

  const auto& nbrs = ctx.graph->neighbors[e];
  const std::size_t deg = nbrs.size();
  std::vector<double> gh_c = gu;

  if (deg > 0) {
    const double* a_center = p.attn.data();
    const double* a_nbr = p.attn.data() + dim;

    // softmax backward over attention weights
    std::vector<double> galpha(deg), gz(deg);
    double weighted = 0.0;
    for (std::size_t j = 0; j < deg; ++j) {
      galpha[j] = kernels::dot(gu.data(), f.h_n.row(j), dim);
      weighted += f.alpha[j] * galpha[j];
    }
    double gz_sum = 0.0;
    for (std::size_t j = 0; j < deg; ++j) {
      double gs = f.alpha[j] * (galpha[j] - weighted);
      gz[j] = gs * (f.z[j] > 0 ? 1.0 : p.leaky_slope);
      gz_sum += gz[j];
    }

    // z_j = a_center.h_c + a_nbr.h_j
    kernels::axpy(gz_sum, a_center, gh_c.data(), dim);
    for (std::size_t j = 0; j < deg; ++j) {
      // dL/dh_j = alpha_j * gu + gz_j * a_nbr
      std::vector<double> gh_j(dim);
      for (std::size_t c = 0; c < dim; ++c) {
        gh_j[c] = f.alpha[j] * gu[c] + gz[j] * a_nbr[c];
      }
      kernels::ger(1.0, gh_j.data(), dim, f.n_feat.row(j), dim,
                   accum.w_neighbor.data());
      kernels::axpy(gz[j], f.h_n.row(j), accum.attn.data() + dim, dim);
    }
    kernels::axpy(gz_sum, f.h_c.data(), accum.attn.data(), dim);
  }

  kernels::ger(1.0, gh_c.data(), dim, v.data(), dim, accum.w_center.data());
}

namespace {
constexpr char kParamsMagic[9] = "SALNENC1";
constexpr char kPairMagic[9] = "SALNPAIR";
}  // namespace

void write_params(std::ostream& os, const EncoderParams& p) {
  binio::put_magic(os, kParamsMagic);
  binio::put_u64(os, p.dim);
  binio::put_f64(os, p.leaky_slope);
  for (auto t : p.tensors()) binio::put_f64_array(os, t.data(), t.size());
}

EncoderParams read_params(std::istream& is) {
  binio::expect_magic(is, kParamsMagic, "encoder params");
  EncoderParams p;
  p.dim = binio::get_u64(is);
  if (p.dim == 0 || p.dim > (1u << 20)) throw ParseError("bad encoder dim");
  p.leaky_slope = binio::get_f64(is);
  p.w_center = Mat(p.dim, p.dim);
  p.w_neighbor = Mat(p.dim, p.dim);
  p.attn.assign(2 * p.dim, 0.0);
  for (auto t : p.tensors()) binio::get_f64_array(is, t.data(), t.size());
  return p;
}

void save_params(const std::filesystem::path& path, const EncoderParams& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  write_params(os, p);
}

EncoderParams load_params(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_params(is);
}

void save_pair(const std::filesystem::path& path, const EncoderPair& pair) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  binio::put_magic(os, kPairMagic);
  binio::put_f64(os, pair.momentum);
  write_params(os, pair.online);
  write_params(os, pair.target);
}

EncoderPair load_pair(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  binio::expect_magic(is, kPairMagic, "encoder pair");
  EncoderPair pair;
  pair.momentum = binio::get_f64(is);
  pair.online = read_params(is);
  pair.target = read_params(is);
  return pair;
}

}  // namespace selfalign::enc
