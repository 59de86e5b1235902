#include "bba/models/network.hpp"

#include <cmath>

#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::models {

namespace {
constexpr double kProbFloor = 1e-12;
}

Network::Network(ArchitectureSpec arch) : arch_(std::move(arch)) { compile(); }

void Network::compile() {
  if (arch_.layers.empty()) throw ConfigError("network: empty architecture");
  if (arch_.layers.back().kind != LayerKind::Softmax)
    throw ConfigError("network: final layer must be softmax");
  if (arch_.in_dim != arch_.in_rows * arch_.in_cols * arch_.in_channels)
    throw ConfigError("network: input shape does not match in_dim");

  int c = arch_.in_channels, h = arch_.in_rows, w = arch_.in_cols;
  bool image = true;  // shape still carries (c,h,w) geometry
  int n = arch_.in_dim;
  for (const LayerSpec& spec : arch_.layers) {
    Stage s;
    s.kind = spec.kind;
    s.in_n = n;
    switch (spec.kind) {
      case LayerKind::Dense: {
        s.param = static_cast<int>(w_.size());
        s.out_n = spec.units;
        w_.emplace_back(static_cast<std::size_t>(spec.units), static_cast<std::size_t>(n));
        b_.emplace_back(static_cast<std::size_t>(spec.units), 0.0);
        n = spec.units;
        image = false;
        break;
      }
      case LayerKind::ConvMax: {
        if (!image) throw ConfigError("network: ConvMax after flattening layer");
        if (h < 2 || w < 2) throw ConfigError("network: ConvMax input too small");
        s.param = static_cast<int>(w_.size());
        s.in_c = c;
        s.in_h = h;
        s.in_w = w;
        s.filters = spec.units;
        s.conv_h = h - 1;
        s.conv_w = w - 1;
        s.pool_h = s.conv_h / 2;
        s.pool_w = s.conv_w / 2;
        if (s.pool_h < 1 || s.pool_w < 1)
          throw ConfigError("network: ConvMax output collapses to zero");
        w_.emplace_back(static_cast<std::size_t>(spec.units),
                        static_cast<std::size_t>(c) * 4);
        b_.emplace_back(static_cast<std::size_t>(spec.units), 0.0);
        c = spec.units;
        h = s.pool_h;
        w = s.pool_w;
        n = c * h * w;
        s.out_n = n;
        break;
      }
      case LayerKind::ReLU:
      case LayerKind::Sigmoid:
      case LayerKind::Softmax:
        s.out_n = n;
        break;
    }
    stages_.push_back(s);
  }
  if (n != arch_.out_dim) throw ConfigError("network: stack does not end in out_dim units");
}

void Network::init_params(nd::SeededRng rng) {
  for (std::size_t p = 0; p < w_.size(); ++p) {
    nd::SeededRng r = rng.child(p);
    double fan_in = 0;
    double fan_out = 0;
    // Locate the stage owning this parameter to get fan counts.
    for (const Stage& s : stages_) {
      if (s.param != static_cast<int>(p)) continue;
      if (s.kind == LayerKind::Dense) {
        fan_in = s.in_n;
        fan_out = s.out_n;
      } else {
        fan_in = s.in_c * 4.0;
        fan_out = s.filters * 4.0;
      }
      break;
    }
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w_[p].data()) v = r.uniform(-bound, bound);
    for (double& v : b_[p]) v = 0.0;
  }
}

void Network::forward_trace(std::span<const double> x, Trace& t) const {
  if (static_cast<int>(x.size()) != arch_.in_dim)
    throw DimensionError("network: input dimension mismatch");
  const auto& k = nd::kern::kernels();
  t.x.assign(x.begin(), x.end());
  t.out.resize(stages_.size());
  t.conv.resize(stages_.size());
  t.pool_ix.resize(stages_.size());

  const Vec* cur = &t.x;
  for (std::size_t si = 0; si < stages_.size(); ++si) {
    const Stage& s = stages_[si];
    Vec& out = t.out[si];
    switch (s.kind) {
      case LayerKind::Dense: {
        const Mat& w = w_[static_cast<std::size_t>(s.param)];
        const Vec& b = b_[static_cast<std::size_t>(s.param)];
        out.resize(static_cast<std::size_t>(s.out_n));
        for (int i = 0; i < s.out_n; ++i)
          out[static_cast<std::size_t>(i)] =
              k.dot(w.row(static_cast<std::size_t>(i)), cur->data(),
                    static_cast<std::size_t>(s.in_n)) +
              b[static_cast<std::size_t>(i)];
        break;
      }
      case LayerKind::ConvMax: {
        const Mat& w = w_[static_cast<std::size_t>(s.param)];
        const Vec& b = b_[static_cast<std::size_t>(s.param)];
        Vec& conv = t.conv[si];
        conv.assign(static_cast<std::size_t>(s.filters) * s.conv_h * s.conv_w, 0.0);
        for (int f = 0; f < s.filters; ++f) {
          double* cbase = conv.data() + std::size_t(f) * s.conv_h * s.conv_w;
          for (int i = 0; i < s.conv_h * s.conv_w; ++i) cbase[i] = b[std::size_t(f)];
          for (int ci = 0; ci < s.in_c; ++ci) {
            const double* ibase = cur->data() + std::size_t(ci) * s.in_h * s.in_w;
            for (int ky = 0; ky < 2; ++ky)
              for (int kx = 0; kx < 2; ++kx) {
                const double wv = w(std::size_t(f), std::size_t(ci * 4 + ky * 2 + kx));
                for (int y = 0; y < s.conv_h; ++y)
                  k.axpy(wv, ibase + std::size_t(y + ky) * s.in_w + kx,
                         cbase + std::size_t(y) * s.conv_w,
                         static_cast<std::size_t>(s.conv_w));
              }
          }
        }
        out.resize(static_cast<std::size_t>(s.filters) * s.pool_h * s.pool_w);
        auto& ix = t.pool_ix[si];
        ix.resize(out.size());
        std::size_t o = 0;
        for (int f = 0; f < s.filters; ++f) {
          const double* cbase = conv.data() + std::size_t(f) * s.conv_h * s.conv_w;
          const int foff = f * s.conv_h * s.conv_w;
          for (int py = 0; py < s.pool_h; ++py)
            for (int px = 0; px < s.pool_w; ++px) {
              int best = (2 * py) * s.conv_w + 2 * px;
              double bv = cbase[best];
              const int cand[3] = {best + 1, best + s.conv_w, best + s.conv_w + 1};
              for (int cidx : cand)
                if (cbase[cidx] > bv) {
                  bv = cbase[cidx];
                  best = cidx;
                }
              out[o] = bv;
              ix[o] = foff + best;
              ++o;
            }
        }
        break;
      }
      case LayerKind::ReLU:
        out.resize(cur->size());
        k.relu(cur->data(), out.data(), cur->size());
        break;
      case LayerKind::Sigmoid:
        out.resize(cur->size());
        for (std::size_t i = 0; i < cur->size(); ++i)
          out[i] = 1.0 / (1.0 + std::exp(-(*cur)[i]));
        break;
      case LayerKind::Softmax:
        out = *cur;
        nd::softmax_inplace(out, temperature_);
        break;
    }
    cur = &out;
  }
}

Vec Network::forward(std::span<const double> x) const {
  Trace t;
  forward_trace(x, t);
  return t.out.back();
}

double Network::cost(std::span<const double> x, int y) const {
  if (y < 0 || y >= arch_.out_dim) throw ContractViolation("cost: label out of range");
  const Vec p = forward(x);
  const double py = p[static_cast<std::size_t>(y)];
  return -std::log(py > kProbFloor ? py : kProbFloor);
}

Network::Grads Network::zero_grads() const {
  Grads g;
  g.w.reserve(w_.size());
  g.b.reserve(b_.size());
  for (const Mat& w : w_) g.w.emplace_back(w.rows(), w.cols());
  for (const Vec& b : b_) g.b.emplace_back(b.size(), 0.0);
  return g;
}

Vec Network::backward_from_softmax_input(const Trace& t, Vec dz, Grads* g,
                                         bool want_dx) const {
  const auto& k = nd::kern::kernels();
  // Walk stages in reverse, starting just below the final softmax.
  Vec d = std::move(dz);
  for (int si = static_cast<int>(stages_.size()) - 2; si >= 0; --si) {
    const Stage& s = stages_[static_cast<std::size_t>(si)];
    const Vec& input = si == 0 ? t.x : t.out[static_cast<std::size_t>(si - 1)];
    const bool need_below = want_dx || si > 0;
    switch (s.kind) {
      case LayerKind::Dense: {
        const Mat& w = w_[static_cast<std::size_t>(s.param)];
        if (g != nullptr) {
          Mat& gw = g->w[static_cast<std::size_t>(s.param)];
          Vec& gb = g->b[static_cast<std::size_t>(s.param)];
          for (int i = 0; i < s.out_n; ++i) {
            k.axpy(d[static_cast<std::size_t>(i)], input.data(),
                   gw.row(static_cast<std::size_t>(i)), static_cast<std::size_t>(s.in_n));
            gb[static_cast<std::size_t>(i)] += d[static_cast<std::size_t>(i)];
          }
        }
        if (need_below) {
          Vec dx(static_cast<std::size_t>(s.in_n), 0.0);
          for (int i = 0; i < s.out_n; ++i)
            k.axpy(d[static_cast<std::size_t>(i)], w.row(static_cast<std::size_t>(i)),
                   dx.data(), static_cast<std::size_t>(s.in_n));
          d = std::move(dx);
        }
        break;
      }
      case LayerKind::ConvMax: {
        const Mat& w = w_[static_cast<std::size_t>(s.param)];
        // Un-pool into the conv grid.
        Vec dconv(static_cast<std::size_t>(s.filters) * s.conv_h * s.conv_w, 0.0);
        const auto& ix = t.pool_ix[static_cast<std::size_t>(si)];
        for (std::size_t o = 0; o < d.size(); ++o)
          dconv[static_cast<std::size_t>(ix[o])] += d[o];
        if (g != nullptr) {
          Mat& gw = g->w[static_cast<std::size_t>(s.param)];
          Vec& gb = g->b[static_cast<std::size_t>(s.param)];
          for (int f = 0; f < s.filters; ++f) {
            const double* dbase = dconv.data() + std::size_t(f) * s.conv_h * s.conv_w;
            double bsum = 0.0;
            for (int i = 0; i < s.conv_h * s.conv_w; ++i) bsum += dbase[i];
            gb[static_cast<std::size_t>(f)] += bsum;
            for (int ci = 0; ci < s.in_c; ++ci) {
              const double* ibase = input.data() + std::size_t(ci) * s.in_h * s.in_w;
              for (int ky = 0; ky < 2; ++ky)
                for (int kx = 0; kx < 2; ++kx) {
                  double acc = 0.0;
                  for (int y = 0; y < s.conv_h; ++y)
                    acc += k.dot(dbase + std::size_t(y) * s.conv_w,
                                 ibase + std::size_t(y + ky) * s.in_w + kx,
                                 static_cast<std::size_t>(s.conv_w));
                  gw(std::size_t(f), std::size_t(ci * 4 + ky * 2 + kx)) += acc;
                }
            }
          }
        }
        if (need_below) {
          Vec dx(static_cast<std::size_t>(s.in_c) * s.in_h * s.in_w, 0.0);
          for (int f = 0; f < s.filters; ++f) {
            const double* dbase = dconv.data() + std::size_t(f) * s.conv_h * s.conv_w;
            for (int ci = 0; ci < s.in_c; ++ci) {
              double* obase = dx.data() + std::size_t(ci) * s.in_h * s.in_w;
              for (int ky = 0; ky < 2; ++ky)
                for (int kx = 0; kx < 2; ++kx) {
                  const double wv = w(std::size_t(f), std::size_t(ci * 4 + ky * 2 + kx));
                  for (int y = 0; y < s.conv_h; ++y)
                    k.axpy(wv, dbase + std::size_t(y) * s.conv_w,
                           obase + std::size_t(y + ky) * s.in_w + kx,
                           static_cast<std::size_t>(s.conv_w));
                }
            }
          }
          d = std::move(dx);
        }
        break;
      }
      case LayerKind::ReLU: {
        Vec dx(d.size());
        k.relu_bwd(input.data(), d.data(), dx.data(), d.size());
        d = std::move(dx);
        break;
      }
      case LayerKind::Sigmoid: {
        const Vec& out = t.out[static_cast<std::size_t>(si)];
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= out[i] * (1.0 - out[i]);
        break;
      }
      case LayerKind::Softmax:
        throw ContractViolation("network: softmax below the head is unsupported");
    }
  }
  if (!want_dx) return {};
  return d;
}

Vec Network::backward_from_output(const Trace& t, std::span<const double> dp, Grads* g,
                                  bool want_dx) const {
  // Through the softmax head: dz = (p .* dp - (p . dp) p) / temperature.
  const Vec& p = t.out.back();
  double pd = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) pd += p[i] * dp[i];
  Vec dz(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    dz[i] = p[i] * (dp[i] - pd) / temperature_;
  return backward_from_softmax_input(t, std::move(dz), g, want_dx);
}

Vec Network::input_cost_gradient(std::span<const double> x, int y) const {
  if (y < 0 || y >= arch_.out_dim)
    throw ContractViolation("input_cost_gradient: label out of range");
  Trace t;
  forward_trace(x, t);
  Vec dz = t.out.back();
  for (double& v : dz) v /= temperature_;
  dz[static_cast<std::size_t>(y)] -= 1.0 / temperature_;
  return backward_from_softmax_input(t, std::move(dz), nullptr, true);
}

Mat Network::jacobian(std::span<const double> x) const {
  Trace t;
  forward_trace(x, t);
  Mat j(static_cast<std::size_t>(arch_.out_dim), static_cast<std::size_t>(arch_.in_dim));
  Vec dp(static_cast<std::size_t>(arch_.out_dim), 0.0);
  for (int row = 0; row < arch_.out_dim; ++row) {
    dp[static_cast<std::size_t>(row)] = 1.0;
    Vec dx = backward_from_output(t, dp, nullptr, true);
    dp[static_cast<std::size_t>(row)] = 0.0;
    double* dst = j.row(static_cast<std::size_t>(row));
    for (std::size_t i = 0; i < dx.size(); ++i) dst[i] = dx[i];
  }
  return j;
}

}  // namespace bba::models
