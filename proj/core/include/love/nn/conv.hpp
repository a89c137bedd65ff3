#pragma once

#include "love/nn/conv_geom.hpp"
#include "love/nn/layers.hpp"
#include "love/nn/tensor.hpp"

// 2-D convolution and transposed convolution over flattened images.
// Each batch row stores one image in (y, x, channel) order:
// index = (y * width + x) * channels + c. Valid padding only.

namespace love::nn {

namespace detail {

// Gather kernel patches: (out_h*out_w) x (K*K*in_c) from one flattened image.
template <typename S, typename Row>
void im2col(const Row& img, const ConvGeom& g, Mat<S>& cols) {
  const int K = g.kernel;
  cols.resize(g.out_h * g.out_w, K * K * g.in_c);
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      const int p = oy * g.out_w + ox;
      for (int ky = 0; ky < K; ++ky) {
        const int iy = oy * g.stride + ky;
        for (int kx = 0; kx < K; ++kx) {
          const int ix = ox * g.stride + kx;
          const int src = (iy * g.in_w + ix) * g.in_c;
          const int dst = (ky * K + kx) * g.in_c;
          for (int c = 0; c < g.in_c; ++c) cols(p, dst + c) = img(src + c);
        }
      }
    }
  }
}

// Scatter-add, the adjoint of im2col.
template <typename S, typename Row>
void col2im_add(const Mat<S>& cols, const ConvGeom& g, Row&& img) {
  const int K = g.kernel;
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      const int p = oy * g.out_w + ox;
      for (int ky = 0; ky < K; ++ky) {
        const int iy = oy * g.stride + ky;
        for (int kx = 0; kx < K; ++kx) {
          const int ix = ox * g.stride + kx;
          const int dst = (iy * g.in_w + ix) * g.in_c;
          const int src = (ky * K + kx) * g.in_c;
          for (int c = 0; c < g.in_c; ++c) img(dst + c) += cols(p, src + c);
        }
      }
    }
  }
}

// Flattened row (positions*channels) -> (positions x channels) matrix.
template <typename S, typename Row>
void row_to_pc(const Row& row, Eigen::Index positions, Eigen::Index channels, Mat<S>& out) {
  out.resize(positions, channels);
  for (Eigen::Index p = 0; p < positions; ++p)
    for (Eigen::Index c = 0; c < channels; ++c) out(p, c) = row(p * channels + c);
}

// (positions x channels) matrix -> flattened row.
template <typename S, typename Row>
void pc_to_row(const Mat<S>& pc, Row&& row) {
  for (Eigen::Index p = 0; p < pc.rows(); ++p)
    for (Eigen::Index c = 0; c < pc.cols(); ++c) row(p * pc.cols() + c) = pc(p, c);
}

}  // namespace detail

// x: B x (in_h*in_w*in_c), weight: (K*K*in_c) x out_c, bias: 1 x out_c.
// Returns B x (out_h*out_w*out_c).
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>& bias,
                 const ConvGeom& g) {
  const Eigen::Index batch = x.rows();
  const Eigen::Index positions = Eigen::Index(g.out_h) * g.out_w;
  Mat<S> out(batch, positions * g.out_c);
  Mat<S> cols;
  for (Eigen::Index b = 0; b < batch; ++b) {
    detail::im2col<S>(x.value().row(b), g, cols);
    Mat<S> o = cols * weight.value();
    o.rowwise() += bias.value().row(0);
    detail::pc_to_row<S>(o, out.row(b));
  }
  Node<S>* xn = x.node();
  Node<S>* wn = weight.node();
  Node<S>* bn = bias.node();
  return detail::make_op<S>(
      std::move(out), {x, weight, bias}, [xn, wn, bn, g](const Mat<S>& grad) {
        const Eigen::Index batch = grad.rows();
        const Eigen::Index positions = Eigen::Index(g.out_h) * g.out_w;
        Mat<S> cols, go;
        Mat<S> dx, dw, db;
        if (xn->requires_grad) dx = Mat<S>::Zero(batch, xn->value.cols());
        if (wn->requires_grad) dw = Mat<S>::Zero(wn->value.rows(), wn->value.cols());
        if (bn->requires_grad) db = Mat<S>::Zero(1, g.out_c);
        for (Eigen::Index b = 0; b < batch; ++b) {
          detail::row_to_pc<S>(grad.row(b), positions, g.out_c, go);
          if (wn->requires_grad || xn->requires_grad)
            detail::im2col<S>(xn->value.row(b), g, cols);
          if (wn->requires_grad) dw += cols.transpose() * go;
          if (bn->requires_grad) db += go.colwise().sum();
          if (xn->requires_grad) {
            Mat<S> dcols = go * wn->value.transpose();
            detail::col2im_add<S>(dcols, g, dx.row(b));
          }
        }
        if (xn->requires_grad) xn->add_grad(dx);
        if (wn->requires_grad) wn->add_grad(dw);
        if (bn->requires_grad) bn->add_grad(db);
      });
}

// Transposed convolution. x: B x (in_h*in_w*in_c),
// weight: (K*K*out_c) x in_c, bias: 1 x out_c.
// out[(iy*s+ky, ix*s+kx), co] += in[(iy, ix), ci] * W[(ky,kx,co), ci].
template <typename S>
Tensor<S> deconv2d(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>& bias,
                   const ConvGeom& g) {
  // Geometry of the adjoint conv: the deconv output plays the image role.
  ConvGeom adj;
  adj.in_h = g.out_h; adj.in_w = g.out_w; adj.in_c = g.out_c;
  adj.kernel = g.kernel; adj.stride = g.stride;
  adj.out_h = g.in_h; adj.out_w = g.in_w; adj.out_c = g.in_c;

  const Eigen::Index batch = x.rows();
  const Eigen::Index in_positions = Eigen::Index(g.in_h) * g.in_w;
  const Eigen::Index out_positions = Eigen::Index(g.out_h) * g.out_w;
  Mat<S> out = Mat<S>::Zero(batch, out_positions * g.out_c);
  Mat<S> in_pc;
  for (Eigen::Index b = 0; b < batch; ++b) {
    detail::row_to_pc<S>(x.value().row(b), in_positions, g.in_c, in_pc);
    Mat<S> scatter = in_pc * weight.value().transpose();  // (in_pos) x (K*K*out_c)
    detail::col2im_add<S>(scatter, adj, out.row(b));
    for (Eigen::Index p = 0; p < out_positions; ++p)
      for (int c = 0; c < g.out_c; ++c) out(b, p * g.out_c + c) += bias.value()(0, c);
  }
  Node<S>* xn = x.node();
  Node<S>* wn = weight.node();
  Node<S>* bn = bias.node();
  return detail::make_op<S>(
      std::move(out), {x, weight, bias}, [xn, wn, bn, g, adj](const Mat<S>& grad) {
        const Eigen::Index batch = grad.rows();
        const Eigen::Index in_positions = Eigen::Index(g.in_h) * g.in_w;
        const Eigen::Index out_positions = Eigen::Index(g.out_h) * g.out_w;
        Mat<S> cols, in_pc, go;
        Mat<S> dx, dw, db;
        if (xn->requires_grad) dx = Mat<S>::Zero(batch, xn->value.cols());
        if (wn->requires_grad) dw = Mat<S>::Zero(wn->value.rows(), wn->value.cols());
        if (bn->requires_grad) db = Mat<S>::Zero(1, g.out_c);
        for (Eigen::Index b = 0; b < batch; ++b) {
          detail::im2col<S>(grad.row(b), adj, cols);  // (in_pos) x (K*K*out_c)
          if (xn->requires_grad) {
            Mat<S> dpc = cols * wn->value;  // (in_pos) x in_c
            detail::pc_to_row<S>(dpc, dx.row(b));
          }
          if (wn->requires_grad) {
            detail::row_to_pc<S>(xn->value.row(b), in_positions, g.in_c, in_pc);
            dw += cols.transpose() * in_pc;
          }
          if (bn->requires_grad) {
            detail::row_to_pc<S>(grad.row(b), out_positions, g.out_c, go);
            db += go.colwise().sum();
          }
        }
        if (xn->requires_grad) xn->add_grad(dx);
        if (wn->requires_grad) wn->add_grad(dw);
        if (bn->requires_grad) bn->add_grad(db);
      });
}

// Convolution layer (paper-style: kernel 4, stride 2, ReLU).
template <typename S>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(Rng& rng, const ConvGeom& geom, Act act, const InitSpec& init)
      : geom_(geom), act_(act) {
    const Eigen::Index fan_in = Eigen::Index(geom.kernel) * geom.kernel * geom.in_c;
    const Eigen::Index fan_out = Eigen::Index(geom.kernel) * geom.kernel * geom.out_c;
    W_ = Tensor<S>::leaf(
        init_kernel<S>(rng, fan_in, fan_out, fan_in, geom.out_c, init), true);
    b_ = Tensor<S>::leaf(init_bias<S>(rng, fan_in, geom.out_c, init), true);
  }

  Tensor<S> operator()(const Tensor<S>& x) const {
    return activate(conv2d(x, W_, b_, geom_), act_);
  }

  const ConvGeom& geom() const { return geom_; }

  void collect(ParamList<S>& out, const std::string& prefix) const {
    out.push_back({prefix + "/W", W_});
    out.push_back({prefix + "/b", b_});
  }

 private:
  Tensor<S> W_, b_;
  ConvGeom geom_;
  Act act_ = Act::relu;
};

template <typename S>
class Deconv2dLayer {
 public:
  Deconv2dLayer() = default;
  Deconv2dLayer(Rng& rng, const ConvGeom& geom, Act act, const InitSpec& init)
      : geom_(geom), act_(act) {
    const Eigen::Index fan_in = Eigen::Index(geom.kernel) * geom.kernel * geom.in_c;
    const Eigen::Index fan_out = Eigen::Index(geom.kernel) * geom.kernel * geom.out_c;
    W_ = Tensor<S>::leaf(
        init_kernel<S>(rng, fan_in, fan_out, fan_out, geom.in_c, init), true);
    b_ = Tensor<S>::leaf(init_bias<S>(rng, fan_in, geom.out_c, init), true);
  }

  Tensor<S> operator()(const Tensor<S>& x) const {
    return activate(deconv2d(x, W_, b_, geom_), act_);
  }

  const ConvGeom& geom() const { return geom_; }

  void collect(ParamList<S>& out, const std::string& prefix) const {
    out.push_back({prefix + "/W", W_});
    out.push_back({prefix + "/b", b_});
  }

 private:
  Tensor<S> W_, b_;
  ConvGeom geom_;
  Act act_ = Act::relu;
};

}  // namespace love::nn
