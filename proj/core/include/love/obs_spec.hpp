#pragma once

#include <stdexcept>
#include <vector>

#include "love/nn/conv_geom.hpp"

namespace love {

enum class ObsMode { vector, image };

struct ObservationSpec {
  ObsMode mode = ObsMode::vector;
  int height = 0, width = 0, channels = 0;  // image mode
  int dim = 0;                              // vector mode
  int embedding_dim = 0;

  int flat_dim() const {
    return mode == ObsMode::image ? height * width * channels : dim;
  }

  void validate() const {
    if (mode == ObsMode::image) {
      if (height < 4 || width < 4 || channels < 1)
        throw std::invalid_argument("ObservationSpec: bad image shape");
    } else if (dim < 1) {
      throw std::invalid_argument("ObservationSpec: bad vector dim");
    }
  }

  static ObservationSpec vector_obs(int dim, int embedding = 256) {
    ObservationSpec s;
    s.mode = ObsMode::vector;
    s.dim = dim;
    s.embedding_dim = embedding;
    return s;
  }

  // embedding_dim is derived from the conv stack (1024 for 64x64x3 at the
  // default channel base of 32).
  static ObservationSpec image_obs(int h = 64, int w = 64, int c = 3,
                                   int channel_base = 32);
};

// Stride-2, kernel-4 convolutions until the spatial extent drops below the
// kernel, doubling channels each layer. 64 -> 31 -> 14 -> 6 -> 2 with
// channels 32/64/128/256 reproduces the reference encoder.
inline std::vector<nn::ConvGeom> encoder_chain(int h, int w, int c, int base) {
  std::vector<nn::ConvGeom> chain;
  int ch_in = c, ch_out = base;
  while (h >= 4 && w >= 4) {
    nn::ConvGeom g;
    g.in_h = h; g.in_w = w; g.in_c = ch_in;
    g.kernel = 4; g.stride = 2;
    g.out_h = nn::conv_out_size(h, 4, 2);
    g.out_w = nn::conv_out_size(w, 4, 2);
    g.out_c = ch_out;
    chain.push_back(g);
    h = g.out_h; w = g.out_w;
    ch_in = ch_out; ch_out *= 2;
  }
  if (chain.empty()) throw std::invalid_argument("image too small for conv encoder");
  return chain;
}

inline ObservationSpec ObservationSpec::image_obs(int h, int w, int c, int channel_base) {
  ObservationSpec s;
  s.mode = ObsMode::image;
  s.height = h; s.width = w; s.channels = c;
  auto chain = encoder_chain(h, w, c, channel_base);
  const auto& last = chain.back();
  s.embedding_dim = last.out_h * last.out_w * last.out_c;
  return s;
}

}  // namespace love
