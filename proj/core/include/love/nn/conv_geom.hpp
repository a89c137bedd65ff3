#pragma once

namespace love::nn {

struct ConvGeom {
  int in_h = 0, in_w = 0, in_c = 0;
  int kernel = 0, stride = 0;
  int out_h = 0, out_w = 0, out_c = 0;
};

inline int conv_out_size(int in, int kernel, int stride) {
  return (in - kernel) / stride + 1;
}

inline int deconv_out_size(int in, int kernel, int stride) {
  return (in - 1) * stride + kernel;
}

}  // namespace love::nn
