// Copyright 2026 The vrudetect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VRU_CORE_FRAME_HPP_
#define VRU_CORE_FRAME_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vru
{

/// Dense multi-channel raster. Storage is row-major with channels interleaved:
/// index = (y * width + x) * channels + c. This is also the on-disk layout.
template <typename T>
struct Frame
{
  int width{0};
  int height{0};
  int channels{0};
  std::vector<T> data;

  Frame() = default;
  Frame(int w, int h, int c)
  : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, T{})
  {
  }

  std::size_t index(int x, int y, int c) const
  {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  T & at(int x, int y, int c) { return data[index(x, y, c)]; }
  const T & at(int x, int y, int c) const { return data[index(x, y, c)]; }

  bool same_shape(const Frame & other) const
  {
    return width == other.width && height == other.height && channels == other.channels;
  }
  bool operator==(const Frame & other) const = default;
};

/// Four binary occupancy channels: pedestrians, bikes/motors, cars/trucks, buses.
using ObjectFrame = Frame<std::uint8_t>;
/// Three motion channels in [0,1]: orientation, saturation (1 where moving), speed.
using FlowFrame = Frame<float>;

inline constexpr int kObjectChannels = 4;
inline constexpr int kFlowChannels = 3;

}  // namespace vru

#endif  // VRU_CORE_FRAME_HPP_
