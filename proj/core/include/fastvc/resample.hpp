// core/include/fastvc/resample.hpp

// Copyright 2026  FastVC Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FASTVC_RESAMPLE_HPP_
#define FASTVC_RESAMPLE_HPP_

#include "fastvc/audio.hpp"

namespace fastvc {

/// Band-limited rational resampling (polyphase windowed-sinc). The identity
/// rate is returned bit-for-bit; otherwise the output length is
/// ceil(len * target / source), preserving duration within one sample period.
Waveform Resample(const Waveform& w, int target_rate);

}  // namespace fastvc

#endif  // FASTVC_RESAMPLE_HPP_
