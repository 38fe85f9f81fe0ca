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

#ifndef QAPROBE_QAPROBE_HPP_
#define QAPROBE_QAPROBE_HPP_

#include "qaprobe/analysis.hpp"
#include "qaprobe/baselines.hpp"
#include "qaprobe/converters.hpp"
#include "qaprobe/dataset.hpp"
#include "qaprobe/io.hpp"
#include "qaprobe/metrics.hpp"
#include "qaprobe/probes.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/version.hpp"

#endif  // QAPROBE_QAPROBE_HPP_
