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

#ifndef QAPROBE_VERSION_HPP_
#define QAPROBE_VERSION_HPP_

namespace qaprobe {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Version label of the unified dataset file layout (the SQuAD 2.0 JSON
// shape documented in the README).
inline constexpr const char* kSchemaVersion = "v2.0";

// Default master seed for every seeded transform; fixed so repeated runs and
// CI are stable. Override with --seed.
inline constexpr unsigned long long kDefaultSeed = 42;

}  // namespace qaprobe

#endif  // QAPROBE_VERSION_HPP_
