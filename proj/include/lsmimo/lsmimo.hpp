// SPDX-License-Identifier: Apache-2.0
//
// lsmimo: large-system analysis and precoder design for MIMO systems
// with MMSE receivers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef LSMIMO_LSMIMO_HPP
#define LSMIMO_LSMIMO_HPP

#include "channel.hpp"      // IWYU pragma: export
#include "errors.hpp"       // IWYU pragma: export
#include "experiments.hpp"  // IWYU pragma: export
#include "io.hpp"           // IWYU pragma: export
#include "largesys.hpp"     // IWYU pragma: export
#include "matcore.hpp"      // IWYU pragma: export
#include "mcsim.hpp"        // IWYU pragma: export
#include "optimize.hpp"     // IWYU pragma: export
#include "rng.hpp"          // IWYU pragma: export

#endif  // LSMIMO_LSMIMO_HPP
