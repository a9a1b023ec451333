// Copyright 2026 The QuProFS Authors
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

// Umbrella header: everything in the library.

#pragma once

#include "quprofs/circuit.hpp"
#include "quprofs/circuit_io.hpp"
#include "quprofs/common.hpp"
#include "quprofs/datasets.hpp"
#include "quprofs/device.hpp"
#include "quprofs/evolve.hpp"
#include "quprofs/parallel.hpp"
#include "quprofs/pipeline.hpp"
#include "quprofs/proxies.hpp"
#include "quprofs/qsvm.hpp"
#include "quprofs/ranking.hpp"
#include "quprofs/search_space.hpp"
#include "quprofs/statevector.hpp"
