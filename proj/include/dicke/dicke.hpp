// Copyright 2026 The Dicke Lab Authors
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

#pragma once

#include "dicke/basis.hpp"
#include "dicke/checkpoint.hpp"
#include "dicke/config.hpp"
#include "dicke/crystal.hpp"
#include "dicke/density_matrix.hpp"
#include "dicke/engine.hpp"
#include "dicke/error.hpp"
#include "dicke/measure.hpp"
#include "dicke/mode_file.hpp"
#include "dicke/model.hpp"
#include "dicke/parallel.hpp"
#include "dicke/pipeline.hpp"
#include "dicke/rng.hpp"
#include "dicke/rotation.hpp"
#include "dicke/shots_io.hpp"
#include "dicke/sparse.hpp"
#include "dicke/state.hpp"
#include "dicke/tomo.hpp"
#include "dicke/units.hpp"
