// Copyright 2026 The segeval Authors
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

#include "segeval/class_metrics.hpp"
#include "segeval/config.hpp"
#include "segeval/core.hpp"
#include "segeval/distance_metrics.hpp"
#include "segeval/hard_points.hpp"
#include "segeval/kdtree.hpp"
#include "segeval/numeric.hpp"
#include "segeval/reference.hpp"
#include "segeval/report.hpp"
#include "segeval/scope.hpp"
#include "segeval/spatial_index.hpp"
#include "segeval/synthetic.hpp"
#include "segeval/table_io.hpp"
#include "segeval/tile_merge.hpp"
