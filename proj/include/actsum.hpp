// Copyright 2026 The actsum Authors
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

// Umbrella header.

#ifndef ACTSUM_ACTSUM_HPP_
#define ACTSUM_ACTSUM_HPP_

#include "actsum/error.hpp"
#include "actsum/evaluation.hpp"
#include "actsum/io.hpp"
#include "actsum/labels.hpp"
#include "actsum/losses.hpp"
#include "actsum/mask.hpp"
#include "actsum/model.hpp"
#include "actsum/numerics.hpp"
#include "actsum/pipeline.hpp"
#include "actsum/random.hpp"
#include "actsum/segmentation.hpp"
#include "actsum/summary.hpp"
#include "actsum/synthetic.hpp"
#include "actsum/training.hpp"

#endif  // ACTSUM_ACTSUM_HPP_
