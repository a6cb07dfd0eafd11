// Copyright 2026 The TTLR Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ttlr/analysis.hpp"
#include "ttlr/error.hpp"
#include "ttlr/experiment.hpp"
#include "ttlr/format.hpp"
#include "ttlr/libsvm.hpp"
#include "ttlr/loss.hpp"
#include "ttlr/model.hpp"
#include "ttlr/noise.hpp"
#include "ttlr/optimizer.hpp"
#include "ttlr/partition.hpp"
#include "ttlr/random.hpp"
#include "ttlr/tempered_math.hpp"
#include "ttlr/types.hpp"
#include "ttlr/verification.hpp"
