// Copyright 2026 The fagfcs Authors.
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

#include "fagfcs/audit.hpp"
#include "fagfcs/costs.hpp"
#include "fagfcs/equilibrium.hpp"
#include "fagfcs/io.hpp"
#include "fagfcs/mechanisms.hpp"
#include "fagfcs/model.hpp"
#include "fagfcs/optimal.hpp"
#include "fagfcs/partition_dp.hpp"
