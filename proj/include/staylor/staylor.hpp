/*
 * Copyright 2026 The staylor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "staylor/error.hpp"
#include "staylor/export.hpp"
#include "staylor/importance.hpp"
#include "staylor/interaction.hpp"
#include "staylor/rng.hpp"
#include "staylor/shapley.hpp"
#include "staylor/synthetic.hpp"
#include "staylor/table.hpp"
#include "staylor/train.hpp"
#include "staylor/tree.hpp"
#include "staylor/value.hpp"
