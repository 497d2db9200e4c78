/*
 * Copyright 2026 The Elim Authors.
 *
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

// Convenience header pulling in the whole library except the HTTP service.

#ifndef ELIM_ELIM_HPP_
#define ELIM_ELIM_HPP_

#include "elim/committee.hpp"
#include "elim/core.hpp"
#include "elim/dataset.hpp"
#include "elim/eliminator.hpp"
#include "elim/factory.hpp"
#include "elim/grouping.hpp"
#include "elim/knn.hpp"
#include "elim/lda.hpp"
#include "elim/metrics.hpp"
#include "elim/mixture.hpp"
#include "elim/mlp.hpp"
#include "elim/model_io.hpp"
#include "elim/rules.hpp"
#include "elim/soft_rules.hpp"
#include "elim/uncertainty.hpp"

#endif  // ELIM_ELIM_HPP_
