// promdec/promdec.hpp

// Copyright 2026 The promdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "promdec/corpus.hpp"
#include "promdec/decoder.hpp"
#include "promdec/emissions.hpp"
#include "promdec/error.hpp"
#include "promdec/harness.hpp"
#include "promdec/lm.hpp"
#include "promdec/metrics.hpp"
#include "promdec/prominence.hpp"
#include "promdec/synth.hpp"
#include "promdec/vocab.hpp"
