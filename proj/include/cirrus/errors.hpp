// Copyright 2026 The Cirrus Authors.
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

#include <stdexcept>
#include <string>

namespace cirrus {

/// Base of every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CIRRUS_DEFINE_ERROR(Name)    \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

// storesim / mitigation
CIRRUS_DEFINE_ERROR(NotVisible);
CIRRUS_DEFINE_ERROR(BothInvisible);
// format
CIRRUS_DEFINE_ERROR(CorruptObject);
CIRRUS_DEFINE_ERROR(SchemaMismatch);
CIRRUS_DEFINE_ERROR(UnknownColumn);
// exec
CIRRUS_DEFINE_ERROR(OutOfBudget);
CIRRUS_DEFINE_ERROR(PartitionMismatch);
CIRRUS_DEFINE_ERROR(SpecMismatch);
CIRRUS_DEFINE_ERROR(InjectedFault);
// shuffle
CIRRUS_DEFINE_ERROR(InvalidTopology);
// coordinator / cli
CIRRUS_DEFINE_ERROR(PlanValidationError);
CIRRUS_DEFINE_ERROR(ConfigError);
CIRRUS_DEFINE_ERROR(UnknownBench);

#undef CIRRUS_DEFINE_ERROR

}  // namespace cirrus
