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

namespace cirrus::store {

/// Dollar rates. Request prices are per single request.
struct PriceSheet {
  double get_price = 0.0004 / 1000.0;
  double put_price = 0.005 / 1000.0;
  double storage_price_gb_month = 0.23;
  /// Largest function size (3008 MB) at $0.0000166667 per GB-second.
  double invocation_price_per_ms = 0.0000166667 * (3008.0 / 1024.0) / 1000.0;

  void validate() const;
};

}  // namespace cirrus::store
