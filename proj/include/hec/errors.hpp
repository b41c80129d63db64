/*
 * Copyright 2026 The HEC Ensemble Authors.
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

#ifndef HEC_ERRORS_HPP_
#define HEC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hec {

// Bad input files, flags or arguments. The CLI maps this to exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that could not complete (divergent fit, no positive Shapley
// value, ...). The CLI maps this to exit status 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hec

#endif  // HEC_ERRORS_HPP_
