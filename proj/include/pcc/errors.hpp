// Copyright (c) 2026 pcc contributors
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

#ifndef PCC_ERRORS_HPP
#define PCC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pcc
{

/// Incompatible tensor shapes passed to an operation.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was violated.
class ContractError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed file content (cloud files, manifests, configs, checkpoints).
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values where finite ones are required (e.g. NaN loss).
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcc

#endif  // PCC_ERRORS_HPP
