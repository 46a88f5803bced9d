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

#include <stdexcept>
#include <string>

namespace staylor {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

// Structural problems in tabular or model input: duplicate column names,
// ragged rows, unknown JSON fields, invalid tree topology.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell or token could not be converted to a number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// An instance, table, or model disagree on the number of features.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument is outside the operation's domain (bad pair, off-grid value,
// invalid configuration bounds).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Statistics were requested for a column with no observed values.
class EmptyColumnError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration or exact weights were requested beyond the feature-count
// cap (64-bit factorials and the dense coalition cache stop at 20 features).
class CapError : public Error {
 public:
  using Error::Error;
};

}  // namespace staylor
