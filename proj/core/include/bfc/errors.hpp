// Copyright 2026 The bfc Authors
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

#ifndef BFC__ERRORS_HPP_
#define BFC__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace bfc
{

/// Base class of every error raised by the library. User-facing tools map
/// subclasses onto exit codes, so new failure kinds should derive from one
/// of the categories below rather than from std::runtime_error directly.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  ParseError(std::string field, const std::string & what)
  : Error("parse error at '" + field + "': " + what), field_(std::move(field))
  {
  }
  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

class ShapeError : public Error
{
public:
  using Error::Error;
};

class AxisError : public Error
{
public:
  using Error::Error;
};

/// Violated precondition of an operation (wrong lengths, bad mode, ...).
class ContractError : public Error
{
public:
  using Error::Error;
};

class NormalizationError : public Error
{
public:
  using Error::Error;
};

class EncodingError : public Error
{
public:
  using Error::Error;
};

class CheckError : public Error
{
public:
  using Error::Error;
};

class TrainingError : public Error
{
public:
  using Error::Error;
};

class EvaluationError : public Error
{
public:
  using Error::Error;
};

class EnsembleError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

}  // namespace bfc

#endif  // BFC__ERRORS_HPP_
