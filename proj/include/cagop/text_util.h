// Copyright 2026  The cagop Authors
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

// Small text parsing helpers shared by the file readers.

#ifndef CAGOP_TEXT_UTIL_H_
#define CAGOP_TEXT_UTIL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cagop/core.h"

namespace cagop {

/// DataError prefixed with "line N: ".
DataError LineError(size_t line_no, const std::string &message);

std::string_view Trim(std::string_view s);
std::vector<std::string_view> SplitWhitespace(std::string_view s);
std::vector<std::string_view> SplitTabs(std::string_view s);
/// Splits "key=value"; throws LineError without '='.
std::pair<std::string_view, std::string_view> SplitKeyValue(std::string_view s, size_t line_no);

double ParseDouble(std::string_view s, size_t line_no);
int64_t ParseInt(std::string_view s, size_t line_no);

/// Shortest representation that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace cagop

#endif  // CAGOP_TEXT_UTIL_H_
