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

#include "cagop/text_util.h"

#include <charconv>
#include <cmath>

namespace cagop {

DataError LineError(size_t line_no, const std::string &message) {
  return DataError("line " + std::to_string(line_no) + ": " + message);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> SplitTabs(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t tab = s.find('\t', start);
    out.push_back(s.substr(start, tab == std::string_view::npos ? s.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::pair<std::string_view, std::string_view> SplitKeyValue(std::string_view s, size_t line_no) {
  const size_t eq = s.find('=');
  if (eq == std::string_view::npos)
    throw LineError(line_no, "expected key=value, got '" + std::string(s) + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

double ParseDouble(std::string_view s, size_t line_no) {
  s = Trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw LineError(line_no, "invalid number '" + std::string(s) + "'");
  return v;
}

int64_t ParseInt(std::string_view s, size_t line_no) {
  s = Trim(s);
  int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw LineError(line_no, "invalid integer '" + std::string(s) + "'");
  return v;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace cagop
