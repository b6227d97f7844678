/*
 * Copyright 2026 The fairrecourse Authors.
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

#ifndef FAIRRECOURSE_TEXT_HPP_
#define FAIRRECOURSE_TEXT_HPP_

#include <optional>
#include <string>
#include <string_view>

namespace fairrecourse {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Parses a complete decimal number (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view text);

// Removes accumulated binary noise from grid arithmetic such as 4 - 11 * 0.05,
// rounding to nine decimal places when that is exact enough to matter.
double clean_decimal(double value);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_TEXT_HPP_
