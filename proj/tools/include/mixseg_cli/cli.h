// Copyright 2026 The Mixseg Authors.
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


// The mixseg command-line surface as a library, so tests can drive it
// in-process. Exit status: 0 success, 1 data error, 2 usage error.

#ifndef MIXSEG_CLI_CLI_H_
#define MIXSEG_CLI_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mixseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace mixseg::cli

#endif  // MIXSEG_CLI_CLI_H_
