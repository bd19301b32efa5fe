// Copyright 2026 The eend Authors. All Rights Reserved.
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

// The eend command-line tool: simulate, train, adapt, infer, score, viz and
// gradcheck subcommands over a shared RunConfig.

#ifndef EEND_TOOLS_CLI_H_
#define EEND_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace eend::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation. args excludes the program name. Reports go to out,
// log lines (level from EEND_LOG) and error messages to err.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eend::cli

#endif  // EEND_TOOLS_CLI_H_
