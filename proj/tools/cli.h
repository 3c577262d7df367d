// Copyright 2026 The dubins_stack Authors
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

#ifndef DUBINS_STACK_TOOLS_CLI_H_
#define DUBINS_STACK_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace dubins_stack::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitTimeout = 1,   // run finished but some target timed out
  kExitUsage = 2,     // bad flag, bad config value
  kExitRuntime = 3,   // solver / filter failure during the run
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

// Percentile with linear interpolation between order statistics
// (p in [0, 100]).
double Percentile(std::vector<double> values, double p);

}  // namespace dubins_stack::cli

#endif  // DUBINS_STACK_TOOLS_CLI_H_
