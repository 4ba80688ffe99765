// Copyright 2026 The tcfw Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcfw/types.hpp"

namespace tcfw {

inline constexpr int kExitAllow = 0;
inline constexpr int kExitRequireApproval = 10;
inline constexpr int kExitDeny = 20;
inline constexpr int kExitUsage = 2;
// `corpus run` with at least one failing case or chain.
inline constexpr int kExitCorpusFailures = 1;

int exit_code_for(Decision d);

// The `firewall` command line. `args` excludes the program name.
//   check            --config --catalog --tool --arg k=v... [--raw k=v...]
//                    [--origin kind] [--request file] [--fs-fixture file] [--json]
//   config validate  --config [--catalog]
//   serve            --config --catalog [--listen host:port] [--audit file]
//                    [--audit-fsync] [--fs-fixture file]
//   corpus run FILE  --config --catalog [--report md|json] [--parallel n] [--http]
//   analyze COMMAND
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcfw
