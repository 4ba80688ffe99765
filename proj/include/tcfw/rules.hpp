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

#include <array>
#include <string_view>

// Closed registry of rule identifiers. docs/rule-registry.md documents each
// entry; tests assert the two stay in sync.
namespace tcfw::rules {

inline constexpr std::string_view kCoreMalformed = "CORE.MALFORMED";

inline constexpr std::string_view kToolUnknown = "TOOL.UNKNOWN";
inline constexpr std::string_view kToolDisabled = "TOOL.DISABLED";
inline constexpr std::string_view kToolSchema = "TOOL.SCHEMA";
inline constexpr std::string_view kToolSuspectField = "TOOL.SUSPECT_FIELD";
inline constexpr std::string_view kToolApprovalRequired = "TOOL.APPROVAL_REQUIRED";

inline constexpr std::string_view kShellQuoting = "SHELL.QUOTING";
inline constexpr std::string_view kShellRedirection = "SHELL.REDIRECTION";
inline constexpr std::string_view kShellPiping = "SHELL.PIPING";
inline constexpr std::string_view kShellLogical = "SHELL.LOGICAL";
inline constexpr std::string_view kShellGlob = "SHELL.GLOB";
inline constexpr std::string_view kShellBrackets = "SHELL.BRACKETS";
inline constexpr std::string_view kShellSubstitution = "SHELL.SUBSTITUTION";
inline constexpr std::string_view kShellSequencing = "SHELL.SEQUENCING";
inline constexpr std::string_view kShellLineBreak = "SHELL.LINE_BREAK";
inline constexpr std::string_view kShellUncovered = "SHELL.UNCOVERED";
inline constexpr std::string_view kShellDenylist = "SHELL.DENYLIST";
inline constexpr std::string_view kShellUnparsed = "SHELL.UNPARSED";
inline constexpr std::string_view kShellEmptyAllowlist = "SHELL.EMPTY_ALLOWLIST";
inline constexpr std::string_view kShellTooLarge = "SHELL.TOO_LARGE";
inline constexpr std::string_view kShellDialect = "SHELL.DIALECT";

inline constexpr std::string_view kPathReadOutside = "PATH.R_O";
inline constexpr std::string_view kPathWriteOutside = "PATH.W_O";
inline constexpr std::string_view kPathProtected = "PATH.PROTECTED";
inline constexpr std::string_view kPathUnresolved = "PATH.UNRESOLVED";
inline constexpr std::string_view kPathLoop = "PATH.LOOP";

inline constexpr std::string_view kExfilScheme = "EXFIL.SCHEME";
inline constexpr std::string_view kExfilHost = "EXFIL.HOST";
inline constexpr std::string_view kExfilSecret = "EXFIL.SECRET";
inline constexpr std::string_view kExfilEntropy = "EXFIL.ENTROPY";
inline constexpr std::string_view kExfilPayload = "EXFIL.PAYLOAD";
inline constexpr std::string_view kExfilMalformed = "EXFIL.MALFORMED";
inline constexpr std::string_view kExfilRenderImage = "EXFIL.RENDER_IMG";
inline constexpr std::string_view kExfilRenderLink = "EXFIL.RENDER_LINK";

inline constexpr std::string_view kApprovalUnsafeMode = "APPROVAL.UNSAFE_MODE";
inline constexpr std::string_view kApprovalUnavailable = "APPROVAL.UNAVAILABLE";

inline constexpr std::string_view kAuditDegraded = "AUDIT.DEGRADED";

inline constexpr std::array kRegistry = {
    kCoreMalformed,       kToolUnknown,          kToolDisabled,      kToolSchema,
    kToolSuspectField,    kToolApprovalRequired, kShellQuoting,      kShellRedirection,
    kShellPiping,         kShellLogical,         kShellGlob,         kShellBrackets,
    kShellSubstitution,   kShellSequencing,      kShellLineBreak,    kShellUncovered,
    kShellDenylist,       kShellUnparsed,        kShellEmptyAllowlist, kShellTooLarge,
    kShellDialect,        kPathReadOutside,      kPathWriteOutside,  kPathProtected,
    kPathUnresolved,      kPathLoop,             kExfilScheme,       kExfilHost,
    kExfilSecret,         kExfilEntropy,         kExfilPayload,      kExfilMalformed,
    kExfilRenderImage,    kExfilRenderLink,      kApprovalUnsafeMode, kApprovalUnavailable,
    kAuditDegraded,
};

constexpr bool is_registered(std::string_view id) {
  for (auto r : kRegistry) {
    if (r == id) return true;
  }
  return false;
}

}  // namespace tcfw::rules
