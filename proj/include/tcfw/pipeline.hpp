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

#include "tcfw/paths.hpp"
#include "tcfw/types.hpp"

namespace tcfw {

// Validate, sanitize, dispatch on capability, then apply the per-tool
// approval floor. Pure in (request, catalog, config, host).
Verdict evaluate(const ToolCallRequest& request, const ToolCatalog& catalog, const PolicyConfig& config,
                 const paths::HostContext& host = {});

}  // namespace tcfw
