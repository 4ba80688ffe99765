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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcfw/types.hpp"

namespace tcfw::exfil {

struct Url {
  std::string scheme;  // lowercased
  std::string userinfo;
  std::string host;  // lowercased, percent-decoded, trailing dot removed
  std::string port;
  std::string path;
  std::string query;
  std::string fragment;
  bool has_authority = false;
};

class MalformedUrl : public Error {
 public:
  explicit MalformedUrl(const std::string& why) : Error("malformed URL: " + why) {}
};

// Throws MalformedUrl. Backslashes terminate the authority the way browsers
// treat them in http(s) URLs.
Url parse_url(std::string_view text);

std::string percent_decode(std::string_view s, bool plus_is_space = false);

// Bytes of query values (after '='; whole parameter when there is no '=').
std::size_t query_payload_bytes(std::string_view query);

double shannon_entropy(std::string_view s);

// "docs.rs" matches exactly; "*.example.com" matches proper subdomains.
bool host_allowed(std::string_view host, const std::vector<std::string>& patterns);

// Name of the first secret pattern matching `text`.
const SecretPattern* find_secret(std::string_view text, const std::vector<SecretPattern>& patterns);

// Longest token that trips the entropy heuristic, if any.
std::optional<std::string> high_entropy_token(std::string_view text, const PolicyConfig& config);

Verdict inspect_url(std::string_view url, const PolicyConfig& config);

// Secret, entropy and size checks for free text leaving the machine (web
// search queries).
Verdict inspect_outbound_text(std::string_view text, const PolicyConfig& config);

enum class Channel { kFetchUrl, kRenderImage, kRenderLink };
std::string_view to_string(Channel c);

struct ExfilFinding {
  Channel channel = Channel::kRenderImage;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string url;
  std::string host;
  std::size_t payload_bytes = 0;
  std::optional<std::string> matched_secret;
};

struct RenderScan {
  std::vector<ExfilFinding> findings;
  std::string sanitized;
};

// Finds external resource loads in markdown, inline HTML and diagram source.
// `sanitized` replaces each with an inert placeholder; scanning it again
// yields no findings.
RenderScan scan_renderable(std::string_view content,
                           const std::vector<SecretPattern>& patterns = {});

// Maps findings onto a verdict under `config`.
Verdict render_verdict(const std::vector<ExfilFinding>& findings, const PolicyConfig& config);

}  // namespace tcfw::exfil
