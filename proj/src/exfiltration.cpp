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

#include "tcfw/exfiltration.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>

#include "tcfw/rules.hpp"

namespace tcfw::exfil {

namespace {

constexpr int kMaxSanitizePasses = 8;
constexpr std::string_view kBlockedContent = "[blocked content]";

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/' || c == '=' ||
         c == '_' || c == '-';
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp == 0 || cp > 0x10FFFF) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// HTML character references as browsers decode them in attribute values.
std::string decode_entities(std::string_view s) {
  static const std::map<std::string, std::string, std::less<>> kNamed = {
      {"amp", "&"},   {"lt", "<"},     {"gt", ">"},   {"quot", "\""}, {"apos", "'"},
      {"colon", ":"}, {"sol", "/"},    {"period", "."}, {"quest", "?"}, {"equals", "="},
      {"tab", "\t"},  {"newline", "\n"}, {"num", "#"}, {"percnt", "%"}, {"lpar", "("},
      {"rpar", ")"},  {"commat", "@"},
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    if (i + 1 < s.size() && s[i + 1] == '#') {
      std::size_t j = i + 2;
      bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
      if (hex) ++j;
      unsigned long cp = 0;
      std::size_t digits = 0;
      while (j < s.size() && digits < 8) {
        int v = hex ? hex_value(s[j]) : (std::isdigit(static_cast<unsigned char>(s[j])) ? s[j] - '0' : -1);
        if (v < 0) break;
        cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(v);
        ++j;
        ++digits;
      }
      if (digits > 0) {
        if (j < s.size() && s[j] == ';') ++j;
        append_utf8(out, cp);
        i = j;
        continue;
      }
    } else {
      std::size_t j = i + 1;
      while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j])) && j - i < 10) ++j;
      auto it = kNamed.find(to_lower(s.substr(i + 1, j - i - 1)));
      if (it != kNamed.end()) {
        if (j < s.size() && s[j] == ';') ++j;
        out += it->second;
        i = j;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

std::string strip_url_noise(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\t' || c == '\n' || c == '\r') continue;
    out += c;
  }
  auto b = out.find_first_not_of(" \f\v");
  if (b == std::string::npos) return {};
  auto e = out.find_last_not_of(" \f\v");
  return out.substr(b, e - b + 1);
}

bool is_http(const Url& u) { return u.scheme == "http" || u.scheme == "https"; }

// Resource-loading URL as opposed to a relative or inert one.
bool is_external(std::string_view url) {
  if (url.size() >= 2 && (url[0] == '/' || url[0] == '\\') && (url[1] == '/' || url[1] == '\\')) {
    return true;
  }
  std::size_t i = 0;
  if (url.empty() || !std::isalpha(static_cast<unsigned char>(url[0]))) return false;
  while (i < url.size() && (std::isalnum(static_cast<unsigned char>(url[i])) || url[i] == '+' ||
                            url[i] == '-' || url[i] == '.')) {
    ++i;
  }
  if (i >= url.size() || url[i] != ':') return false;
  auto scheme = to_lower(url.substr(0, i));
  return scheme != "data" && scheme != "about" && scheme != "cid" && scheme != "blob";
}

void url_content_checks(const Url& u, std::string_view raw, const PolicyConfig& config, Verdict& v,
                        std::string_view evidence) {
  std::string query = u.query;
  std::replace(query.begin(), query.end(), '&', ' ');
  std::string decoded = percent_decode(u.userinfo, false) + " " + percent_decode(u.path, false) + " " +
                        percent_decode(query, true) + " " + percent_decode(u.fragment, false);
  // Keys and values are separate tokens for the entropy heuristic.
  std::string tokens = decoded;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == '=' && i + 1 < tokens.size() && tokens[i + 1] != '=' && tokens[i + 1] != ' ') tokens[i] = ' ';
  }
  const SecretPattern* secret = find_secret(decoded, config.secret_patterns);
  if (!secret) secret = find_secret(raw, config.secret_patterns);
  if (secret) {
    v.add(secret->action, {std::string(rules::kExfilSecret),
                           "URL carries data matching secret pattern '" + secret->name + "'",
                           std::string(evidence)});
  }
  if (auto token = high_entropy_token(tokens, config)) {
    v.add(Decision::kRequireApproval,
          {std::string(rules::kExfilEntropy), "URL carries a high-entropy token", *token});
  }
  std::size_t payload = query_payload_bytes(u.query);
  if (payload > config.max_query_param_length) {
    v.add(Decision::kRequireApproval,
          {std::string(rules::kExfilPayload),
           "query payload of " + std::to_string(payload) + " bytes exceeds " +
               std::to_string(config.max_query_param_length),
           std::string(evidence)});
  }
}

// ---------------------------------------------------------------------------
// Render scanning

struct Hit {
  Channel channel;
  std::size_t begin;
  std::size_t end;
  std::string url;
  std::string replacement;
  bool reported = true;
};

std::string safe_alt(std::string_view alt) {
  std::string out;
  for (char c : alt) {
    if (std::string_view("[]()<>!`\\\"'").find(c) != std::string_view::npos) continue;
    out += is_space(c) ? ' ' : c;
  }
  return out;
}

std::string image_placeholder(std::string_view alt) {
  return "[blocked image: " + safe_alt(alt) + "]";
}

// Parses a balanced [...] starting at s[i] == '['. Returns index after ']'.
std::optional<std::size_t> bracket_end(std::string_view s, std::size_t i) {
  int depth = 0;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] == '\\') {
      ++j;
      continue;
    }
    if (s[j] == '[') ++depth;
    if (s[j] == ']' && --depth == 0) return j + 1;
    if (s[j] == '\n' && j + 1 < s.size() && s[j + 1] == '\n') return std::nullopt;
  }
  return std::nullopt;
}

std::string normalize_label(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (is_space(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += lower(c);
  }
  return out;
}

struct RefDef {
  std::string url;
  std::size_t begin;  // of the destination text
  std::size_t end;
};

std::map<std::string, RefDef> reference_definitions(std::string_view s) {
  std::map<std::string, RefDef> defs;
  std::size_t line = 0;
  while (line < s.size()) {
    std::size_t eol = s.find('\n', line);
    if (eol == std::string_view::npos) eol = s.size();
    std::string_view l = s.substr(line, eol - line);
    std::size_t i = 0;
    while (i < l.size() && i < 3 && l[i] == ' ') ++i;
    if (i < l.size() && l[i] == '[') {
      auto close = l.find("]:", i);
      if (close != std::string_view::npos) {
        std::string label = normalize_label(l.substr(i + 1, close - i - 1));
        std::size_t u = close + 2;
        while (u < l.size() && is_space(l[u])) ++u;
        std::size_t ue = u;
        if (u < l.size() && l[u] == '<') {
          ue = l.find('>', u);
          if (ue != std::string_view::npos) {
            defs.emplace(label, RefDef{std::string(l.substr(u + 1, ue - u - 1)), line + u, line + ue + 1});
          }
        } else {
          while (ue < l.size() && !is_space(l[ue])) ++ue;
          if (ue > u) defs.emplace(label, RefDef{std::string(l.substr(u, ue - u)), line + u, line + ue});
        }
      }
    }
    line = eol + 1;
  }
  return defs;
}

void scan_markdown_images(std::string_view s, std::vector<Hit>& hits) {
  auto defs = reference_definitions(s);
  for (std::size_t i = s.find("!["); i != std::string_view::npos; i = s.find("![", i + 1)) {
    auto alt_end = bracket_end(s, i + 1);
    if (!alt_end) continue;
    std::string_view alt = s.substr(i + 2, *alt_end - i - 3);
    std::size_t j = *alt_end;
    std::string url;
    std::size_t end = j;
    if (j < s.size() && s[j] == '(') {
      std::size_t k = j + 1;
      while (k < s.size() && is_space(s[k])) ++k;
      if (k < s.size() && s[k] == '<') {
        auto close = s.find('>', k);
        if (close == std::string_view::npos) continue;
        url = std::string(s.substr(k + 1, close - k - 1));
        k = close + 1;
      } else {
        int depth = 0;
        std::size_t start = k;
        while (k < s.size() && !is_space(s[k])) {
          if (s[k] == '\\') {
            k += 2;
            continue;
          }
          if (s[k] == '(') ++depth;
          if (s[k] == ')') {
            if (depth == 0) break;
            --depth;
          }
          ++k;
        }
        k = std::min(k, s.size());
        url = std::string(s.substr(start, k - start));
      }
      // Optional title, then ')'.
      int depth = 0;
      while (k < s.size() && !(s[k] == ')' && depth == 0)) {
        if (s[k] == '(') ++depth;
        if (s[k] == ')') --depth;
        ++k;
      }
      end = k < s.size() ? k + 1 : s.size();
    } else {
      std::string label;
      if (j < s.size() && s[j] == '[') {
        auto ref_end = bracket_end(s, j);
        if (!ref_end) continue;
        label = normalize_label(s.substr(j + 1, *ref_end - j - 2));
        if (label.empty()) label = normalize_label(alt);
        end = *ref_end;
      } else {
        label = normalize_label(alt);
      }
      auto it = defs.find(label);
      if (it == defs.end()) continue;
      url = strip_url_noise(it->second.url);
      if (is_external(url)) {
        hits.push_back({Channel::kRenderImage, it->second.begin, it->second.end, url, "about:blank", false});
      }
    }
    url = strip_url_noise(url);
    if (!is_external(url)) continue;
    hits.push_back({Channel::kRenderImage, i, end, url, image_placeholder(alt)});
  }
}

struct Attribute {
  std::string name;  // lowercased
  std::string value;  // entity-decoded
};

// Parses the tag starting at s[i] == '<'. Returns end index and attributes.
std::size_t parse_tag(std::string_view s, std::size_t i, std::string& name,
                      std::vector<Attribute>& attrs) {
  std::size_t j = i + 1;
  while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == ':' || s[j] == '-')) {
    name += lower(s[j++]);
  }
  while (j < s.size() && s[j] != '>') {
    if (is_space(s[j]) || s[j] == '/') {
      ++j;
      continue;
    }
    Attribute a;
    while (j < s.size() && !is_space(s[j]) && s[j] != '=' && s[j] != '>' && s[j] != '/') {
      a.name += lower(s[j++]);
    }
    if (a.name.empty()) {
      ++j;
      continue;
    }
    std::size_t k = j;
    while (k < s.size() && is_space(s[k])) ++k;
    if (k < s.size() && s[k] == '=') {
      ++k;
      while (k < s.size() && is_space(s[k])) ++k;
      if (k < s.size() && (s[k] == '"' || s[k] == '\'')) {
        char q = s[k];
        auto close = s.find(q, k + 1);
        if (close == std::string_view::npos) close = s.size();
        a.value = decode_entities(s.substr(k + 1, close - k - 1));
        j = std::min(close + 1, s.size());
      } else {
        std::size_t start = k;
        while (k < s.size() && !is_space(s[k]) && s[k] != '>') ++k;
        a.value = decode_entities(s.substr(start, k - start));
        j = k;
      }
    }
    attrs.push_back(std::move(a));
  }
  return j < s.size() ? j + 1 : s.size();
}

std::vector<std::string> srcset_urls(std::string_view v) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && (is_space(v[i]) || v[i] == ',')) ++i;
    std::size_t start = i;
    while (i < v.size() && !is_space(v[i])) ++i;
    std::string url(v.substr(start, i - start));
    while (!url.empty() && url.back() == ',') url.pop_back();
    if (!url.empty()) out.push_back(url);
    while (i < v.size() && v[i] != ',') ++i;
  }
  return out;
}

void scan_html(std::string_view s, std::vector<Hit>& hits) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> kImageTags = {
      {"img", {"src", "srcset", "lowsrc", "dynsrc"}},
      {"image", {"href", "xlink:href", "src"}},
      {"source", {"src", "srcset"}},
      {"input", {"src"}},
      {"picture", {"srcset"}},
      {"video", {"poster"}},
  };
  static const std::map<std::string, std::vector<std::string>, std::less<>> kLinkTags = {
      {"iframe", {"src"}}, {"frame", {"src"}},   {"embed", {"src"}},
      {"object", {"data"}}, {"script", {"src"}}, {"link", {"href"}},
      {"video", {"src"}},  {"audio", {"src"}},   {"track", {"src"}},
      {"use", {"href", "xlink:href"}}, {"meta", {"content"}}, {"portal", {"src"}},
  };
  for (std::size_t i = s.find('<'); i != std::string_view::npos; i = s.find('<', i + 1)) {
    if (i + 1 >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i + 1]))) continue;
    std::string name;
    std::vector<Attribute> attrs;
    std::size_t end = parse_tag(s, i, name, attrs);
    std::string alt;
    for (const auto& a : attrs) {
      if (a.name == "alt") alt = a.value;
    }
    auto check = [&](const auto& table, Channel ch) {
      auto it = table.find(name);
      for (const auto& a : attrs) {
        bool listed = it != table.end() &&
                      std::find(it->second.begin(), it->second.end(), a.name) != it->second.end();
        bool background = ch == Channel::kRenderImage && a.name == "background";
        if (!listed && !background) continue;
        std::vector<std::string> urls;
        if (a.name == "srcset") {
          urls = srcset_urls(a.value);
        } else if (name == "meta") {
          // <meta http-equiv=refresh content="0;url=...">
          auto pos = to_lower(a.value).find("url=");
          if (pos == std::string::npos) continue;
          urls.push_back(a.value.substr(pos + 4));
        } else {
          urls.push_back(a.value);
        }
        for (auto& u : urls) {
          u = strip_url_noise(u);
          if (!is_external(u)) continue;
          hits.push_back({ch, i, end, u,
                          ch == Channel::kRenderImage ? image_placeholder(alt) : "[blocked embed]"});
        }
      }
    };
    check(kImageTags, Channel::kRenderImage);
    check(kLinkTags, Channel::kRenderLink);
  }
}

// CSS url(...) anywhere: style attributes, <style> blocks, @import.
void scan_css(std::string_view s, std::vector<Hit>& hits) {
  std::string lowered = to_lower(s);
  for (std::size_t i = lowered.find("url("); i != std::string::npos; i = lowered.find("url(", i + 1)) {
    std::size_t k = i + 4;
    std::size_t close = s.find(')', k);
    if (close == std::string_view::npos) close = s.size();
    std::string url = decode_entities(s.substr(k, close - k));
    url = strip_url_noise(url);
    if (url.size() >= 2 && (url.front() == '"' || url.front() == '\'') && url.back() == url.front()) {
      url = url.substr(1, url.size() - 2);
    } else if (!url.empty() && (url.front() == '"' || url.front() == '\'')) {
      url = url.substr(1);
    }
    url = strip_url_noise(url);
    if (!is_external(url)) continue;
    hits.push_back({Channel::kRenderImage, i, std::min(close + 1, s.size()), url, "url(about:blank)"});
  }
}

// Diagram image shapes: A@{ img: "https://...", label: "x" }.
void scan_diagram_shapes(std::string_view s, std::vector<Hit>& hits) {
  for (std::size_t i = s.find("@{"); i != std::string_view::npos; i = s.find("@{", i + 1)) {
    std::size_t close = s.find('}', i);
    if (close == std::string_view::npos) close = s.size();
    std::string body = to_lower(s.substr(i, close - i));
    for (std::size_t k = body.find("img"); k != std::string::npos; k = body.find("img", k + 1)) {
      std::size_t c = k + 3;
      while (c < body.size() && is_space(body[c])) ++c;
      if (c >= body.size() || body[c] != ':') continue;
      ++c;
      while (c < body.size() && is_space(body[c])) ++c;
      std::size_t ub = c;
      std::size_t ue;
      if (ub < body.size() && (body[ub] == '"' || body[ub] == '\'')) {
        ue = body.find(body[ub], ub + 1);
        if (ue == std::string::npos) ue = body.size();
        ++ub;
      } else {
        ue = ub;
        while (ue < body.size() && body[ue] != ',' && !is_space(body[ue])) ++ue;
      }
      std::string url = strip_url_noise(s.substr(i + ub, ue - ub));
      if (!is_external(url)) continue;
      hits.push_back({Channel::kRenderImage, i + ub, i + ue, url, "about:blank"});
    }
  }
}

std::vector<Hit> find_hits(std::string_view s) {
  std::vector<Hit> hits;
  scan_markdown_images(s, hits);
  scan_html(s, hits);
  scan_css(s, hits);
  scan_diagram_shapes(s, hits);
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
  });
  return hits;
}

std::string replace_hits(std::string_view s, const std::vector<Hit>& hits) {
  std::string out;
  std::size_t at = 0;
  for (const auto& h : hits) {
    if (h.begin < at) continue;  // nested in an earlier replacement
    out.append(s.substr(at, h.begin - at));
    out += h.replacement;
    at = h.end;
  }
  out.append(s.substr(std::min(at, s.size())));
  return out;
}

}  // namespace

std::string percent_decode(std::string_view s, bool plus_is_space) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int h = hex_value(s[i + 1]);
      int l = hex_value(s[i + 2]);
      if (h >= 0 && l >= 0) {
        out += static_cast<char>(h * 16 + l);
        i += 2;
        continue;
      }
    }
    out += (plus_is_space && s[i] == '+') ? ' ' : s[i];
  }
  return out;
}

Url parse_url(std::string_view text) {
  std::string s = strip_url_noise(text);
  if (s.empty()) throw MalformedUrl("empty");
  for (unsigned char c : s) {
    if (c < 0x20 || c == 0x7f) throw MalformedUrl("control character");
  }
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) throw MalformedUrl("missing scheme");
  std::size_t i = 0;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '+' ||
                          s[i] == '-' || s[i] == '.')) {
    ++i;
  }
  if (i >= s.size() || s[i] != ':') throw MalformedUrl("missing scheme");
  Url u;
  u.scheme = to_lower(s.substr(0, i));
  std::string_view rest = std::string_view(s).substr(i + 1);

  bool special = u.scheme == "http" || u.scheme == "https";
  if (special) {
    while (!rest.empty() && (rest[0] == '/' || rest[0] == '\\')) rest.remove_prefix(1);
    u.has_authority = true;
  } else if (rest.size() >= 2 && rest[0] == '/' && rest[1] == '/') {
    rest.remove_prefix(2);
    u.has_authority = true;
  }

  if (u.has_authority) {
    std::size_t a_end = rest.find_first_of(special ? "/\\?#" : "/?#");
    std::string_view authority = rest.substr(0, a_end);
    rest = a_end == std::string_view::npos ? std::string_view{} : rest.substr(a_end);
    auto at = authority.rfind('@');
    if (at != std::string_view::npos) {
      u.userinfo = std::string(authority.substr(0, at));
      authority.remove_prefix(at + 1);
    }
    std::string_view host = authority;
    if (!host.empty() && host[0] == '[') {
      auto close = host.find(']');
      if (close == std::string_view::npos) throw MalformedUrl("unterminated IPv6 literal");
      std::string_view after = host.substr(close + 1);
      if (!after.empty()) {
        if (after[0] != ':') throw MalformedUrl("junk after IPv6 literal");
        u.port = std::string(after.substr(1));
      }
      host = host.substr(0, close + 1);
    } else {
      auto colon = host.find(':');
      if (colon != std::string_view::npos) {
        u.port = std::string(host.substr(colon + 1));
        host = host.substr(0, colon);
      }
    }
    for (char c : u.port) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw MalformedUrl("invalid port");
    }
    u.host = to_lower(percent_decode(host));
    for (unsigned char c : u.host) {
      if (c <= 0x20 || c == 0x7f || std::string_view("<>\"`{}|\\^%@/?#").find(static_cast<char>(c)) !=
                                        std::string_view::npos) {
        throw MalformedUrl("invalid host");
      }
    }
    while (!u.host.empty() && u.host.back() == '.') u.host.pop_back();
    if (u.host.empty() && special) throw MalformedUrl("empty host");
  }

  auto hash = rest.find('#');
  if (hash != std::string_view::npos) {
    u.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  auto q = rest.find('?');
  if (q != std::string_view::npos) {
    u.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  u.path = std::string(rest);
  return u;
}

std::size_t query_payload_bytes(std::string_view query) {
  std::size_t total = 0;
  std::size_t i = 0;
  while (i <= query.size()) {
    auto amp = query.find('&', i);
    if (amp == std::string_view::npos) amp = query.size();
    std::string_view param = query.substr(i, amp - i);
    auto eq = param.find('=');
    total += eq == std::string_view::npos ? param.size() : param.size() - eq - 1;
    i = amp + 1;
  }
  return total;
}

double shannon_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : s) ++counts[c];
  double h = 0.0;
  const double n = static_cast<double>(s.size());
  for (auto c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

bool host_allowed(std::string_view host, const std::vector<std::string>& patterns) {
  std::string h = to_lower(host);
  for (const auto& raw : patterns) {
    std::string p = to_lower(raw);
    while (!p.empty() && p.back() == '.') p.pop_back();
    if (p.rfind("*.", 0) == 0) {
      std::string suffix = p.substr(1);
      if (h.size() > suffix.size() && h.compare(h.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return true;
      }
    } else if (h == p) {
      return true;
    }
  }
  return false;
}

const SecretPattern* find_secret(std::string_view text, const std::vector<SecretPattern>& patterns) {
  for (const auto& p : patterns) {
    if (std::regex_search(text.begin(), text.end(), p.compiled)) return &p;
  }
  return nullptr;
}

std::optional<std::string> high_entropy_token(std::string_view text, const PolicyConfig& config) {
  if (!config.entropy_heuristic) return std::nullopt;
  std::optional<std::string> best;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_char(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && is_token_char(text[i])) ++i;
    std::string_view token = text.substr(start, i - start);
    if (token.size() >= config.entropy_min_length &&
        shannon_entropy(token) > config.entropy_bits_per_char &&
        (!best || token.size() > best->size())) {
      best = std::string(token);
    }
  }
  return best;
}

Verdict inspect_url(std::string_view url, const PolicyConfig& config) {
  Url u;
  try {
    u = parse_url(url);
  } catch (const MalformedUrl& e) {
    return Verdict::deny({std::string(rules::kExfilMalformed), e.what(), std::string(url)});
  }
  if (!is_http(u)) {
    return Verdict::deny({std::string(rules::kExfilScheme),
                          "scheme '" + u.scheme + "' is not http or https", std::string(url)});
  }
  Verdict v;
  if (!host_allowed(u.host, config.fetch_host_allowlist)) {
    v.add(Decision::kRequireApproval, {std::string(rules::kExfilHost),
                                       "host '" + u.host + "' is not on the fetch allowlist", u.host});
  }
  url_content_checks(u, url, config, v, url);
  return v;
}

Verdict inspect_outbound_text(std::string_view text, const PolicyConfig& config) {
  Verdict v;
  if (const auto* secret = find_secret(text, config.secret_patterns)) {
    v.add(secret->action, {std::string(rules::kExfilSecret),
                           "text matches secret pattern '" + secret->name + "'", ""});
  }
  if (auto token = high_entropy_token(text, config)) {
    v.add(Decision::kRequireApproval,
          {std::string(rules::kExfilEntropy), "text carries a high-entropy token", *token});
  }
  if (text.size() > config.max_query_param_length) {
    v.add(Decision::kRequireApproval,
          {std::string(rules::kExfilPayload),
           "outbound text of " + std::to_string(text.size()) + " bytes exceeds " +
               std::to_string(config.max_query_param_length),
           ""});
  }
  return v;
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kFetchUrl: return "fetch_url";
    case Channel::kRenderImage: return "render_image";
    case Channel::kRenderLink: return "render_link";
  }
  return "?";
}

RenderScan scan_renderable(std::string_view content, const std::vector<SecretPattern>& patterns) {
  RenderScan out;
  auto hits = find_hits(content);
  for (const auto& h : hits) {
    if (!h.reported) continue;
    ExfilFinding f;
    f.channel = h.channel;
    f.begin = h.begin;
    f.end = h.end;
    f.url = h.url;
    try {
      Url u = parse_url(h.url.rfind("//", 0) == 0 ? "https:" + h.url : h.url);
      f.host = u.host.empty() ? "(" + u.scheme + ")" : u.host;
      f.payload_bytes = query_payload_bytes(u.query);
    } catch (const MalformedUrl&) {
      f.host = "(malformed)";
    }
    if (const auto* s = find_secret(percent_decode(h.url, true), patterns)) f.matched_secret = s->name;
    out.findings.push_back(std::move(f));
  }
  if (hits.empty()) {
    out.sanitized = std::string(content);
    return out;
  }
  std::string current = replace_hits(content, hits);
  for (int pass = 1; pass < kMaxSanitizePasses; ++pass) {
    auto again = find_hits(current);
    if (again.empty()) {
      out.sanitized = std::move(current);
      return out;
    }
    current = replace_hits(current, again);
  }
  out.sanitized = find_hits(current).empty() ? std::move(current) : std::string(kBlockedContent);
  return out;
}

Verdict render_verdict(const std::vector<ExfilFinding>& findings, const PolicyConfig& config) {
  Verdict v;
  for (const auto& f : findings) {
    std::string rule(f.channel == Channel::kRenderLink ? rules::kExfilRenderLink : rules::kExfilRenderImage);
    Url u;
    bool parsed = true;
    try {
      u = parse_url(f.url.rfind("//", 0) == 0 ? "https:" + f.url : f.url);
    } catch (const MalformedUrl&) {
      parsed = false;
    }
    if (!parsed || !is_http(u) || !host_allowed(u.host, config.fetch_host_allowlist)) {
      v.add(Decision::kRequireApproval,
            {rule, "rendered content loads an external resource from " + f.host, f.url});
    }
    if (parsed) url_content_checks(u, f.url, config, v, f.url);
  }
  return v;
}

}  // namespace tcfw::exfil
