# Copyright 2026 The tcfw Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the tool-call firewall."""

import json

from . import _tcfw
from ._tcfw import ConfigError, CorpusError, Error, WireError

__all__ = [
    "ConfigError",
    "CorpusError",
    "Error",
    "Firewall",
    "WireError",
    "analyze",
    "request_digest",
    "run_corpus",
]


class Firewall:
    """Evaluates tool-call requests against one policy and catalog."""

    def __init__(self, config, catalog, fs_fixture=None):
        self._engine = _tcfw.Engine(str(config), str(catalog), str(fs_fixture or ""))

    @property
    def policy_digest(self):
        return self._engine.policy_digest

    def check(self, request):
        """Returns the verdict dict for a wire-format request (dict or JSON text)."""
        if not isinstance(request, str):
            request = json.dumps(request)
        return json.loads(self._engine.check(request))


def analyze(command):
    return json.loads(_tcfw.analyze(command))


def request_digest(request):
    if not isinstance(request, str):
        request = json.dumps(request)
    return _tcfw.request_digest(request)


def run_corpus(corpus, config, catalog, report="md"):
    """Returns (ok, report text); a json report is returned parsed."""
    ok, text = _tcfw.run_corpus(str(corpus), str(config), str(catalog), report)
    return ok, json.loads(text) if report == "json" else text
