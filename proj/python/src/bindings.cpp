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


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tcfw/approval.hpp"
#include "tcfw/corpus.hpp"
#include "tcfw/pipeline.hpp"
#include "tcfw/serialization.hpp"
#include "tcfw/shell.hpp"

namespace py = pybind11;

namespace {

// Config, catalog and host loaded once; check() is then pure.
class Engine {
 public:
  Engine(const std::string& config_path, const std::string& catalog_path, const std::string& fixture_path)
      : config_(tcfw::load_policy_config(config_path)), catalog_(tcfw::load_catalog(catalog_path)) {
    host_ = fixture_path.empty() ? tcfw::paths::HostContext::from_process()
                                 : tcfw::host_from_fixture(tcfw::read_json_file(fixture_path).value);
    digest_ = tcfw::policy_digest(config_, catalog_);
  }

  std::string check(const std::string& wire) const {
    auto request = tcfw::request_from_json(tcfw::parse_json_document(wire, "<request>"));
    tcfw::Verdict v;
    {
      py::gil_scoped_release release;
      v = tcfw::evaluate(request, catalog_, config_, host_);
    }
    return tcfw::verdict_to_json(v).dump();
  }

  const std::string& digest() const { return digest_; }

 private:
  tcfw::PolicyConfig config_;
  tcfw::ToolCatalog catalog_;
  tcfw::paths::HostContext host_;
  std::string digest_;
};

std::string analyze(const std::string& command) {
  auto a = tcfw::shell::analyze(command);
  tcfw::Value cats = tcfw::Value::array();
  for (auto c : a.categories.members()) cats.push_back(tcfw::shell::short_name(c));
  tcfw::Value commands = tcfw::Value::array();
  for (const auto& c : tcfw::shell::flatten_commands(a)) commands.push_back(c.argv_text());
  return tcfw::Value{{"categories", cats}, {"parse_complete", a.parse_complete}, {"residue", a.has_residue()},
                     {"commands", commands}}
      .dump();
}

std::pair<bool, std::string> run_corpus(const std::string& corpus_path, const std::string& config_path,
                                        const std::string& catalog_path, const std::string& report) {
  auto corpus = tcfw::corpus::load_corpus(corpus_path);
  auto config = tcfw::load_policy_config(config_path);
  auto catalog = tcfw::load_catalog(catalog_path);
  tcfw::corpus::Report r;
  {
    py::gil_scoped_release release;
    r = tcfw::corpus::run_corpus(
        corpus, config, tcfw::corpus::local_evaluator(catalog, tcfw::host_from_fixture(corpus.fixture)));
  }
  return {r.ok(), report == "json" ? tcfw::corpus::report_json(r).dump() : tcfw::corpus::report_markdown(r)};
}

std::string request_digest(const std::string& wire) {
  return tcfw::request_digest(tcfw::request_from_json(tcfw::parse_json_document(wire, "<request>")));
}

}  // namespace

PYBIND11_MODULE(_tcfw, m) {
  m.doc() = "Tool-call firewall core";

  // Translators are tried newest first, so the base class goes in first.
  py::register_exception<tcfw::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<tcfw::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<tcfw::WireError>(m, "WireError", PyExc_ValueError);
  py::register_exception<tcfw::corpus::CorpusError>(m, "CorpusError", PyExc_ValueError);

  py::class_<Engine>(m, "Engine")
      .def(py::init<const std::string&, const std::string&, const std::string&>(), py::arg("config"),
           py::arg("catalog"), py::arg("fs_fixture") = "")
      .def("check", &Engine::check, py::arg("request_json"))
      .def_property_readonly("policy_digest", &Engine::digest);

  m.def("analyze", &analyze, py::arg("command"));
  m.def("run_corpus", &run_corpus, py::arg("corpus"), py::arg("config"), py::arg("catalog"), py::arg("report") = "md");
  m.def("request_digest", &request_digest, py::arg("request_json"));
}
