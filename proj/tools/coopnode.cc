// Copyright 2026 The Coopnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// coopnode: node server, scenario runner and offline tools.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "coop/assertion/document.h"
#include "coop/common/canonical_json.h"
#include "coop/common/clock.h"
#include "coop/common/status.h"
#include "coop/node/config.h"
#include "coop/node/http_server.h"
#include "coop/node/multi_tenant.h"
#include "coop/node/node.h"
#include "coop/sim/fixture.h"
#include "coop/sim/oracle.h"
#include "coop/sim/scenario.h"

namespace {

using coop::Json;

coop::node::HttpServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

int Fail(const absl::Status& s) {
  std::cerr << "coopnode: " << s << "\n";
  return 2;
}

absl::StatusOr<std::string> Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return coop::NotFound("file", path);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

int Serve(const std::string& config_path) {
  absl::StatusOr<coop::node::NodeConfig> config =
      config_path.empty() ? coop::node::LoadConfigFromEnvironment()
                          : coop::node::LoadConfig(config_path);
  if (!config.ok()) return Fail(config.status());

  std::unique_ptr<coop::node::Node> node;
  std::unique_ptr<coop::node::MultiTenantHost> host;
  coop::node::RequestHandler handler;
  if (config->operator_mode) {
    absl::StatusOr<std::unique_ptr<coop::node::MultiTenantHost>> h =
        coop::node::MultiTenantHost::FromConfig(*config);
    if (!h.ok()) return Fail(h.status());
    host = *std::move(h);
    handler = [&host](const coop::node::ApiRequest& r) { return host->Handle(r); };
  } else {
    coop::node::Node::Options options;
    options.config = *config;
    absl::StatusOr<std::unique_ptr<coop::node::Node>> n =
        coop::node::Node::Open(std::move(options));
    if (!n.ok()) return Fail(n.status());
    node = *std::move(n);
    handler = [&node](const coop::node::ApiRequest& r) { return node->Handle(r); };
  }
  coop::node::HttpServer server(handler);
  if (!config->console_dir.empty()) {
    absl::Status mounted = server.MountStatic("/console", config->console_dir);
    if (!mounted.ok()) return Fail(mounted);
  }
  absl::StatusOr<int> port = server.Bind(config->listen_address);
  if (!port.ok()) return Fail(port.status());
  std::cerr << "coopnode: " << config->label() << " listening on port " << *port
            << "\n";
  g_server = &server;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  absl::Status s = server.Serve();
  g_server = nullptr;
  return s.ok() ? 0 : Fail(s);
}

int RunScenarios(const std::vector<std::string>& files, bool parallel) {
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  int failed = 0;
  for (const absl::StatusOr<coop::sim::ScenarioReport>& r :
       coop::sim::RunScenarioFiles(paths, parallel)) {
    if (!r.ok()) {
      std::cout << "ERROR " << r.status().message() << "\n";
      ++failed;
      continue;
    }
    std::cout << r->ToText();
    failed += r->passed() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

int GenerateFixture(const coop::sim::FixtureSpec& spec, const std::string& out) {
  absl::StatusOr<coop::sim::Fixture> f = coop::sim::GenerateFixture(spec);
  if (!f.ok()) return Fail(f.status());
  if (out.empty() || out == "-") {
    std::cout << f->ToJson().dump(2) << "\n";
    return 0;
  }
  absl::Status s = coop::sim::SaveFixture(*f, out);
  return s.ok() ? 0 : Fail(s);
}

int Oracle(const std::string& fixture_path, const std::string& program, int k) {
  absl::StatusOr<coop::sim::Fixture> f = coop::sim::LoadFixture(fixture_path);
  if (!f.ok()) return Fail(f.status());
  coop::sim::OracleOptions options;
  options.k = k;
  absl::StatusOr<Json> cells = coop::sim::OracleEvaluate(*f, program, options);
  if (!cells.ok()) return Fail(cells.status());
  std::cout << cells->dump(2) << "\n";
  return 0;
}

int VerifyAssertion(const std::string& file, const std::string& purpose,
                    std::string keys_path, const std::string& at_text) {
  absl::StatusOr<std::string> document = Slurp(file);
  if (!document.ok()) return Fail(document.status());
  while (!document->empty() &&
         (document->back() == '\n' || document->back() == '\r')) {
    document->pop_back();
  }
  if (keys_path.empty()) {
    keys_path = (std::filesystem::path(file).parent_path() / "coop-keys.json").string();
  }
  absl::StatusOr<std::string> keys_text = Slurp(keys_path);
  if (!keys_text.ok()) return Fail(keys_text.status());
  absl::StatusOr<Json> keys = coop::ParseJson(*keys_text);
  if (!keys.ok()) return Fail(keys.status());
  coop::Timestamp at = coop::SystemClock().Now();
  if (!at_text.empty()) {
    absl::StatusOr<coop::Timestamp> t = coop::ParseTimestamp(at_text);
    if (!t.ok()) return Fail(t.status());
    at = *t;
  }
  coop::assertion::Verdict v =
      coop::assertion::VerifyDocument(*document, purpose, at, *keys);
  std::cout << (v.valid ? "valid" : "invalid " + v.reason) << "\n";
  return v.valid ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data cooperative node"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config_path,
                    "Config file (default: $COOPNODE_CONFIG)");

  CLI::App* scenario = app.add_subcommand("scenario", "Scenario runner");
  scenario->require_subcommand(1);
  CLI::App* scenario_run = scenario->add_subcommand("run", "Run scenario files");
  std::vector<std::string> scenario_files;
  bool parallel = false;
  scenario_run->add_option("files", scenario_files)->required()->check(CLI::ExistingFile);
  scenario_run->add_flag("--parallel", parallel, "One thread per scenario");

  CLI::App* fixture = app.add_subcommand("fixture", "Synthetic fixtures");
  fixture->require_subcommand(1);
  CLI::App* fixture_gen = fixture->add_subcommand("gen", "Generate a fixture");
  coop::sim::FixtureSpec spec;
  std::string fixture_out;
  fixture_gen->add_option("--seed", spec.seed);
  fixture_gen->add_option("--members", spec.members);
  fixture_gen->add_option("--records", spec.max_records, "Max records per store");
  fixture_gen->add_option("--min-records", spec.min_records);
  fixture_gen->add_option("--stores", spec.max_stores, "Max stores per member");
  fixture_gen->add_option("--suspended", spec.suspended_fraction);
  fixture_gen->add_option("--preset", spec.preset)
      ->check(CLI::IsMember({"generic", "rideshare", "income"}));
  fixture_gen->add_option("--sectors", spec.sector_drivers, "Drivers per sector");
  fixture_gen->add_option("-o,--output", fixture_out, "Output file (default stdout)");

  CLI::App* oracle = app.add_subcommand("oracle", "Evaluate a program directly");
  std::string oracle_fixture, oracle_program;
  int oracle_k = 5;
  oracle->add_option("--fixture", oracle_fixture)->required()->check(CLI::ExistingFile);
  oracle->add_option("--program", oracle_program)->required();
  oracle->add_option("--k", oracle_k)->check(CLI::Range(2, 1000000));

  CLI::App* verify = app.add_subcommand("verify-assertion", "Offline verification");
  std::string verify_file, verify_purpose, verify_keys, verify_at;
  verify->add_option("--file", verify_file)->required()->check(CLI::ExistingFile);
  verify->add_option("--purpose", verify_purpose)->required();
  verify->add_option("--keys", verify_keys,
                     "Published keys JSON (default: coop-keys.json beside --file)");
  verify->add_option("--at", verify_at, "RFC 3339 time (default: now)");

  CLI11_PARSE(app, argc, argv);

  if (*serve) return Serve(config_path);
  if (*scenario_run) return RunScenarios(scenario_files, parallel);
  if (*fixture_gen) return GenerateFixture(spec, fixture_out);
  if (*oracle) return Oracle(oracle_fixture, oracle_program, oracle_k);
  if (*verify) return VerifyAssertion(verify_file, verify_purpose, verify_keys, verify_at);
  return 2;
}
