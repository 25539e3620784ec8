// Copyright 2026 The eegcare Authors.
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

// eegcare: operator command line for the EEG point-of-care toolkit.

#include <iostream>

#include "commands.hpp"
#include "eegcare/codec/model.hpp"
#include "eegcare/device/profile.hpp"
#include "eegcare/net/socket.hpp"
#include "eegcare/recording/session.hpp"
#include "eegcare/screening/mchat.hpp"
#include "eegcare/sim/client.hpp"

int main(int argc, char** argv) {
  using namespace eegcare;
  CLI::App app("eegcare: record, inspect and screen from the command line");
  app.require_subcommand(1);
  app.set_version_flag("--version", "eegcare 0.1.0");
  const std::vector<cli::Command> commands = {
      cli::add_inspect(app), cli::add_convert(app), cli::add_simulate(app), cli::add_record(app),
      cli::add_score(app),   cli::add_serve(app),   cli::add_upload(app),
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsage;
  }

  for (const auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      return c.run();
    } catch (const codec::CodecError& e) {
      std::cerr << "error: invalid file\n";
      for (const auto& f : e.findings()) std::cerr << "  " << f.to_string() << "\n";
      return cli::kInvalid;
    } catch (const screening::ScoringError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kInvalid;
    } catch (const screening::ResponseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      for (const auto& p : e.problems) std::cerr << "  " << p << "\n";
      return cli::kInvalid;
    } catch (const screening::QuestionnaireError& e) {
      std::cerr << "error: questionnaire: " << e.what() << "\n";
      return cli::kInvalid;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: malformed JSON: " << e.what() << "\n";
      return cli::kInvalid;
    } catch (const net::TransportError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kRuntime;
    } catch (const sim::DeviceError& e) {
      std::cerr << "error: device: " << e.what() << "\n";
      return cli::kRuntime;
    } catch (const recording::SessionError& e) {
      std::cerr << "error: session: " << e.what() << "\n";
      return cli::kRuntime;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kRuntime;
    }
  }
  return cli::kUsage;
}
