// Copyright 2026 The qtraj Authors
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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qtraj/cli.hpp"

int main(int argc, char **argv) {
    CLI::App app{"qtraj: qubit-probe continuous measurement simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qtraj::package_version());

    auto *run = app.add_subcommand("run", "Run the ensemble described by a JSON config");
    std::string config_path;
    std::string out_dir;
    run->add_option("config", config_path, "Path to the run config")->required();
    run->add_option("--out-dir", out_dir, "Directory for relative output paths (default: current directory)");

    auto *verify = app.add_subcommand("verify", "Run a verification suite and print its residual table");
    std::string suite;
    std::string model = "araki-woods";
    double n = 1.0, m_re = 0.0, m_im = 0.0;
    std::uint64_t seed = 2024;
    int draws = 20;
    verify->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(qtraj::verify_suites()));
    verify->add_option("--model", model, "appendix-b model")->check(CLI::IsMember({"araki-woods", "two-qubit", "qutrit"}));
    verify->add_option("--n", n, "appendix-b thermal occupation N");
    verify->add_option("--m-re", m_re, "appendix-b real part of M");
    verify->add_option("--m-im", m_im, "appendix-b imaginary part of M");
    verify->add_option("--seed", seed, "appendix-a random seed");
    verify->add_option("--draws", draws, "appendix-a number of random draws")->check(CLI::PositiveNumber);

    auto *schemes = app.add_subcommand("schemes", "List scheme identifiers and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    if (run->parsed()) {
        return qtraj::cmd_run(config_path, out_dir, std::cout, std::cerr);
    }
    if (verify->parsed()) {
        nlohmann::json opt = {{"model", model}, {"n", n}, {"m_re", m_re}, {"m_im", m_im}, {"seed", seed}, {"draws", draws}};
        return qtraj::cmd_verify(suite, opt, std::cout, std::cerr);
    }
    if (schemes->parsed()) {
        qtraj::cmd_schemes(std::cout);
    }
    return 0;
}
