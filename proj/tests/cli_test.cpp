// Copyright 2026 The HSC Authors.
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

// Runs the built hsc binary against the shipped fixtures.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  Cli()
      : dir_(fs::temp_directory_path() /
             ("hsc_cli_test_" + std::to_string(::getpid()) + "_" +
              ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Cli() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + HSC_CLI_PATH + "\" " + args +
                            " > \"" + (dir_ / "log.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
  }

  std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string out(const std::string& sub) { return "--out \"" + (dir_ / sub).string() + "\""; }

  fs::path dir_;
};

const std::string kConfig = "--config \"" HSC_DATA_DIR "/config.json\"";

TEST_F(Cli, ValidateShippedFixtures) {
  EXPECT_EQ(run("validate " + kConfig), 0) << read(dir_ / "log.txt");
  EXPECT_EQ(run("validate --config \"" HSC_DATA_DIR "/case_config.json\""), 0);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("classify " + kConfig + " --mode sideways"), 1);
  EXPECT_EQ(run("classify " + kConfig + " --k 0"), 1);
  EXPECT_EQ(run("classify --config \"" + (dir_ / "missing.json").string() + "\""), 2);

  std::ofstream(dir_ / "bad_tax.jsonl") << "{\"code\": \"11\", \"level\": 2}\n"
                                        << "{\"code\": \"11\", \"level\": 2}\n";
  std::ofstream(dir_ / "bad.json")
      << "{\"taxonomy\": \"bad_tax.jsonl\", \"enterprises\": \"" HSC_DATA_DIR
         "/enterprises.jsonl\"}";
  EXPECT_EQ(run("validate --config \"" + (dir_ / "bad.json").string() + "\""), 2);
  EXPECT_NE(read(dir_ / "log.txt").find("duplicate"), std::string::npos);

  std::ofstream(dir_ / "typo.json") << "{\"taxonmy\": \"x\"}";
  EXPECT_EQ(run("validate --config \"" + (dir_ / "typo.json").string() + "\""), 2);

  std::ofstream(dir_ / "http.json")
      << "{\"taxonomy\": \"" HSC_DATA_DIR "/taxonomy.jsonl\", \"enterprises\": \"" HSC_DATA_DIR
         "/enterprises.jsonl\", \"encoder\": {\"type\": \"http\", \"url\": "
         "\"http://127.0.0.1:9\"}}";
  EXPECT_EQ(run("classify --config \"" + (dir_ / "http.json").string() + "\" " + out("h")), 3);
}

nlohmann::json leaves_by_id(const std::string& jsonl) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(jsonl);
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    out[j["id"].get<std::string>()] = j["leaves"];
  }
  return out;
}

TEST_F(Cli, FlatAndExhaustiveGroupRankIdentically) {
  ASSERT_EQ(run("classify " + kConfig + " --mode flat --topn 39 " + out("flat")), 0);
  ASSERT_EQ(run("classify " + kConfig + " --mode group --k 1000 --topn 39 " + out("group")), 0);
  const auto flat = leaves_by_id(read(dir_ / "flat" / "results.jsonl"));
  const auto group = leaves_by_id(read(dir_ / "group" / "results.jsonl"));
  EXPECT_EQ(flat.size(), 156u);
  EXPECT_EQ(flat.dump(), group.dump());
}

TEST_F(Cli, EstimateFlagsPublishedAverage) {
  ASSERT_EQ(run("estimate --config \"" HSC_DATA_DIR "/case_config.json\" --codes labels " +
                out("est")),
            0);
  const auto j = nlohmann::json::parse(read(dir_ / "est" / "estimate_summary.json"));
  EXPECT_NEAR(j["case_audit"]["mean_printed_ape"].get<double>(), 46.98, 0.01);
  EXPECT_TRUE(j["case_audit"]["stated_mape_diverges"].get<bool>());
  EXPECT_EQ(j["estimated"], 20);
  EXPECT_NEAR(j["mape"].get<double>(), 46.11, 0.01);
  const auto report = read(dir_ / "est" / "emission_report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')),
            "id,revenue_busd,code,intensity,estimated_mt,reported_mt,ape,fallback_level");
}

TEST_F(Cli, TrainedAdaptersAreUsedByClassify) {
  ASSERT_EQ(run("train " + kConfig + " " + out("t")), 0);
  for (const char* level : {"2", "3", "6"}) {
    EXPECT_TRUE(fs::exists(dir_ / "t" / ("adapter_level" + std::string(level) + ".adp")));
  }
  const auto history = read(dir_ / "t" / "loss_history.csv");
  EXPECT_EQ(history.substr(0, history.find('\n')), "level,epoch,loss");

  std::ofstream(dir_ / "with_adapters.json")
      << "{\"taxonomy\": \"" HSC_DATA_DIR "/taxonomy.jsonl\", \"enterprises\": \"" HSC_DATA_DIR
         "/enterprises.jsonl\", \"stopwords\": \"" HSC_DATA_DIR "/stopwords.txt\", "
         "\"adapters\": \"" + (dir_ / "t").string() + "\"}";
  const std::string with = "--config \"" + (dir_ / "with_adapters.json").string() + "\" ";
  ASSERT_EQ(run("classify " + with + out("a")), 0);
  ASSERT_EQ(run("classify " + with + "--seed 5 " + out("b")), 0);
  EXPECT_EQ(read(dir_ / "a" / "results.jsonl"), read(dir_ / "b" / "results.jsonl"));
}

TEST_F(Cli, TheoremCheckCsv) {
  ASSERT_EQ(run("theorem-check " + out("th")), 0);
  const auto csv = read(dir_ / "th" / "theory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "b,d,p,H_G,H_D,cost_hier,cost_flat,violation");
  EXPECT_EQ(csv.find(",1\n"), std::string::npos);
  EXPECT_NE(csv.find("\n10,3,0.9;0.9;0.9,"), std::string::npos);
}

}  // namespace
