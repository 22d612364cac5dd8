// tests/test_config.cpp

// Copyright 2026  FastVC Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <string>

#include "fastvc/config.hpp"
#include "fastvc/error.hpp"
#include "testutil.hpp"

using namespace fastvc;
using fastvc::test::TempDir;

TEST_CASE("defaults are a valid configuration") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  CHECK(cfg.seed == 1234);
  CHECK(cfg.mel.n_mels == 80);
  CHECK(cfg.model.bottleneck.d == 32);
  CHECK(cfg.model.bottleneck.k == 32);
  CHECK(cfg.stage2.content_weight == 20.0);
  CHECK(cfg.stage2.feature_weight == 10.0);
}

TEST_CASE("json roundtrip is the identity on the serialized form") {
  RunConfig cfg;
  cfg.seed = 99;
  cfg.model.bottleneck.d = 16;
  cfg.stage1.epochs = 7;
  cfg.confusion.enabled = true;
  cfg.data_dir = "/tmp/x";
  std::string first = cfg.ToJson(2);
  RunConfig back = RunConfig::FromJson(first);
  CHECK(back.ToJson(2) == first);
  CHECK(back.seed == 99);
  CHECK(back.model.bottleneck.d == 16);
  CHECK(back.stage1.epochs == 7);
  CHECK(back.confusion.enabled);
  CHECK(back.data_dir == "/tmp/x");
}

TEST_CASE("partial json keeps defaults for everything else") {
  RunConfig cfg = RunConfig::FromJson(
      R"({"seed": 5, "stage1": {"epochs": 3}})");
  CHECK(cfg.seed == 5);
  CHECK(cfg.stage1.epochs == 3);
  CHECK(cfg.stage1.batch == 16);        // untouched default
  CHECK(cfg.mel.hop == 256);            // untouched section
  CHECK(cfg.model.enc_conv_width == 512);
}

TEST_CASE("the smoke configuration parses and validates") {
  RunConfig cfg = fastvc::test::SmokeRunConfig();
  CHECK_NOTHROW(cfg.Validate());
  CHECK(cfg.model.bottleneck.d == 16);
  CHECK(cfg.model.bottleneck.k == 4);
  CHECK(cfg.stage1.optimizer.beta2 == 0.9);
  CHECK(cfg.stage2.chunk == 3072);
}

TEST_CASE("load reads a file and rejects bad input") {
  TempDir tmp;
  {
    std::ofstream f(tmp.Sub("run.json"));
    f << R"({"seed": 77})";
  }
  RunConfig cfg = RunConfig::Load(tmp.Sub("run.json"));
  CHECK(cfg.seed == 77);
  CHECK_THROWS_AS(RunConfig::Load(tmp.Sub("missing.json")), IoError);
  {
    std::ofstream f(tmp.Sub("bad.json"));
    f << "{broken";
  }
  CHECK_THROWS_AS(RunConfig::Load(tmp.Sub("bad.json")), ConfigError);
}

TEST_CASE("overrides apply to dotted paths with json value parsing") {
  RunConfig cfg;
  cfg = ApplyOverride(cfg, "stage1.epochs=3");
  CHECK(cfg.stage1.epochs == 3);
  cfg = ApplyOverride(cfg, "model.bottleneck_d=8");
  CHECK(cfg.model.bottleneck.d == 8);
  cfg = ApplyOverride(cfg, "stage1.optimizer.lr=0.5");
  CHECK(cfg.stage1.optimizer.lr == 0.5);
  cfg = ApplyOverride(cfg, "confusion.enabled=true");
  CHECK(cfg.confusion.enabled);
  cfg = ApplyOverride(cfg, "data_dir=/some/cache/path");
  CHECK(cfg.data_dir == "/some/cache/path");
}

TEST_CASE("malformed overrides are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(ApplyOverride(cfg, "no_equals_sign"), ArgumentError);
  CHECK_THROWS_AS(ApplyOverride(cfg, "=5"), ArgumentError);
}

TEST_CASE("validation rejects inconsistent sections") {
  RunConfig cfg;
  cfg.model.bottleneck.d = 5;  // odd
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);

  cfg = RunConfig();
  cfg.stage1.optimizer.lr = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);

  cfg = RunConfig();
  cfg.stage1.batch = 0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);

  cfg = RunConfig();
  cfg.vocoder.upsample_factors = {8, 8, 2};  // product != hop
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);

  cfg = RunConfig();
  cfg.model.n_mels = 40;  // disagrees with mel.n_mels
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);

  cfg = RunConfig();
  cfg.probe.train_frac = 0.95;
  cfg.probe.val_frac = 0.1;  // leaves nothing for test
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);

  cfg = RunConfig();
  cfg.confusion.weight = -1.0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
}

TEST_CASE("the preset files in the repository all parse and validate") {
  const char* names[] = {"bottleneck-autovc", "latent-10hz", "adv-speaker",
                         "vcc20",             "e2e",         "learnable-mel",
                         "smoke"};
  for (const char* name : names) {
    std::string path = std::string(FASTVC_SOURCE_DIR) + "/configs/" + name +
                       ".json";
    RunConfig cfg = RunConfig::Load(path);
    CHECK_NOTHROW(cfg.Validate());
  }
}
