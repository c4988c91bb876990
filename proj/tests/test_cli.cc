#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "scenarios.h"
#include "srl/cli.h"
#include "srl/oracle.h"
#include "test_util.h"

using namespace srl;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string log;
};

Run Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "srl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, log;
  Run r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, log);
  r.out = out.str();
  r.log = log.str();
  return r;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("oracle-check succeeds on the fixtures") {
    for (const char* f : {"tiny.json", "dev.json", "ten.conll09"}) {
      const Run r = Cli({"oracle-check", "--input", testing::DataPath(f)});
      CHECK(r.code == 0);
      const auto j = nlohmann::json::parse(r.out);
      CHECK(j["failed"] == 0);
      CHECK(j["checked"].get<int>() > 0);
    }
    const Run r2 = Cli({"oracle-check", "--input", testing::DataPath("tiny.json"),
                        "--order", "l2r", "--trailing-no-arcs"});
    CHECK(r2.code == 0);
  }

  TEST_CASE("usage errors exit 1 and name the problem") {
    const Run missing = Cli({"decode", "--input", "x.json", "--output", "y.json"});
    CHECK(missing.code == 1);
    CHECK(missing.log.find("--model") != std::string::npos);
    CHECK(Cli({"oracle-check", "--input", "a", "--bogus"}).code == 1);
    CHECK(Cli({"no-such-command"}).code == 1);
    CHECK(Cli({"oracle-check", "--input", "/nonexistent.json"}).code == 1);
    CHECK(Cli({"trace", "--input", testing::DataPath("tiny.json"), "--sentence", "999"})
              .code == 1);
  }

  TEST_CASE("trace prints the oracle sequence") {
    const Corpus corpus = ReadJsonCorpus(testing::DataPath("tiny.json"));
    const Run r = Cli({"trace", "--input", testing::DataPath("tiny.json"), "--sentence", "0"});
    REQUIRE(r.code == 0);
    const auto lines = Lines(r.out);
    const auto actions = DeriveActions(corpus[0].sentence, corpus[0].graph);
    REQUIRE(lines.size() == actions.size() + 1);
    CHECK(lines[0] == TraceHeader(false));
    for (size_t t = 0; t < actions.size(); ++t) {
      CHECK(lines[t + 1].find("\t" + actions[t].ToString() + "\t") != std::string::npos);
    }
  }

  TEST_CASE("train, decode, eval and bench pipeline") {
    const std::string dir = testing::ScratchDir("cli_pipeline");
    const std::string config = dir + "/config.json";
    nlohmann::json cfg;
    cfg["model"] = testing::SmallConfig().ToJson();
    cfg["train"] = {{"learning_rate", 0.01}, {"max_epochs", 2}, {"l2", 0.0}};
    std::ofstream(config) << cfg.dump();
    const std::string model = dir + "/model";
    const std::string tiny = testing::DataPath("tiny.json");

    const Run train = Cli({"train", "--config", config, "--train", tiny, "--dev", tiny,
                           "--out", model, "--seed", "3"});
    INFO(train.log);
    REQUIRE(train.code == 0);
    CHECK(nlohmann::json::parse(train.out)["epochs"] == 2);
    CHECK(Lines(testing::ReadBytes(model + "/metrics.jsonl")).size() == 2);
    for (const auto& line : Lines(train.log)) {
      CHECK(nlohmann::json::parse(line).contains("event"));
    }

    const std::string pred = dir + "/pred.conll09";
    const Run decode = Cli({"decode", "--model", model, "--input", tiny, "--output", pred,
                            "--beam", "4", "--trace"});
    REQUIRE(decode.code == 0);
    CHECK(ReadCorpus(pred).size() == ReadJsonCorpus(tiny).size());
    CHECK(decode.out.find("# sentence") != std::string::npos);

    const Run eval = Cli({"eval", "--gold", tiny, "--pred", pred, "--report", "json"});
    REQUIRE(eval.code == 0);
    const auto report = nlohmann::json::parse(eval.out);
    CHECK(report.contains("arg_f1"));
    CHECK(report["violations"].is_object());

    const Run self = Cli({"eval", "--gold", tiny, "--pred", tiny, "--report", "json"});
    CHECK(nlohmann::json::parse(self.out)["arg_f1"] == 1.0);

    const Run bench = Cli({"bench", "--model", model, "--input", tiny});
    REQUIRE(bench.code == 0);
    CHECK(nlohmann::json::parse(bench.out)["tokens_per_second"].get<double>() > 0);

    const Run traced = Cli({"trace", "--input", tiny, "--model", model, "--beam", "2"});
    CHECK(traced.code == 0);
    CHECK(Lines(traced.out)[0] == TraceHeader(true));

    const Run zero = Cli({"decode", "--model", model, "--input", tiny, "--output", pred,
                          "--beam", "0"});
    CHECK(zero.code == 1);
  }

  TEST_CASE("config errors exit 1") {
    const std::string dir = testing::ScratchDir("cli_bad_config");
    const std::string config = dir + "/config.json";
    std::ofstream(config) << R"({"model": {"state_dim": -1}})";
    const std::string tiny = testing::DataPath("tiny.json");
    CHECK(Cli({"train", "--config", config, "--train", tiny, "--dev", tiny, "--out",
               dir + "/m"})
              .code == 1);
    std::ofstream(config) << R"({"optimizer": {}})";
    CHECK(Cli({"train", "--config", config, "--train", tiny, "--dev", tiny, "--out",
               dir + "/m"})
              .code == 1);
  }
}
