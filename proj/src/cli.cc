#include "srl/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "srl/conll_io.h"
#include "srl/decoder.h"
#include "srl/embeddings.h"
#include "srl/evaluator.h"
#include "srl/nn/kernels.h"
#include "srl/oracle.h"
#include "srl/scorer.h"
#include "srl/trainer.h"
#include "srl/transition.h"

namespace srl {
namespace {

using json = nlohmann::json;

void Log(std::ostream& log, const std::string& event, json fields = json::object()) {
  fields["event"] = event;
  log << fields.dump() << "\n" << std::flush;
}

std::vector<Sentence> SentencesOf(const Corpus& corpus) {
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(ex.sentence);
  return out;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

struct Options {
  std::string input;
  std::string output;
  std::string model;
  std::string gold;
  std::string pred;
  std::string config;
  std::string train;
  std::string dev;
  std::string out_dir;
  std::string pretrained;
  std::string contextual;
  std::string report = "text";
  std::string order = "close_first";
  bool order_set = false;
  bool trailing_no_arcs = false;
  bool predicted = false;
  bool trace = false;
  bool expand_roles = false;
  int beam = 1;
  int sentence = 0;
  int reps = 3;
  int workers = 1;
  int kernel_threads = 1;
  std::optional<uint64_t> seed;
  std::optional<int> epochs;
};

Corpus LoadInput(const std::string& path, const Options& o) {
  Corpus corpus = ReadCorpus(path, o.predicted);
  if (!o.contextual.empty()) AttachContextualVectors(o.contextual, &corpus);
  return corpus;
}

int OracleCheck(const Options& o, std::ostream& out, std::ostream& log) {
  const Corpus corpus = LoadInput(o.input, o);
  OracleOptions oracle{ParseParsingOrder(o.order), o.trailing_no_arcs};
  const RoundtripReport report = RoundtripCheck(corpus, oracle);
  json result = {{"checked", report.checked},
                 {"failed", report.failed},
                 {"order", ParsingOrderName(oracle.order)}};
  if (report.first_failing_id) result["first_failing_id"] = *report.first_failing_id;
  out << result.dump() << "\n";
  for (const auto& e : report.errors) Log(log, "oracle_failure", {{"error", e}});
  return report.failed == 0 ? 0 : 1;
}

int TrainCommand(const Options& o, std::ostream& out, std::ostream& log) {
  ModelConfig model_config;
  TrainConfig train_config;
  if (!o.config.empty()) {
    const json cfg = ReadJsonFile(o.config);
    if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      if (it.key() != "model" && it.key() != "train") {
        throw ConfigError("unknown config section '" + it.key() + "'");
      }
    }
    if (cfg.contains("model")) model_config = ModelConfig::FromJson(cfg.at("model"));
    if (cfg.contains("train")) train_config = TrainConfig::FromJson(cfg.at("train"));
  }
  if (o.seed) train_config.seed = *o.seed;
  if (o.epochs) train_config.max_epochs = *o.epochs;
  if (o.order_set) model_config.order = ParseParsingOrder(o.order);
  if (o.trailing_no_arcs) model_config.trailing_no_arcs = true;
  train_config.workers = o.workers;

  const Corpus train = LoadInput(o.train, o);
  const Corpus dev = LoadInput(o.dev, o);
  if (!o.contextual.empty() && !train.empty() &&
      !train[0].sentence.contextual.empty()) {
    model_config.contextual_dim =
        static_cast<int>(train[0].sentence.contextual[0].size());
  }
  std::optional<PretrainedEmbeddings> pretrained;
  if (!o.pretrained.empty()) {
    pretrained = LoadPretrainedEmbeddings(o.pretrained);
    model_config.use_pretrained = true;
  } else if (model_config.use_pretrained) {
    throw ConfigError("use_pretrained requires --pretrained");
  }
  model_config.Validate();
  train_config.Validate();
  Log(log, "config", {{"command", "train"},
                      {"model", model_config.ToJson()},
                      {"train", train_config.ToJson()},
                      {"train_path", o.train},
                      {"dev_path", o.dev},
                      {"out", o.out_dir},
                      {"train_sentences", train.size()},
                      {"dev_sentences", dev.size()}});

  std::filesystem::create_directories(o.out_dir);
  std::ofstream metrics(std::filesystem::path(o.out_dir) / "metrics.jsonl");
  if (!metrics) throw InputError("cannot write metrics log in '" + o.out_dir + "'");
  TrainHooks hooks;
  hooks.metrics_log = &metrics;
  hooks.checkpoint_dir = o.out_dir;
  hooks.on_epoch = [&log](const EpochMetrics& m, double seconds) {
    json j = m.ToJson();
    j["seconds"] = seconds;
    Log(log, "epoch", j);
  };
  const auto result = Train<float>(train, dev, model_config, train_config,
                                   pretrained ? &*pretrained : nullptr, hooks);
  json summary = {{"best_epoch", result.best_epoch},
                  {"best_score", result.best_score},
                  {"epochs", result.epochs.size()},
                  {"stop_reason", result.stop_reason},
                  {"checkpoint", o.out_dir}};
  Log(log, "train_done", summary);
  out << summary.dump() << "\n";
  return 0;
}

int DecodeCommand(const Options& o, std::ostream& out, std::ostream& log) {
  const Model<float> model = Model<float>::Load(o.model);
  Corpus corpus = LoadInput(o.input, o);
  DecodeOptions options;
  options.beam = o.beam;
  options.expand_roles = o.expand_roles;
  Log(log, "config", {{"command", "decode"},
                      {"model", o.model},
                      {"input", o.input},
                      {"output", o.output},
                      {"beam", o.beam},
                      {"expand_roles", o.expand_roles},
                      {"workers", o.workers},
                      {"model_config", model.config().ToJson()}});
  const auto results = DecodeCorpus(model, SentencesOf(corpus), options, o.workers);
  for (size_t i = 0; i < corpus.size(); ++i) {
    corpus[i].graph = results[i].graph;
    if (o.trace) {
      out << "# sentence " << corpus[i].sentence.id << "\tscore "
          << results[i].score << "\n"
          << FormatTrace(corpus[i].sentence, results[i], model.config().order);
    }
  }
  WriteCorpus(corpus, o.output);
  Log(log, "decode_done", {{"sentences", corpus.size()}, {"output", o.output}});
  return 0;
}

int EvalCommand(const Options& o, std::ostream& out, std::ostream& log) {
  const Corpus gold = ReadCorpus(o.gold, o.predicted);
  const Corpus pred = ReadCorpus(o.pred, o.predicted);
  Log(log, "config", {{"command", "eval"}, {"gold", o.gold}, {"pred", o.pred}});
  const EvalReport report = Evaluate(gold, pred);
  if (o.report == "json") {
    out << report.ToJson().dump(2) << "\n";
  } else {
    out << report.ToText();
  }
  return 0;
}

int BenchCommand(const Options& o, std::ostream& out, std::ostream& log) {
  const Model<float> model = Model<float>::Load(o.model);
  const Corpus corpus = LoadInput(o.input, o);
  DecodeOptions options;
  options.beam = o.beam;
  options.expand_roles = o.expand_roles;
  Log(log, "config", {{"command", "bench"},
                      {"model", o.model},
                      {"input", o.input},
                      {"beam", o.beam},
                      {"reps", o.reps},
                      {"workers", o.workers}});
  const auto sentences = SentencesOf(corpus);
  const BenchResult r = BenchDecode(model, sentences, options, o.reps, o.workers);
  out << json{{"tokens", r.tokens},
              {"seconds", r.seconds},
              {"median_seconds", r.median_seconds},
              {"tokens_per_second", r.tokens_per_second},
              {"beam", o.beam},
              {"workers", o.workers}}
             .dump()
      << "\n";
  return 0;
}

int TraceCommand(const Options& o, std::ostream& out, std::ostream& log) {
  const Corpus corpus = LoadInput(o.input, o);
  if (o.sentence < 0 || o.sentence >= static_cast<int>(corpus.size())) {
    throw InputError("sentence index " + std::to_string(o.sentence) +
                     " out of range (corpus has " + std::to_string(corpus.size()) +
                     " sentences)");
  }
  const Example& ex = corpus[o.sentence];
  Log(log, "config", {{"command", "trace"},
                      {"input", o.input},
                      {"sentence", o.sentence},
                      {"model", o.model},
                      {"order", o.order}});
  if (!o.model.empty()) {
    const Model<float> model = Model<float>::Load(o.model);
    DecodeOptions options;
    options.beam = o.beam;
    options.expand_roles = o.expand_roles;
    const DecodeResult r = options.beam == 1 ? DecodeGreedy(model, ex.sentence, options)
                                             : DecodeBeam(model, ex.sentence, options);
    out << FormatTrace(ex.sentence, r, model.config().order);
    return 0;
  }
  OracleOptions oracle{ParseParsingOrder(o.order), o.trailing_no_arcs};
  const auto actions = DeriveActions(ex.sentence, ex.graph, oracle);
  out << TraceHeader(false) << "\n";
  TransitionState state = TransitionState::Initial(ex.sentence, oracle.order);
  for (size_t t = 0; t < actions.size(); ++t) {
    out << TraceLine(static_cast<int>(t), ex.sentence, state, actions[t]) << "\n";
    state.ApplyInPlace(actions[t]);
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"Transition-based semantic role labeler"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--workers", o.workers, "Decoding threads")->check(CLI::PositiveNumber);
  app.add_option("--kernel-threads", o.kernel_threads, "Threads per dense kernel")
      ->check(CLI::PositiveNumber);

  auto add_order = [&](CLI::App* sub) {
    sub->add_option("--order", o.order,
                    "Parsing order: close_first, left_to_right, right_to_left");
    sub->add_flag("--trailing-no-arcs", o.trailing_no_arcs,
                  "Oracle emits NO-ARC until both context stacks are exhausted");
  };
  auto add_input_flags = [&](CLI::App* sub) {
    sub->add_flag("--predicted", o.predicted,
                  "Read predicted lemma/POS/syntax columns from CoNLL input");
    sub->add_option("--contextual", o.contextual, "Per-token contextual vector file");
  };

  auto* oracle = app.add_subcommand("oracle-check", "Round-trip gold graphs through the oracle");
  oracle->add_option("--input", o.input, "Corpus (.json or CoNLL-2009)")->required();
  add_order(oracle);
  add_input_flags(oracle);

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", o.config, "JSON config with model/train sections");
  train->add_option("--train", o.train, "Training corpus")->required();
  train->add_option("--dev", o.dev, "Development corpus")->required();
  train->add_option("--out", o.out_dir, "Output checkpoint directory")->required();
  train->add_option("--pretrained", o.pretrained, "Pretrained word vectors");
  train->add_option("--seed", o.seed, "Random seed");
  train->add_option("--epochs", o.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  auto* train_order = train->add_option("--order", o.order, "Parsing order");
  train->add_flag("--trailing-no-arcs", o.trailing_no_arcs, "Oracle trailing NO-ARCs");
  add_input_flags(train);

  auto* decode = app.add_subcommand("decode", "Decode a corpus with a trained model");
  decode->add_option("--model", o.model, "Checkpoint directory")->required();
  decode->add_option("--input", o.input, "Input corpus")->required();
  decode->add_option("--output", o.output, "Output corpus path")->required();
  decode->add_option("--beam", o.beam, "Beam width")->check(CLI::NonNegativeNumber);
  decode->add_flag("--trace", o.trace, "Print the step trace of every sentence");
  decode->add_flag("--expand-roles", o.expand_roles, "Expand arcs over all roles");
  add_input_flags(decode);

  auto* eval = app.add_subcommand("eval", "Score predictions against gold");
  eval->add_option("--gold", o.gold, "Gold corpus")->required();
  eval->add_option("--pred", o.pred, "Predicted corpus")->required();
  eval->add_option("--report", o.report, "json or text")
      ->check(CLI::IsMember({"json", "text"}));
  eval->add_flag("--predicted", o.predicted, "Read predicted CoNLL columns");

  auto* bench = app.add_subcommand("bench", "Measure decoding throughput");
  bench->add_option("--model", o.model, "Checkpoint directory")->required();
  bench->add_option("--input", o.input, "Input corpus")->required();
  bench->add_option("--beam", o.beam, "Beam width")->check(CLI::NonNegativeNumber);
  bench->add_option("--reps", o.reps, "Timed repetitions (at least 3)");
  bench->add_flag("--expand-roles", o.expand_roles, "Expand arcs over all roles");
  add_input_flags(bench);

  auto* trace = app.add_subcommand("trace", "Print the transition trace of one sentence");
  trace->add_option("--input", o.input, "Corpus")->required();
  trace->add_option("--sentence", o.sentence, "Sentence position (0-based)");
  trace->add_option("--model", o.model, "Trace the model's decode instead of the oracle");
  trace->add_option("--beam", o.beam, "Beam width when decoding")
      ->check(CLI::NonNegativeNumber);
  trace->add_flag("--expand-roles", o.expand_roles, "Expand arcs over all roles");
  add_order(trace);
  add_input_flags(trace);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    log << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    log << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }
  o.order_set = train_order->count() > 0;
  nn::kernels::SetKernelThreads(o.kernel_threads);

  try {
    if (*oracle) return OracleCheck(o, out, log);
    if (*train) return TrainCommand(o, out, log);
    if (*decode) return DecodeCommand(o, out, log);
    if (*eval) return EvalCommand(o, out, log);
    if (*bench) return BenchCommand(o, out, log);
    if (*trace) return TraceCommand(o, out, log);
  } catch (const ContractViolation& e) {
    Log(log, "error", {{"kind", "internal"}, {"message", e.what()}});
    return 2;
  } catch (const Error& e) {
    Log(log, "error", {{"kind", "input"}, {"message", e.what()}});
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    Log(log, "error", {{"kind", "input"}, {"message", e.what()}});
    return 1;
  } catch (const std::exception& e) {
    Log(log, "error", {{"kind", "internal"}, {"message", e.what()}});
    return 2;
  }
  return 1;
}

}  // namespace srl
