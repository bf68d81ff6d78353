// Copyright 2026 The Estate Events Authors.
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

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "estate/config.hpp"
#include "estate/error.hpp"
#include "estate/evaluation.hpp"
#include "estate/geolocation.hpp"
#include "estate/ingestion.hpp"
#include "estate/json_codec.hpp"
#include "estate/linear_model.hpp"
#include "estate/pipeline.hpp"
#include "estate/service.hpp"

namespace {

using namespace estate;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kSystem = 2;

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close() {
    stream().flush();
    if (!stream()) throw IoError("write failed");
  }

 private:
  std::ofstream file_;
};

PseudonymKey cli_key(const std::string& key_file) {
  if (!key_file.empty()) return PseudonymKey::from_file(key_file);
  return PseudonymKey::from_env("PSEUDONYM_KEY");
}

Service* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estate event detection: ingest, train, evaluate, geolocate and serve."};
  app.require_subcommand(1);

  std::string key_file;
  std::string out_path;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Normalize and pseudonymize a record file into a corpus");
  std::string ingest_input;
  ingest->add_option("--input", ingest_input, "NDJSON input records")->required();
  ingest->add_option("--key-file", key_file, "hex pseudonym key (default: $PSEUDONYM_KEY)");
  ingest->add_option("--out", out_path, "output file (default: stdout)");

  // train
  auto* train = app.add_subcommand("train", "Train a linear model on a corpus");
  std::string train_input, train_task = "estate";
  TrainParams params;
  train->add_option("--input", train_input, "corpus or input records")->required();
  train->add_option("--task", train_task, "estate | topic")->check(CLI::IsMember({"estate", "topic"}));
  train->add_option("--out", out_path, "model file")->required();
  train->add_option("--key-file", key_file, "hex pseudonym key (default: $PSEUDONYM_KEY)");
  train->add_option("--epochs", params.epochs)->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", params.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--l2", params.l2)->check(CLI::NonNegativeNumber);
  train->add_option("--batch-size", params.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--seed", params.seed);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score predictions against gold labels");
  std::string gold_path, pred_path, eval_task = "estate", format = "text";
  eval->add_option("--gold", gold_path, "gold NDJSON")->required();
  eval->add_option("--pred", pred_path, "prediction or event NDJSON")->required();
  eval->add_option("--task", eval_task, "estate | topic | geo")->check(CLI::IsMember({"estate", "topic", "geo"}));
  eval->add_option("--format", format, "text | csv | json")->check(CLI::IsMember({"text", "csv", "json"}));
  eval->add_option("--out", out_path, "output file (default: stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string serve_config;
  serve->add_option("--config", serve_config, "config file")->required();

  // geolocate
  auto* geo = app.add_subcommand("geolocate", "Infer locations for input records from a gazetteer");
  std::string gazetteer_dir, geo_input, granularity = "POI";
  geo->add_option("--gazetteer", gazetteer_dir, "directory with pois.csv and neighbourhoods.csv")->required();
  geo->add_option("--input", geo_input, "NDJSON input records")->required();
  geo->add_option("--granularity", granularity, "POI | Neighbourhood");
  geo->add_option("--key-file", key_file, "hex pseudonym key (default: $PSEUDONYM_KEY)");
  geo->add_option("--out", out_path, "output file (default: stdout)");

  // pipeline run
  auto* pipeline = app.add_subcommand("pipeline", "Batch pipeline operations");
  pipeline->require_subcommand(1);
  auto* run = pipeline->add_subcommand("run", "Classify, geolocate and store a record file");
  std::string run_config, run_input;
  run->add_option("--config", run_config, "config file")->required();
  run->add_option("--input", run_input, "NDJSON input records")->required();
  run->add_option("--out", out_path, "event output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return kValidation;
  }

  try {
    if (*ingest) {
      const auto batch = ingest_batch(ingest_input, cli_key(key_file));
      Output out(out_path);
      write_corpus(batch.corpus, out.stream());
      out.close();
      std::cerr << "ingested " << batch.corpus.size() << " posts, skipped " << batch.skipped << "\n";
    } else if (*train) {
      const auto space = *label_space_from_name(train_task);
      const auto batch = ingest_batch(train_input, cli_key(key_file));
      const auto result = train_linear(batch.corpus, space, params);
      result.model.save(out_path);
      std::cerr << "trained " << train_task << " model on " << batch.corpus.size() << " posts; final loss "
                << result.epoch_losses.back() << "\n";
    } else if (*eval) {
      const auto task = *task_from_name(eval_task);
      const auto report = evaluate(task, load_gold(gold_path), load_predictions(pred_path));
      Output out(out_path);
      out.stream() << render_report(report, *report_format_from_name(format));
      out.close();
    } else if (*serve) {
      const auto config = load_config(serve_config);
      auto service = make_service(config);
      g_service = service.get();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << config.listen_host << ":" << config.listen_port << "\n";
      service->listen(config.listen_host, config.listen_port);
      g_service = nullptr;
    } else if (*geo) {
      const auto g = granularity_from_name(granularity);
      if (!g) throw ValidationError("granularity must be POI or Neighbourhood");
      const auto gaz = load_gazetteer_dir(gazetteer_dir);
      const auto batch = ingest_batch(geo_input, cli_key(key_file));
      Output out(out_path);
      for (const auto& post : batch.corpus.posts) {
        const auto r = geolocate(post, gaz, *g);
        nlohmann::json line = {
            {"post_id", post.post_id},
            {"location", r.resolved ? location_to_json(*r.resolved) : nlohmann::json(nullptr)},
            {"candidates_considered", r.candidates_considered}};
        out.stream() << line.dump() << "\n";
      }
      out.close();
    } else if (*run) {
      const auto config = load_config(run_config);
      const auto batch = ingest_batch(run_input, load_key(config));
      auto p = build_pipeline(config);
      const auto events = p->process_corpus(batch.corpus);
      Output out(out_path);
      for (const auto& e : events) out.stream() << serialize_event(e) << "\n";
      out.close();
      std::cerr << "stored " << events.size() << " events, parked " << p->parked() << ", skipped "
                << batch.skipped << " input lines\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const SystemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSystem;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSystem;
  }
  return kOk;
}
